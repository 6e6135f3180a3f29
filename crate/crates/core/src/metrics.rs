//! Run series and summary statistics over independent runs.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::protocols::ProtocolKind;
use crate::topology::TopologyKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunFingerprint {
    pub protocol: ProtocolKind,
    pub topology: TopologyKind,
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunCounters {
    pub failures: u64,
    pub recoveries: u64,
    pub exchanges: u64,
}

/// Everything a run records. Series entry `s` covers the second ending at
/// `s + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub fingerprint: RunFingerprint,
    /// Inconsistent alive nodes at each probe.
    pub inconsistency_series: Vec<u32>,
    /// Accesses per subscriber node in each second, averaged over all `n`.
    pub load_series: Vec<f64>,
    /// Accesses of the busiest monitor or aggregator in each second; empty
    /// for peer-to-peer protocols.
    pub monitor_load_series: Vec<u64>,
    pub counters: RunCounters,
}

impl RunMetrics {
    pub fn horizon(&self) -> usize {
        self.inconsistency_series.len()
    }

    pub fn inconsistency_fraction(&self, warmup: usize) -> Result<f64> {
        inconsistency_fraction(after(&self.inconsistency_series, warmup), self.fingerprint.n)
    }

    pub fn mean_load(&self, warmup: usize) -> Result<f64> {
        mean(after(&self.load_series, warmup))
    }

    /// Mean per-second accesses of the busiest infrastructure entity.
    pub fn mean_infra_load(&self, warmup: usize) -> Option<f64> {
        let s = after(&self.monitor_load_series, warmup);
        (!s.is_empty()).then(|| s.iter().map(|&v| v as f64).sum::<f64>() / s.len() as f64)
    }

    pub fn peak_infra_load(&self) -> Option<u64> {
        self.monitor_load_series.iter().copied().max()
    }
}

fn after<T>(s: &[T], warmup: usize) -> &[T] {
    &s[warmup.min(s.len())..]
}

fn mean(s: &[f64]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Time average of `count / n`.
pub fn inconsistency_fraction(series: &[u32], n: usize) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let total: u64 = series.iter().map(|&c| c as u64).sum();
    Ok(total as f64 / (series.len() as f64 * n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub ci95_halfwidth: f64,
    pub sample_count: usize,
}

impl SummaryStats {
    pub fn ci_low(&self) -> f64 {
        self.mean - self.ci95_halfwidth
    }

    pub fn ci_high(&self) -> f64 {
        self.mean + self.ci95_halfwidth
    }
}

/// Two-sided quantile `p` of Student's t with `df` degrees of freedom.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(p)
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    let count = values.len();
    if count < 2 {
        return Err(Error::TooFewSamples(count));
    }
    let c = count as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / c;
    let sd = if min == max {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c - 1.0)).sqrt()
    };
    let ci95_halfwidth = if sd == 0.0 {
        0.0
    } else {
        t_quantile(0.975, c - 1.0) * sd / c.sqrt()
    };
    // rounding in the mean can push it a hair outside [min, max]
    let mean = mean.clamp(min, max);
    Ok(SummaryStats {
        mean,
        sd,
        min,
        max,
        ci95_halfwidth,
        sample_count: count,
    })
}

/// True iff the two 95% confidence intervals are disjoint.
pub fn significant_difference(a: &SummaryStats, b: &SummaryStats) -> bool {
    a.ci_high() < b.ci_low() || b.ci_high() < a.ci_low()
}
