//! Failure injection.
//!
//! Failures arrive as a renewal process with gamma-distributed gaps whose
//! mean gives `rate_pct_per_min` percent of the `n` nodes per minute.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

pub const DEFAULT_GAMMA_SHAPE: f64 = 2.0;
pub const DEFAULT_MEAN_DOWNTIME: f64 = 10.0;

/// What happens to a node after it fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recovery {
    /// Each arrival flips a uniformly chosen node, dead or alive.
    Toggle,
    /// Each arrival kills a uniformly chosen alive node, which comes back
    /// after a gamma-distributed downtime with this mean (seconds).
    Repair { mean_downtime: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureModel {
    pub rate_pct_per_min: f64,
    pub gamma_shape: f64,
    pub recovery: Recovery,
}

impl Default for FailureModel {
    fn default() -> Self {
        FailureModel {
            rate_pct_per_min: 1.0,
            gamma_shape: DEFAULT_GAMMA_SHAPE,
            recovery: Recovery::Repair {
                mean_downtime: DEFAULT_MEAN_DOWNTIME,
            },
        }
    }
}

impl FailureModel {
    pub fn with_rate(rate_pct_per_min: f64) -> Self {
        FailureModel {
            rate_pct_per_min,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_pct_per_min >= 0.0 && self.rate_pct_per_min.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "failure rate {} must be >= 0",
                self.rate_pct_per_min
            )));
        }
        if !(self.gamma_shape > 0.0 && self.gamma_shape.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "gamma shape {} must be > 0",
                self.gamma_shape
            )));
        }
        if let Recovery::Repair { mean_downtime } = self.recovery {
            if !(mean_downtime > 0.0 && mean_downtime.is_finite()) {
                return Err(Error::InvalidConfig(format!("downtime {mean_downtime} must be > 0")));
            }
        }
        Ok(())
    }

    /// Mean seconds between failures for `n` nodes; `None` at rate 0.
    pub fn mean_gap(&self, n: usize) -> Option<f64> {
        (self.rate_pct_per_min > 0.0 && n > 0).then(|| 60.0 * 100.0 / (self.rate_pct_per_min * n as f64))
    }

    pub fn gap_distribution(&self, n: usize) -> Option<Gamma<f64>> {
        let mean = self.mean_gap(n)?;
        Some(Gamma::new(self.gamma_shape, mean / self.gamma_shape).expect("validated gamma parameters"))
    }

    pub fn downtime_distribution(&self) -> Option<Gamma<f64>> {
        match self.recovery {
            Recovery::Toggle => None,
            Recovery::Repair { mean_downtime } => Some(
                Gamma::new(self.gamma_shape, mean_downtime / self.gamma_shape).expect("validated gamma parameters"),
            ),
        }
    }

    /// One inter-failure gap in seconds, strictly positive.
    pub fn sample_failure_gap<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<f64> {
        let d = self.gap_distribution(n)?;
        Some(positive(d.sample(rng)))
    }
}

pub(crate) fn positive(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        f64::MIN_POSITIVE
    }
}
