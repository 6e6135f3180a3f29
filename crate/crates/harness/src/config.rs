//! Experiment configuration: flat `key=value` text and command-line flags.
//!
//! Both sources produce the same list of `(key, value)` pairs, applied in
//! order, so a flag given after a file overrides the file. Keys holding an
//! axis of the experiment grid (`n`, `rate`, `topology`, `protocol`) accept
//! comma-separated lists.

use std::path::PathBuf;

use hbsim_core::protocols::{ForwardStamp, GroupLayout, ProtocolConfig, ProtocolKind};
use hbsim_core::sim::{FailureModel, Recovery};
use hbsim_core::topology::{GenParams, TopologyKind, DEFAULT_P_INVERT, DEFAULT_P_REWIRE};

use crate::error::{HarnessError, Result};

pub const BASELINE_RATES: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
pub const DESK_SIZES: [usize; 2] = [100, 1000];
/// Sizes at or above this need `large=true`.
pub const LARGE_N: usize = 10_000;

pub const KEYS: &[&str] = &[
    "n",
    "k",
    "topology",
    "protocol",
    "rate",
    "runs",
    "horizon",
    "seed",
    "warmup",
    "t_poll",
    "t_fresh",
    "max_age",
    "branching",
    "monitors",
    "group_layout",
    "forward_stamp",
    "p_rewire",
    "p_invert",
    "gamma_shape",
    "recovery",
    "downtime",
    "large",
    "out",
    "workers",
];

/// One cell of the grid with everything needed to run it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub topology: TopologyKind,
    pub gen: GenParams,
    pub protocol: ProtocolConfig,
    pub failure: FailureModel,
    pub horizon: u32,
    pub runs: usize,
    pub root_seed: u64,
    pub warmup: usize,
}

impl ExperimentConfig {
    /// Stable label of the cell, mixed into every run seed.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}|{}|n={}|k={}|rate={}",
            self.protocol.kind, self.topology, self.n, self.k, self.failure.rate_pct_per_min
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    /// Fixed k for every cell; `None` means `round(sqrt(n))` per cell.
    pub k: Option<usize>,
    pub rates: Vec<f64>,
    pub topologies: Vec<TopologyKind>,
    pub protocols: Vec<ProtocolKind>,
    pub p_rewire: f64,
    pub p_invert: f64,
    /// Knobs shared by every cell; `kind` is overwritten per cell.
    pub protocol: ProtocolConfig,
    pub failure: FailureModel,
    pub horizon: u32,
    pub runs: usize,
    pub root_seed: u64,
    pub warmup: usize,
    pub large: bool,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

pub fn default_k(n: usize) -> usize {
    ((n as f64).sqrt().round() as usize).max(1)
}

impl Default for SweepSpec {
    /// The baseline grid at desk scale.
    fn default() -> Self {
        SweepSpec {
            ns: DESK_SIZES.to_vec(),
            k: None,
            rates: BASELINE_RATES.to_vec(),
            topologies: vec![TopologyKind::Random],
            protocols: ProtocolKind::ALL.to_vec(),
            p_rewire: DEFAULT_P_REWIRE,
            p_invert: DEFAULT_P_INVERT,
            protocol: ProtocolConfig::new(ProtocolKind::SimpleP2P),
            failure: FailureModel::default(),
            horizon: 3600,
            runs: 10,
            root_seed: 1,
            warmup: 0,
            large: false,
            out: None,
            workers: None,
        }
    }
}

impl SweepSpec {
    /// Defaults for the single-configuration `run` verb.
    pub fn single_default() -> Self {
        SweepSpec {
            ns: vec![1000],
            rates: vec![1.0],
            protocols: vec![ProtocolKind::TransitiveP2P],
            ..Default::default()
        }
    }

    pub fn cell_count(&self) -> usize {
        self.protocols.len() * self.topologies.len() * self.ns.len() * self.rates.len()
    }

    /// The cross product, ordered by (protocol, topology, n, rate).
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &p in &self.protocols {
            for &t in &self.topologies {
                for &n in &self.ns {
                    for &rate in &self.rates {
                        let k = self.k.unwrap_or_else(|| default_k(n));
                        let mut protocol = self.protocol;
                        protocol.kind = p;
                        out.push(ExperimentConfig {
                            n,
                            k,
                            topology: t,
                            gen: GenParams {
                                k,
                                p_rewire: self.p_rewire,
                                p_invert: self.p_invert,
                            },
                            protocol,
                            failure: FailureModel {
                                rate_pct_per_min: rate,
                                ..self.failure
                            },
                            horizon: self.horizon,
                            runs: self.runs,
                            root_seed: self.root_seed,
                            warmup: self.warmup,
                        });
                    }
                }
            }
        }
        out
    }

    /// Checks everything that can be checked without generating graphs.
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(HarnessError::Config(format!("{what} list is empty")));
        if self.ns.is_empty() {
            return empty("n");
        }
        if self.rates.is_empty() {
            return empty("rate");
        }
        if self.topologies.is_empty() {
            return empty("topology");
        }
        if self.protocols.is_empty() {
            return empty("protocol");
        }
        if self.runs < 1 {
            return Err(HarnessError::Config("runs must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be >= 1".into()));
        }
        for &n in &self.ns {
            if n < 2 {
                return Err(HarnessError::Config(format!("n={n} must be >= 2")));
            }
            if n >= LARGE_N && !self.large {
                return Err(HarnessError::Config(format!(
                    "n={n} is a long run; set large=true (or pass --large) to allow it"
                )));
            }
            let k = self.k.unwrap_or_else(|| default_k(n));
            if k < 1 || k >= n {
                return Err(HarnessError::Config(format!("k={k} must be in 1..{n} for n={n}")));
            }
            self.protocol.validate(n)?;
        }
        for &r in &self.rates {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(HarnessError::Config(format!("rate={r} must be >= 0")));
            }
        }
        for (name, p) in [("p_rewire", self.p_rewire), ("p_invert", self.p_invert)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(HarnessError::Config(format!("{name}={p} must be in [0, 1]")));
            }
        }
        self.failure.validate()?;
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "n" => self.ns = list(key, v, parse_num)?,
            "k" => {
                self.k = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "topology" => self.topologies = list(key, v, parse_from_str)?,
            "protocol" => self.protocols = list(key, v, parse_from_str)?,
            "rate" => self.rates = list(key, v, parse_num)?,
            "runs" => self.runs = parse_num(key, v)?,
            "horizon" => self.horizon = parse_num(key, v)?,
            "seed" => self.root_seed = parse_num(key, v)?,
            "warmup" => self.warmup = parse_num(key, v)?,
            "t_poll" => self.protocol.t_poll = parse_num(key, v)?,
            "t_fresh" => self.protocol.t_fresh = Some(parse_num(key, v)?),
            "max_age" => self.protocol.max_age = parse_num(key, v)?,
            "branching" => self.protocol.branching = Some(parse_num(key, v)?),
            "monitors" => self.protocol.monitor_count = parse_num(key, v)?,
            "group_layout" => self.protocol.group_layout = parse_from_str::<GroupLayout>(key, v)?,
            "forward_stamp" => self.protocol.forward_stamp = parse_from_str::<ForwardStamp>(key, v)?,
            "p_rewire" => self.p_rewire = parse_num(key, v)?,
            "p_invert" => self.p_invert = parse_num(key, v)?,
            "gamma_shape" => self.failure.gamma_shape = parse_num(key, v)?,
            "recovery" => {
                self.failure.recovery = match v.to_ascii_lowercase().as_str() {
                    "toggle" => Recovery::Toggle,
                    "repair" => Recovery::Repair {
                        mean_downtime: current_downtime(&self.failure),
                    },
                    _ => return Err(bad(key, v, "expected `toggle` or `repair`")),
                }
            }
            "downtime" => {
                self.failure.recovery = Recovery::Repair {
                    mean_downtime: parse_num(key, v)?,
                };
            }
            "large" => self.large = parse_bool(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "workers" => self.workers = Some(parse_num(key, v)?),
            _ => return Err(HarnessError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        for (k, v) in pairs {
            self.apply(k, v)?;
        }
        Ok(())
    }

    /// The single cell of a one-configuration spec.
    pub fn single(&self) -> Result<ExperimentConfig> {
        if self.cell_count() != 1 {
            return Err(HarnessError::Config(format!(
                "`run` takes one configuration but the axes give {} cells; use `sweep`",
                self.cell_count()
            )));
        }
        Ok(self.cells().remove(0))
    }
}

fn current_downtime(f: &FailureModel) -> f64 {
    match f.recovery {
        Recovery::Repair { mean_downtime } => mean_downtime,
        Recovery::Toggle => hbsim_core::sim::failure::DEFAULT_MEAN_DOWNTIME,
    }
}

fn bad(key: &str, value: &str, why: &str) -> HarnessError {
    HarnessError::Config(format!("{key}={value}: {why}"))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let v = v.trim();
    // allow 1e4 for integer keys
    if let Ok(x) = v.parse::<T>() {
        return Ok(x);
    }
    if let Ok(f) = v.parse::<f64>() {
        if f.fract() == 0.0 && f >= 0.0 {
            if let Ok(x) = format!("{}", f as u64).parse::<T>() {
                return Ok(x);
            }
        }
    }
    v.parse::<T>().map_err(|e| bad(key, v, &e.to_string()))
}

fn parse_from_str<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| bad(key, v, &e.to_string()))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(bad(key, v, "expected true or false")),
    }
}

fn list<T>(key: &str, v: &str, f: fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(key, s))
        .collect()
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped;
/// keys are case-insensitive and `-` is read as `_`.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HarnessError::Config(format!(
                "line {}: expected key=value, got `{line}`",
                i + 1
            )));
        };
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(HarnessError::Config(format!(
                "line {}: unknown key `{}`",
                i + 1,
                k.trim()
            )));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn load_file(path: &std::path::Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_kv(&text)
}
