//! Running cells of the grid and writing their CSV files.

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use hbsim_core::metrics::{summarize, RunMetrics, SummaryStats};
use hbsim_core::rng::{self, STREAM_TOPOLOGY};
use hbsim_core::sim::{self, SimConfig};
use hbsim_core::topology::generate;

use crate::config::{ExperimentConfig, SweepSpec};
use crate::error::{HarnessError, Result};

pub const DETAIL_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

pub const DETAIL_HEADER: [&str; 14] = [
    "protocol",
    "topology",
    "n",
    "k",
    "rate",
    "run",
    "seed",
    "inconsistency",
    "load",
    "infra_load",
    "infra_peak",
    "failures",
    "recoveries",
    "error",
];

pub const SUMMARY_HEADER: [&str; 21] = [
    "protocol",
    "topology",
    "n",
    "k",
    "rate",
    "runs",
    "ok_runs",
    "inconsistency_mean",
    "inconsistency_sd",
    "inconsistency_min",
    "inconsistency_max",
    "inconsistency_ci95",
    "load_mean",
    "load_sd",
    "load_min",
    "load_max",
    "load_ci95",
    "infra_load_mean",
    "infra_load_ci95",
    "infra_peak_max",
    "errors",
];

/// Seed of run `run` of a cell: depends only on the root seed, the cell
/// fingerprint and the run index.
pub fn run_seed(cfg: &ExperimentConfig, run: usize) -> u64 {
    rng::mix(rng::derive_seed(cfg.root_seed, &cfg.fingerprint()), run as u64)
}

/// Outcome of one run as it appears in the detail CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RunScalars, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunScalars {
    pub inconsistency: f64,
    pub load: f64,
    pub infra_load: Option<f64>,
    pub infra_peak: Option<u64>,
    pub failures: u64,
    pub recoveries: u64,
}

impl RunScalars {
    pub fn from_metrics(m: &RunMetrics, warmup: usize) -> hbsim_core::Result<Self> {
        Ok(RunScalars {
            inconsistency: m.inconsistency_fraction(warmup)?,
            load: m.mean_load(warmup)?,
            infra_load: m.mean_infra_load(warmup),
            infra_peak: m.peak_infra_load(),
            failures: m.counters.failures,
            recoveries: m.counters.recoveries,
        })
    }
}

pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> hbsim_core::Result<RunMetrics> {
    let graph = generate(cfg.topology, cfg.n, &cfg.gen, rng::derive_seed(seed, STREAM_TOPOLOGY))?;
    let sim_cfg = SimConfig::new(cfg.protocol, cfg.failure, cfg.horizon, seed);
    sim::run(&graph, sim_cfg)
}

pub fn run_one(cfg: &ExperimentConfig, run: usize) -> RunRecord {
    let seed = run_seed(cfg, run);
    let outcome = simulate(cfg, seed)
        .and_then(|m| RunScalars::from_metrics(&m, cfg.warmup))
        .map_err(|e| e.to_string());
    RunRecord { run, seed, outcome }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cfg: ExperimentConfig,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub inconsistency: Option<SummaryStats>,
    pub load: Option<SummaryStats>,
    pub infra_load: Option<SummaryStats>,
    pub infra_peak: Option<u64>,
    pub ok_runs: usize,
    pub errors: Vec<String>,
}

impl CellResult {
    pub fn scalars(&self) -> impl Iterator<Item = &RunScalars> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn inconsistency(&self) -> Vec<f64> {
        self.scalars().map(|s| s.inconsistency).collect()
    }

    pub fn load(&self) -> Vec<f64> {
        self.scalars().map(|s| s.load).collect()
    }

    pub fn infra_load(&self) -> Vec<f64> {
        self.scalars().filter_map(|s| s.infra_load).collect()
    }

    pub fn summary(&self) -> CellSummary {
        let errors: Vec<String> = self
            .runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("run {}: {e}", r.run)))
            .collect();
        CellSummary {
            inconsistency: summarize(&self.inconsistency()).ok(),
            load: summarize(&self.load()).ok(),
            infra_load: summarize(&self.infra_load()).ok(),
            infra_peak: self.scalars().filter_map(|s| s.infra_peak).max(),
            ok_runs: self.scalars().count(),
            errors,
        }
    }
}

pub fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| HarnessError::Runtime(format!("thread pool: {e}")))
}

/// Runs every (cell, run) pair on `pool`. Results come back in cell order
/// with runs in index order, whatever the scheduling.
pub fn run_cells(cells: &[ExperimentConfig], pool: &rayon::ThreadPool) -> Vec<CellResult> {
    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cfg)| (0..cfg.runs).map(move |r| (c, r)))
        .collect();
    let records: Vec<RunRecord> = pool.install(|| tasks.par_iter().map(|&(c, r)| run_one(&cells[c], r)).collect());
    let mut out: Vec<CellResult> = cells
        .iter()
        .map(|c| CellResult {
            cfg: c.clone(),
            runs: Vec::new(),
        })
        .collect();
    for (&(c, _), rec) in tasks.iter().zip(records) {
        out[c].runs.push(rec);
    }
    out
}

fn cmp_cells(a: &ExperimentConfig, b: &ExperimentConfig) -> Ordering {
    a.protocol
        .kind
        .as_str()
        .cmp(b.protocol.kind.as_str())
        .then_with(|| a.topology.as_str().cmp(b.topology.as_str()))
        .then_with(|| a.n.cmp(&b.n))
        .then_with(|| a.failure.rate_pct_per_min.total_cmp(&b.failure.rate_pct_per_min))
        .then_with(|| a.k.cmp(&b.k))
}

pub fn sort_results(results: &mut [CellResult]) {
    results.sort_by(|a, b| cmp_cells(&a.cfg, &b.cfg));
    for r in results.iter_mut() {
        r.runs.sort_by_key(|x| x.run);
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cell_prefix(c: &ExperimentConfig) -> [String; 5] {
    [
        c.protocol.kind.to_string(),
        c.topology.to_string(),
        c.n.to_string(),
        c.k.to_string(),
        num(c.failure.rate_pct_per_min),
    ]
}

pub fn write_detail<W: std::io::Write>(results: &[CellResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(DETAIL_HEADER)?;
    for cell in results {
        for r in &cell.runs {
            let mut row: Vec<String> = cell_prefix(&cell.cfg).into();
            row.push(r.run.to_string());
            row.push(r.seed.to_string());
            match &r.outcome {
                Ok(s) => {
                    row.extend([
                        num(s.inconsistency),
                        num(s.load),
                        opt(s.infra_load.map(num)),
                        opt(s.infra_peak),
                        s.failures.to_string(),
                        s.recoveries.to_string(),
                        String::new(),
                    ]);
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 6));
                    row.push(e.clone());
                }
            }
            wr.write_record(&row)?;
        }
    }
    wr.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

fn stats_cols(s: &Option<SummaryStats>) -> [String; 5] {
    match s {
        Some(s) => [num(s.mean), num(s.sd), num(s.min), num(s.max), num(s.ci95_halfwidth)],
        None => Default::default(),
    }
}

pub fn write_summary<W: std::io::Write>(results: &[CellResult], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER)?;
    for cell in results {
        let s = cell.summary();
        let mut row: Vec<String> = cell_prefix(&cell.cfg).into();
        row.push(cell.runs.len().to_string());
        row.push(s.ok_runs.to_string());
        row.extend(stats_cols(&s.inconsistency));
        row.extend(stats_cols(&s.load));
        row.push(opt(s.infra_load.map(|x| num(x.mean))));
        row.push(opt(s.infra_load.map(|x| num(x.ci95_halfwidth))));
        row.push(opt(s.infra_peak));
        row.push(s.errors.join("; "));
        wr.write_record(&row)?;
    }
    wr.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_outputs(results: &[CellResult], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let detail = dir.join(DETAIL_FILE);
    let summary = dir.join(SUMMARY_FILE);
    write_detail(results, std::io::BufWriter::new(create(&detail)?))?;
    write_summary(results, std::io::BufWriter::new(create(&summary)?))?;
    Ok((detail, summary))
}

/// Validates, runs and (when `spec.out` is set) writes the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let pool = thread_pool(spec.workers)?;
    let mut results = run_cells(&spec.cells(), &pool);
    sort_results(&mut results);
    if let Some(dir) = &spec.out {
        write_outputs(&results, dir)?;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepSpec {
        SweepSpec {
            ns: vec![50],
            rates: vec![10.0],
            protocols: vec![hbsim_core::protocols::ProtocolKind::SimpleP2P],
            runs: 3,
            horizon: 30,
            ..Default::default()
        }
    }

    #[test]
    fn seeds_depend_on_cell_and_index_only() {
        let mut s = tiny();
        let a: Vec<u64> = (0..3).map(|r| run_seed(&s.cells()[0], r)).collect();
        s.runs = 11;
        let b: Vec<u64> = (0..3).map(|r| run_seed(&s.cells()[0], r)).collect();
        assert_eq!(a, b);
        s.rates = vec![1.0];
        assert_ne!(run_seed(&s.cells()[0], 0), a[0]);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn failed_runs_land_in_error_column() {
        let mut s = tiny();
        // odd k is rejected by the small-world generator at run time
        s.topologies = vec![hbsim_core::topology::TopologyKind::SmallWorld];
        s.k = Some(5);
        let res = run_sweep(&s).unwrap();
        let sum = res[0].summary();
        assert_eq!(sum.ok_runs, 0);
        assert_eq!(sum.errors.len(), 3);
        let mut buf = Vec::new();
        write_summary(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("even"), "{text}");
    }
}
