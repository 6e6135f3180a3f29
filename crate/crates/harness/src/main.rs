use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hbsim_core::topology::{degree_stats_sampled, write_edge_list, GenParams, TopologyKind};
use hbsim_harness::acceptance::{Acceptance, AcceptanceOptions, ENV_LARGE};
use hbsim_harness::config::{self, SweepSpec};
use hbsim_harness::plot::{self, Dim, Metric, PlotSpec, Scale};
use hbsim_harness::sweep;
use hbsim_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(
    name = "hbsim",
    version,
    about = "Heartbeat propagation simulator for large data centres"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration for `runs` seeds and print its summary.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Also write per-second series for every run.
        #[arg(long)]
        series: bool,
    },
    /// Run the cross product of the configured axes.
    Sweep {
        /// key=value spec file; flags override it.
        spec: Option<PathBuf>,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Reshape a summary CSV into plot-ready tables.
    PlotData {
        /// summary.csv written by `sweep`.
        summary: PathBuf,
        /// by-rate or by-n.
        #[arg(long, default_value = "by-rate")]
        grouping: String,
        /// protocol, topology, n or rate; defaults to n for by-rate, rate for by-n.
        #[arg(long)]
        series: Option<String>,
        /// inconsistency, load or infra-load.
        #[arg(long, default_value = "inconsistency")]
        metric: String,
        /// linear or log.
        #[arg(long, default_value = "linear")]
        scale: String,
        #[arg(long, default_value = "plot-data")]
        out: PathBuf,
    },
    /// Generate a subscription graph and write it as an edge list.
    Graph {
        #[arg(long, default_value = "random")]
        topology: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Defaults to round(sqrt(n)).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        p_rewire: Option<f64>,
        #[arg(long)]
        p_invert: Option<f64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print clustering, degree and path statistics to stderr.
        #[arg(long)]
        metrics: bool,
    },
    /// Run the acceptance suite, one line per criterion.
    Acceptance {
        /// Include the n = 10^4 runs.
        #[arg(long)]
        large: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    protocol: Option<String>,
    /// Failure rate in percent of nodes per minute.
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
    #[arg(long)]
    t_poll: Option<String>,
    #[arg(long)]
    t_fresh: Option<String>,
    #[arg(long)]
    max_age: Option<String>,
    #[arg(long)]
    branching: Option<String>,
    #[arg(long)]
    monitors: Option<String>,
    #[arg(long)]
    group_layout: Option<String>,
    #[arg(long)]
    forward_stamp: Option<String>,
    #[arg(long)]
    p_rewire: Option<String>,
    #[arg(long)]
    p_invert: Option<String>,
    #[arg(long)]
    gamma_shape: Option<String>,
    #[arg(long)]
    recovery: Option<String>,
    #[arg(long)]
    downtime: Option<String>,
    /// Allow n >= 10^4.
    #[arg(long)]
    large: bool,
}

impl ExperimentArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let opts = [
            ("n", &self.n),
            ("k", &self.k),
            ("topology", &self.topology),
            ("protocol", &self.protocol),
            ("rate", &self.rate),
            ("runs", &self.runs),
            ("horizon", &self.horizon),
            ("seed", &self.seed),
            ("out", &self.out),
            ("workers", &self.workers),
            ("warmup", &self.warmup),
            ("t_poll", &self.t_poll),
            ("t_fresh", &self.t_fresh),
            ("max_age", &self.max_age),
            ("branching", &self.branching),
            ("monitors", &self.monitors),
            ("group_layout", &self.group_layout),
            ("forward_stamp", &self.forward_stamp),
            ("p_rewire", &self.p_rewire),
            ("p_invert", &self.p_invert),
            ("gamma_shape", &self.gamma_shape),
            ("recovery", &self.recovery),
            ("downtime", &self.downtime),
        ];
        let mut out: Vec<(&'static str, String)> = opts
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v.clone())))
            .collect();
        if self.large {
            out.push(("large", "true".into()));
        }
        out
    }

    fn spec(&self, mut base: SweepSpec, file: Option<&PathBuf>) -> Result<SweepSpec> {
        for path in file.into_iter().chain(self.config.as_ref()) {
            let pairs = config::load_file(path)?;
            base.apply_all(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        }
        for (k, v) in self.pairs() {
            base.apply(k, &v)?;
        }
        base.validate()?;
        Ok(base)
    }
}

fn cmd_run(exp: &ExperimentArgs, series: bool) -> Result<()> {
    let spec = exp.spec(SweepSpec::single_default(), None)?;
    let cell = spec.single()?;
    let pool = sweep::thread_pool(spec.workers)?;
    let results = sweep::run_cells(std::slice::from_ref(&cell), &pool);
    let res = &results[0];
    println!("{}", cell.fingerprint());
    for r in &res.runs {
        match &r.outcome {
            Ok(s) => println!(
                "run {:>2} seed {:>20}  inconsistency {:.6}  load {:.3}{}",
                r.run,
                r.seed,
                s.inconsistency,
                s.load,
                s.infra_load.map(|x| format!("  infra load {x:.1}")).unwrap_or_default()
            ),
            Err(e) => println!("run {:>2} error: {e}", r.run),
        }
    }
    let sum = res.summary();
    if let Some(s) = sum.inconsistency {
        println!(
            "inconsistency mean {:.6} sd {:.6} ci95 ±{:.6} [{:.6}, {:.6}]",
            s.mean, s.sd, s.ci95_halfwidth, s.min, s.max
        );
    }
    if let Some(s) = sum.load {
        println!(
            "load          mean {:.4} sd {:.4} ci95 ±{:.4}",
            s.mean, s.sd, s.ci95_halfwidth
        );
    }
    if let Some(dir) = &spec.out {
        let (d, s) = sweep::write_outputs(&results, dir)?;
        println!("wrote {} and {}", d.display(), s.display());
        if series {
            let path = dir.join("series.csv");
            write_series(&cell, &path)?;
            println!("wrote {}", path.display());
        }
    }
    if !sum.errors.is_empty() {
        return Err(HarnessError::Runtime(sum.errors.join("; ")));
    }
    Ok(())
}

fn write_series(cell: &config::ExperimentConfig, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| HarnessError::Io {
        path: path.into(),
        source: e,
    })?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(f));
    w.write_record(["run", "second", "inconsistent", "load", "infra_load"])?;
    for run in 0..cell.runs {
        let m = sweep::simulate(cell, sweep::run_seed(cell, run))?;
        for (i, (&c, &l)) in m.inconsistency_series.iter().zip(&m.load_series).enumerate() {
            let infra = m.monitor_load_series.get(i).map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                run.to_string(),
                (i + 1).to_string(),
                c.to_string(),
                format!("{l}"),
                infra,
            ])?;
        }
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: path.into(),
        source: e,
    })?;
    Ok(())
}

fn cmd_sweep(spec_file: Option<&PathBuf>, exp: &ExperimentArgs) -> Result<()> {
    let mut spec = exp.spec(SweepSpec::default(), spec_file)?;
    if spec.out.is_none() {
        spec.out = Some(PathBuf::from("results"));
    }
    eprintln!("sweep: {} cells x {} runs", spec.cell_count(), spec.runs);
    let results = sweep::run_sweep(&spec)?;
    let errors: usize = results.iter().map(|r| r.summary().errors.len()).sum();
    let dir = spec.out.as_ref().unwrap();
    println!(
        "wrote {} and {}",
        dir.join(sweep::DETAIL_FILE).display(),
        dir.join(sweep::SUMMARY_FILE).display()
    );
    if errors > 0 {
        eprintln!("{errors} runs failed; see the error column");
    }
    Ok(())
}

fn cmd_graph(
    topology: &str,
    n: usize,
    k: Option<usize>,
    seed: u64,
    p_rewire: Option<f64>,
    p_invert: Option<f64>,
    out: Option<&PathBuf>,
    metrics: bool,
) -> Result<()> {
    let kind: TopologyKind = topology.parse()?;
    let mut params = GenParams::new(k.unwrap_or_else(|| config::default_k(n)));
    if let Some(p) = p_rewire {
        params.p_rewire = p;
    }
    if let Some(p) = p_invert {
        params.p_invert = p;
    }
    let g = hbsim_core::topology::generate(kind, n, &params, seed)?;
    match out {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(|e| HarnessError::Io {
                path: path.clone(),
                source: e,
            })?;
            write_edge_list(&g, std::io::BufWriter::new(f)).map_err(|e| HarnessError::Io {
                path: path.clone(),
                source: e,
            })?;
        }
        None => write_edge_list(&g, std::io::stdout().lock()).map_err(|e| HarnessError::Io {
            path: "<stdout>".into(),
            source: e,
        })?,
    }
    if metrics {
        let m = degree_stats_sampled(&g, n.min(500));
        eprintln!("clustering {:.4}", hbsim_core::topology::clustering_coefficient(&g));
        eprintln!(
            "mean out-degree {:.3}, mean in-degree {:.3}, max in-degree {}",
            m.mean_out_degree, m.mean_in_degree, m.max_in_degree
        );
        match m.paths.mean_path_length() {
            Some(l) => eprintln!("mean path length {l:.3} (from {} sources)", m.paths.sources),
            None => eprintln!("mean path length: no reachable pairs"),
        }
        eprintln!("unreachable pairs {}", m.paths.unreachable_pairs);
    }
    Ok(())
}

fn cmd_plot(
    summary: &PathBuf,
    grouping: &str,
    series: Option<&str>,
    metric: &str,
    scale: &str,
    out: &PathBuf,
) -> Result<()> {
    let x: Dim = grouping.parse()?;
    let mut spec = PlotSpec::new(x);
    if let Some(s) = series {
        spec.series = s.parse()?;
    }
    spec.metric = metric.parse::<Metric>()?;
    spec.scale = scale.parse::<Scale>()?;
    for p in plot::emit_plot_data(summary, &spec, out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_acceptance(large: bool, workers: Option<usize>, only: Vec<u8>, seed: u64) -> Result<bool> {
    let large = large || AcceptanceOptions::from_env().large;
    if !large {
        eprintln!("note: n = 10^4 runs skipped; pass --large or set {ENV_LARGE}=1");
    }
    let mut suite = Acceptance::new(AcceptanceOptions {
        large,
        workers,
        only,
        root_seed: seed,
    })?;
    let results = suite.run(|r| println!("{r}"));
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.cmd {
        Command::Run { exp, series } => cmd_run(exp, *series).map(|_| true),
        Command::Sweep { spec, exp } => cmd_sweep(spec.as_ref(), exp).map(|_| true),
        Command::PlotData {
            summary,
            grouping,
            series,
            metric,
            scale,
            out,
        } => cmd_plot(summary, grouping, series.as_deref(), metric, scale, out).map(|_| true),
        Command::Graph {
            topology,
            n,
            k,
            seed,
            p_rewire,
            p_invert,
            out,
            metrics,
        } => cmd_graph(topology, *n, *k, *seed, *p_rewire, *p_invert, out.as_ref(), *metrics).map(|_| true),
        Command::Acceptance {
            large,
            workers,
            only,
            seed,
        } => cmd_acceptance(*large, *workers, only.clone(), *seed),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
