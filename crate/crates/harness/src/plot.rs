//! Reshapes a summary CSV into plot-ready tables.
//!
//! One output file per combination of the dimensions that are neither the
//! x axis nor the series. Each file lists `series, x, mean, ci95, low, high`
//! rows sorted by series then x; the log variant adds `log10_*` columns and
//! a `zero` flag instead of emitting -inf for non-positive values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    Protocol,
    Topology,
    N,
    Rate,
}

impl Dim {
    pub const ALL: [Dim; 4] = [Dim::Protocol, Dim::Topology, Dim::N, Dim::Rate];

    pub fn column(self) -> &'static str {
        match self {
            Dim::Protocol => "protocol",
            Dim::Topology => "topology",
            Dim::N => "n",
            Dim::Rate => "rate",
        }
    }

    fn numeric(self) -> bool {
        matches!(self, Dim::N | Dim::Rate)
    }
}

impl FromStr for Dim {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "protocol" => Ok(Dim::Protocol),
            "topology" => Ok(Dim::Topology),
            "n" | "by-n" => Ok(Dim::N),
            "rate" | "by-rate" => Ok(Dim::Rate),
            other => Err(HarnessError::Config(format!("unknown dimension `{other}`"))),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Inconsistency,
    Load,
    InfraLoad,
}

impl Metric {
    fn columns(self) -> (&'static str, &'static str) {
        match self {
            Metric::Inconsistency => ("inconsistency_mean", "inconsistency_ci95"),
            Metric::Load => ("load_mean", "load_ci95"),
            Metric::InfraLoad => ("infra_load_mean", "infra_load_ci95"),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Metric::Inconsistency => "inconsistency",
            Metric::Load => "load",
            Metric::InfraLoad => "infra-load",
        }
    }
}

impl FromStr for Metric {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inconsistency" | "inconsistencies" => Ok(Metric::Inconsistency),
            "load" => Ok(Metric::Load),
            "infra-load" | "infra_load" | "monitor-load" => Ok(Metric::InfraLoad),
            other => Err(HarnessError::Config(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Scale::Linear),
            "log" | "log10" => Ok(Scale::Log),
            other => Err(HarnessError::Config(format!("unknown scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotSpec {
    /// The x axis: `Dim::Rate` groups by failure rate, `Dim::N` by size.
    pub x: Dim,
    pub series: Dim,
    pub metric: Metric,
    pub scale: Scale,
}

impl PlotSpec {
    /// Series per size when grouping by rate, per rate when grouping by n.
    pub fn new(x: Dim) -> Self {
        let series = if x == Dim::N { Dim::Rate } else { Dim::N };
        PlotSpec {
            x,
            series,
            metric: Metric::Inconsistency,
            scale: Scale::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub series: String,
    pub x: String,
    pub mean: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    /// Values of the fixed dimensions, in `Dim` order.
    pub fixed: Vec<(Dim, String)>,
    pub rows: Vec<PlotRow>,
}

impl PlotTable {
    pub fn file_name(&self, spec: &PlotSpec) -> String {
        let mut name = format!("{}_by-{}_series-{}", spec.metric.name(), spec.x, spec.series);
        for (d, v) in &self.fixed {
            name.push_str(&format!("_{d}={v}"));
        }
        if spec.scale == Scale::Log {
            name.push_str("_log");
        }
        name.push_str(".csv");
        name
    }
}

// numeric axes sort by value, names alphabetically
#[derive(Debug, Clone, PartialEq, PartialOrd)]
enum Key {
    Num(f64),
    Name(String),
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Key::Num(a), Key::Num(b)) => a.total_cmp(b),
            (Key::Name(a), Key::Name(b)) => a.cmp(b),
            (Key::Num(_), Key::Name(_)) => std::cmp::Ordering::Less,
            (Key::Name(_), Key::Num(_)) => std::cmp::Ordering::Greater,
        }
    }
}

fn key(dim: Dim, v: &str) -> Result<Key> {
    if dim.numeric() {
        v.parse::<f64>()
            .map(Key::Num)
            .map_err(|_| HarnessError::Runtime(format!("column `{dim}` holds non-numeric value `{v}`")))
    } else {
        Ok(Key::Name(v.to_string()))
    }
}

/// Groups summary rows into tables.
pub fn reshape<R: std::io::Read>(summary: R, spec: &PlotSpec) -> Result<Vec<PlotTable>> {
    if spec.x == spec.series {
        return Err(HarnessError::Config("x axis and series must differ".into()));
    }
    let mut rd = csv::Reader::from_reader(summary);
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Runtime(format!("summary is missing column `{name}`")))
    };
    let dims: Vec<(Dim, usize)> = Dim::ALL
        .iter()
        .map(|&d| col(d.column()).map(|i| (d, i)))
        .collect::<Result<_>>()?;
    let (mean_name, ci_name) = spec.metric.columns();
    let mean_col = col(mean_name)?;
    let ci_col = col(ci_name)?;
    let fixed_dims: Vec<Dim> = Dim::ALL
        .iter()
        .copied()
        .filter(|&d| d != spec.x && d != spec.series)
        .collect();

    type Group = BTreeMap<(Key, Key), PlotRow>;
    let mut groups: BTreeMap<Vec<Key>, (Vec<(Dim, String)>, Group)> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec?;
        let get = |d: Dim| {
            rec.get(dims.iter().find(|(x, _)| *x == d).unwrap().1)
                .unwrap_or("")
                .to_string()
        };
        let mean_s = rec.get(mean_col).unwrap_or("");
        if mean_s.is_empty() {
            // cell without enough successful runs
            continue;
        }
        let mean: f64 = mean_s
            .parse()
            .map_err(|_| HarnessError::Runtime(format!("bad {mean_name} `{mean_s}`")))?;
        let ci: f64 = rec.get(ci_col).unwrap_or("").parse().unwrap_or(0.0);

        let fixed: Vec<(Dim, String)> = fixed_dims.iter().map(|&d| (d, get(d))).collect();
        let gkey: Vec<Key> = fixed.iter().map(|(d, v)| key(*d, v)).collect::<Result<_>>()?;
        let (s, x) = (get(spec.series), get(spec.x));
        let rkey = (key(spec.series, &s)?, key(spec.x, &x)?);
        let entry = groups.entry(gkey).or_insert_with(|| (fixed, BTreeMap::new()));
        if entry
            .1
            .insert(
                rkey,
                PlotRow {
                    series: s.clone(),
                    x: x.clone(),
                    mean,
                    ci95: ci,
                },
            )
            .is_some()
        {
            return Err(HarnessError::Runtime(format!(
                "duplicate summary rows for series {s}, x {x}; add the differing column as a dimension"
            )));
        }
    }
    Ok(groups
        .into_values()
        .map(|(fixed, rows)| PlotTable {
            fixed,
            rows: rows.into_values().collect(),
        })
        .collect())
}

fn log10_or_blank(v: f64) -> String {
    if v > 0.0 {
        format!("{}", v.log10())
    } else {
        String::new()
    }
}

pub fn write_table<W: std::io::Write>(table: &PlotTable, spec: &PlotSpec, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec![spec.series.column(), spec.x.column(), "mean", "ci95", "low", "high"];
    if spec.scale == Scale::Log {
        header.extend(["log10_mean", "log10_low", "log10_high", "zero"]);
    }
    wr.write_record(&header)?;
    for r in &table.rows {
        let (low, high) = (r.mean - r.ci95, r.mean + r.ci95);
        let mut row = vec![
            r.series.clone(),
            r.x.clone(),
            format!("{}", r.mean),
            format!("{}", r.ci95),
        ];
        row.extend([format!("{low}"), format!("{high}")]);
        if spec.scale == Scale::Log {
            row.extend([log10_or_blank(r.mean), log10_or_blank(low), log10_or_blank(high)]);
            row.push(if r.mean > 0.0 { "0" } else { "1" }.to_string());
        }
        wr.write_record(&row)?;
    }
    wr.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

/// Reads `summary`, writes one file per table into `out_dir` and returns
/// their paths.
pub fn emit_plot_data(summary: &Path, spec: &PlotSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let f = std::fs::File::open(summary).map_err(|e| HarnessError::io(summary, e))?;
    let tables = reshape(std::io::BufReader::new(f), spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut paths = Vec::with_capacity(tables.len());
    for t in &tables {
        let p = out_dir.join(t.file_name(spec));
        let f = std::fs::File::create(&p).map_err(|e| HarnessError::io(&p, e))?;
        write_table(t, spec, std::io::BufWriter::new(f))?;
        paths.push(p);
    }
    Ok(paths)
}
