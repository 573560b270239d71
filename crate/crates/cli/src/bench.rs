use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{parse_delimiter, Columns, InputArgs, InputFormat, Method, PcaArgs, RatingRange, RecommendArgs};
use crate::error::{CliError, CliResult};
use crate::pca::run_pca;
use crate::recommend::run_recommend;
use crate::report::{ensure_dir, write_csv, RunReport};

pub const AGGREGATE_FILE: &str = "bench.csv";
pub const SUMMARY_FILE: &str = "bench_summary.toml";

/// Sweep description. Cells are `inputs × seeds × modes`, where the modes of
/// a `pca` sweep are the listed tolerances followed by the listed ranks and a
/// `recommend` sweep has a single mode.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Output directory, relative to the config file.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub command: BenchCommand,
    #[serde(rename = "input")]
    pub inputs: Vec<BenchInput>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub tol: Vec<f64>,
    #[serde(default)]
    pub rank: Vec<usize>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_block")]
    pub block: usize,
    #[serde(default = "default_passes")]
    pub passes: usize,
    #[serde(default)]
    pub power: Option<usize>,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_split")]
    pub split: String,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_min_improvement")]
    pub min_improvement: f64,
    #[serde(default)]
    pub prune: Option<usize>,
    #[serde(default)]
    pub trace_test: bool,
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchCommand {
    Pca,
    Recommend,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchInput {
    #[serde(default)]
    pub name: Option<String>,
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<InputFormat>,
    #[serde(default)]
    pub delimiter: Option<String>,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub columns: Option<[usize; 3]>,
    #[serde(default)]
    pub rating_range: Option<[f64; 2]>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_method() -> Method {
    Method::Adaptive
}
fn default_block() -> usize {
    adaptive_cf::rsvd::DEFAULT_BLOCK
}
fn default_passes() -> usize {
    adaptive_cf::rsvd::DEFAULT_PASSES
}
fn default_oversample() -> usize {
    10
}
fn default_split() -> String {
    "0.9,0.05,0.05".into()
}
fn default_patience() -> usize {
    adaptive_cf::cf::DEFAULT_PATIENCE
}
fn default_min_improvement() -> f64 {
    adaptive_cf::cf::DEFAULT_MIN_IMPROVEMENT
}

impl BenchConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut config: BenchConfig =
            toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for input in &mut config.inputs {
            if input.path.is_relative() {
                input.path = base.join(&input.path);
            }
        }
        if let Some(out) = config.out.as_mut().filter(|o| o.is_relative()) {
            *out = base.join(&*out);
        }
        if config.inputs.is_empty() || config.seeds.is_empty() {
            return Err(CliError::Input("bench config needs at least one input and one seed".into()));
        }
        if config.command == BenchCommand::Pca && config.tol.is_empty() && config.rank.is_empty() {
            return Err(CliError::Input("pca sweep needs a `tol` or `rank` list".into()));
        }
        Ok(config)
    }
}

impl BenchInput {
    fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.path.display().to_string())
    }

    fn to_args(&self) -> CliResult<InputArgs> {
        let mut args = InputArgs::new(&self.path);
        args.format = self.format;
        args.header = self.header;
        if let Some(d) = &self.delimiter {
            args.delimiter = parse_delimiter(d).map_err(CliError::Input)?;
        }
        if let Some([user, item, rating]) = self.columns {
            args.columns = Columns { user, item, rating };
        }
        args.rating_range = self.rating_range.map(|[lo, hi]| RatingRange(lo, hi));
        Ok(args)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Tol(f64),
    Rank(usize),
    Auto,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Tol(_) => "tol",
            Mode::Rank(_) => "rank",
            Mode::Auto => "auto",
        }
    }

    fn param(self) -> String {
        match self {
            Mode::Tol(e) => e.to_string(),
            Mode::Rank(k) => k.to_string(),
            Mode::Auto => String::new(),
        }
    }
}

/// One point of the sweep grid.
#[derive(Clone, Debug)]
pub struct Cell {
    pub id: String,
    pub input: usize,
    pub seed: u64,
    pub mode: Mode,
}

/// Outcome of one cell, recorded in the sweep summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub id: String,
    pub input: String,
    pub seed: u64,
    pub mode: String,
    pub param: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub completed: usize,
    pub failed: usize,
    #[serde(rename = "cell")]
    pub cells: Vec<CellSummary>,
}

pub fn cells(config: &BenchConfig) -> Vec<Cell> {
    let modes: Vec<Mode> = match config.command {
        BenchCommand::Pca => config
            .tol
            .iter()
            .map(|&e| Mode::Tol(e))
            .chain(config.rank.iter().map(|&k| Mode::Rank(k)))
            .collect(),
        BenchCommand::Recommend => vec![Mode::Auto],
    };
    let mut out = Vec::new();
    for input in 0..config.inputs.len() {
        for &seed in &config.seeds {
            for &mode in &modes {
                out.push(Cell {
                    id: format!("cell-{:03}", out.len()),
                    input,
                    seed,
                    mode,
                });
            }
        }
    }
    out
}

fn run_cell(config: &BenchConfig, cell: &Cell, out: &Path) -> CliResult<RunReport> {
    let input = config.inputs[cell.input].to_args()?;
    let dir = out.join(&cell.id);
    match config.command {
        BenchCommand::Pca => {
            let args = PcaArgs {
                input,
                rank: match cell.mode {
                    Mode::Rank(k) => Some(k),
                    _ => None,
                },
                tol: match cell.mode {
                    Mode::Tol(e) => Some(e),
                    _ => None,
                },
                method: config.method,
                block: config.block,
                passes: config.passes,
                power: config.power,
                oversample: config.oversample,
                seed: cell.seed,
                out: dir,
            };
            run_pca(&args, &args.command_line())
        }
        BenchCommand::Recommend => {
            let args = RecommendArgs {
                input,
                split: config.split.clone(),
                block: config.block,
                passes: config.passes,
                patience: config.patience,
                min_improvement: config.min_improvement,
                prune: config.prune,
                trace_test: config.trace_test,
                seed: cell.seed,
                out: dir,
            };
            run_recommend(&args, &args.command_line())
        }
    }
}

/// Runs every cell, recording failures without stopping the sweep. Writes
/// per-cell reports, `bench.csv` (one row per completed cell) and
/// `bench_summary.toml` (status of every cell).
pub fn run_bench(config: &BenchConfig, out: &Path, parallel: bool) -> CliResult<BenchSummary> {
    ensure_dir(out)?;
    let grid = cells(config);
    let run = |cell: &Cell| (cell.clone(), run_cell(config, cell, out));
    let results: Vec<(Cell, CliResult<RunReport>)> = if parallel || config.parallel {
        grid.par_iter().map(run).collect()
    } else {
        grid.iter().map(run).collect()
    };

    let mut summary = BenchSummary::default();
    let mut rows = Vec::new();
    for (cell, result) in &results {
        let label = config.inputs[cell.input].label();
        let (status, error) = match result {
            Ok(report) => {
                summary.completed += 1;
                rows.push(aggregate_row(cell, &label, report));
                ("ok", None)
            }
            Err(e) => {
                summary.failed += 1;
                ("failed", Some(e.to_string()))
            }
        };
        summary.cells.push(CellSummary {
            id: cell.id.clone(),
            input: label,
            seed: cell.seed,
            mode: cell.mode.name().into(),
            param: cell.mode.param(),
            status: status.into(),
            error,
        });
    }
    write_csv(
        &out.join(AGGREGATE_FILE),
        "cell,input,seed,mode,param,k,passes,relative_residual,validation_mae,test_mae,ingest_s,factorize_s,evaluate_s,total_s",
        rows,
    )?;
    let path = out.join(SUMMARY_FILE);
    let text = toml::to_string(&summary).expect("summary is TOML-representable");
    fs::write(&path, text).map_err(|e| CliError::output(&path, e))?;
    Ok(summary)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn aggregate_row(cell: &Cell, label: &str, r: &RunReport) -> String {
    [
        cell.id.clone(),
        csv_field(label),
        cell.seed.to_string(),
        cell.mode.name().into(),
        cell.mode.param(),
        r.k.to_string(),
        r.passes.to_string(),
        opt(r.relative_residual),
        opt(r.validation_mae),
        opt(r.test_mae),
        format!("{:.3}", r.timings.ingest),
        format!("{:.3}", r.timings.factorize),
        format!("{:.3}", r.timings.evaluate),
        format!("{:.3}", r.timings.total()),
    ]
    .join(",")
}
