use std::path::PathBuf;

use adaptive_cf::rsvd::{DEFAULT_BLOCK, DEFAULT_PASSES};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "adaptive-cf", version, about = "Adaptive randomized PCA and collaborative filtering on sparse ratings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Truncated SVD of a sparse matrix at a fixed rank or tolerance.
    Pca(PcaArgs),
    /// Split ratings, pick the latent dimension on validation data and report test MAE.
    Recommend(RecommendArgs),
    /// Run a grid of pca/recommend cells described by a TOML file.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[value(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    #[value(alias = "mtx")]
    #[serde(alias = "mtx")]
    Matrixmarket,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct InputArgs {
    /// Ratings CSV or Matrix Market file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension (.mtx) when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// CSV field delimiter: a single character, or "tab".
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// The CSV starts with a header line.
    #[arg(long)]
    pub header: bool,
    /// Zero-based CSV columns holding user,item,rating.
    #[arg(long, default_value = "0,1,2", value_parser = parse_columns)]
    pub columns: Columns,
    /// Declared rating bounds "lo,hi"; defaults to the observed range.
    #[arg(long, value_parser = parse_range)]
    pub rating_range: Option<RatingRange>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Columns {
    pub user: usize,
    pub item: usize,
    pub rating: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatingRange(pub f64, pub f64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Fast adaptive PCA with a pass budget per block.
    Adaptive,
    /// Fixed-precision QB with power iteration (tolerance mode only).
    Qb,
    /// Basic randomized SVD (fixed-rank mode only).
    Basic,
}

#[derive(Args, Clone, Debug, PartialEq)]
#[command(group(ArgGroup::new("mode").required(true).args(["rank", "tol"])))]
pub struct PcaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target rank.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Relative Frobenius tolerance in (0, 1).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value = "adaptive")]
    pub method: Method,
    /// Block size.
    #[arg(long, default_value_t = DEFAULT_BLOCK)]
    pub block: usize,
    /// Passes over the matrix per block (adaptive method).
    #[arg(long, default_value_t = DEFAULT_PASSES)]
    pub passes: usize,
    /// Power iterations; overrides --passes with 2P+2 for the adaptive method.
    #[arg(long)]
    pub power: Option<usize>,
    /// Oversampling for the basic method.
    #[arg(long, default_value_t = 10)]
    pub oversample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl PcaArgs {
    /// Power count used by the qb and basic methods.
    pub fn power_rounds(&self) -> usize {
        self.power.unwrap_or(self.passes.saturating_sub(2) / 2)
    }

    /// Pass count used by the adaptive method.
    pub fn pass_count(&self) -> usize {
        self.power.map_or(self.passes, |p| 2 * p + 2)
    }
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Train/validation/test fractions.
    #[arg(long, default_value = "0.9,0.05,0.05")]
    pub split: String,
    #[arg(long, default_value_t = DEFAULT_BLOCK)]
    pub block: usize,
    #[arg(long, default_value_t = DEFAULT_PASSES)]
    pub passes: usize,
    /// Blocks without validation improvement before stopping.
    #[arg(long, default_value_t = adaptive_cf::cf::DEFAULT_PATIENCE)]
    pub patience: usize,
    /// Smallest MAE decrease that counts as an improvement.
    #[arg(long, default_value_t = adaptive_cf::cf::DEFAULT_MIN_IMPROVEMENT)]
    pub min_improvement: f64,
    /// Drop users and items with fewer ratings than this before splitting.
    #[arg(long)]
    pub prune: Option<usize>,
    /// Also record the test MAE at every block in the trace.
    #[arg(long)]
    pub trace_test: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct BenchArgs {
    /// Sweep description (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run cells in parallel.
    #[arg(long)]
    pub parallel: bool,
}

pub fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character or \"tab\", got {s:?}")),
    }
}

pub fn parse_columns(s: &str) -> Result<Columns, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad column list {s:?}: {e}"))?;
    match parts[..] {
        [user, item, rating] => Ok(Columns { user, item, rating }),
        _ => Err(format!("need three columns user,item,rating, got {s:?}")),
    }
}

pub fn parse_range(s: &str) -> Result<RatingRange, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad rating range {s:?}: {e}"))?;
    match parts[..] {
        [lo, hi] if lo <= hi && lo.is_finite() && hi.is_finite() => Ok(RatingRange(lo, hi)),
        _ => Err(format!("rating range must be \"lo,hi\" with lo <= hi, got {s:?}")),
    }
}

impl InputArgs {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        InputArgs {
            input: input.into(),
            format: None,
            delimiter: b',',
            header: false,
            columns: Columns {
                user: 0,
                item: 1,
                rating: 2,
            },
            rating_range: None,
        }
    }

    /// Command-line flags reproducing these settings.
    pub fn to_flags(&self) -> Vec<String> {
        let mut f = vec!["--input".into(), self.input.display().to_string()];
        if let Some(format) = self.format {
            f.push("--format".into());
            f.push(format.to_possible_value().expect("no skipped variants").get_name().into());
        }
        if self.delimiter != b',' {
            f.push("--delimiter".into());
            f.push(if self.delimiter == b'\t' { "tab".into() } else { (self.delimiter as char).to_string() });
        }
        if self.header {
            f.push("--header".into());
        }
        let c = self.columns;
        if (c.user, c.item, c.rating) != (0, 1, 2) {
            f.push("--columns".into());
            f.push(format!("{},{},{}", c.user, c.item, c.rating));
        }
        if let Some(RatingRange(lo, hi)) = self.rating_range {
            f.push("--rating-range".into());
            f.push(format!("{lo},{hi}"));
        }
        f
    }
}
