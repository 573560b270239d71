use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use adaptive_cf::SparseRatings;
use serde::{Deserialize, Serialize};

use crate::args::InputArgs;
use crate::error::{CliError, CliResult};
use crate::input::resolve_format;

/// Structured record of one command run, written as `report.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The command line that produced this report.
    pub command: String,
    pub seed: u64,
    /// Chosen rank / latent dimension.
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Sparse passes over the (training) matrix.
    pub passes: usize,
    /// Explicit `‖A − USVᵀ‖_F / ‖A‖_F`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_mae: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_mae: Option<f64>,
    /// Share of test predictions that used the mean-rating fallback.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_fallback_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular_values: Vec<f64>,
    pub dataset: DatasetStats,
    pub timings: Timings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub path: String,
    pub format: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub rating_min: f64,
    pub rating_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicates: Option<usize>,
}

impl DatasetStats {
    pub fn of_matrix(input: &InputArgs, a: &SparseRatings) -> Self {
        let (lo, hi) = a.rating_range();
        DatasetStats {
            path: input.input.display().to_string(),
            format: format!("{:?}", resolve_format(input)).to_lowercase(),
            rows: a.rows(),
            cols: a.cols(),
            nnz: a.nnz(),
            rating_min: lo,
            rating_max: hi,
            duplicates: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub fractions: [f64; 3],
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Wall-clock seconds per phase, at millisecond resolution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub ingest: f64,
    pub factorize: f64,
    pub evaluate: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.ingest + self.factorize + self.evaluate
    }
}

/// Seconds elapsed since `start`, rounded to milliseconds.
pub fn seconds_since(start: Instant) -> f64 {
    round_ms(start.elapsed().as_secs_f64())
}

pub fn round_ms(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub k: usize,
    pub validation_mae: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_mae: Option<f64>,
    /// Cumulative seconds since factorization started.
    pub seconds: f64,
}

impl RunReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report fields are TOML-representable")
    }

    pub fn from_toml(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, self.to_toml()).map_err(|e| CliError::output(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

/// Writes `header` and `rows` as a CSV file.
pub fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> CliResult<()> {
    let write = || -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{row}")?;
        }
        w.flush()
    };
    write().map_err(|e| CliError::output(path, e))
}

pub fn write_singular_values(path: &Path, s: &[f64]) -> CliResult<()> {
    write_csv(path, "index,value", s.iter().enumerate().map(|(i, v)| format!("{},{v:?}", i + 1)))
}

pub fn write_trace(path: &Path, trace: &[TracePoint]) -> CliResult<()> {
    let with_test = trace.iter().any(|p| p.test_mae.is_some());
    let header = if with_test {
        "k,validation_mae,seconds,test_mae"
    } else {
        "k,validation_mae,seconds"
    };
    write_csv(
        path,
        header,
        trace.iter().map(|p| {
            let mut row = format!("{},{:?},{:?}", p.k, p.validation_mae, p.seconds);
            if let Some(t) = p.test_mae.filter(|_| with_test) {
                row.push_str(&format!(",{t:?}"));
            }
            row
        }),
    )
}
