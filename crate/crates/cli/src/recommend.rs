use std::time::Instant;

use adaptive_cf::cf::{auto_latent_factors, auto_latent_factors_monitored, AutoLatentConfig, Predictor};
use adaptive_cf::data::{prune_min_degree, split, write_split_manifest, SplitSpec};

use crate::args::RecommendArgs;
use crate::error::{CliError, CliResult};
use crate::input::{load_dataset, resolve_format};
use crate::report::{
    ensure_dir, round_ms, seconds_since, write_trace, DatasetStats, RunReport, SplitStats, Timings,
    TracePoint,
};

pub const TRACE_FILE: &str = "mae_trace.csv";
pub const MANIFEST_FILE: &str = "split_manifest.txt";

/// Splits the ratings, selects the latent dimension on the validation part
/// and evaluates on the test part. Writes `report.toml`, `mae_trace.csv` and
/// `split_manifest.txt` into `args.out`.
pub fn run_recommend(args: &RecommendArgs, command: &str) -> CliResult<RunReport> {
    let spec = SplitSpec::parse(&args.split, args.seed)?;
    if !(args.min_improvement >= 0.0) {
        return Err(CliError::Input("--min-improvement must be >= 0".into()));
    }
    let mut timings = Timings::default();
    let started = Instant::now();
    let mut ds = load_dataset(&args.input)?;
    let duplicates = ds.duplicates();
    if let Some(min) = args.prune {
        ds = prune_min_degree(&ds, min)?;
    }
    let parts = split(&ds, &spec)?;
    timings.ingest = seconds_since(started);

    let config = AutoLatentConfig {
        block_size: args.block,
        passes: args.passes,
        patience: args.patience,
        min_improvement: args.min_improvement,
        seed: args.seed,
    };
    let started = Instant::now();
    let result = if args.trace_test {
        auto_latent_factors_monitored(&parts.train, &parts.validation, &parts.test, &config)?
    } else {
        auto_latent_factors(&parts.train, &parts.validation, &config)?
    };
    timings.factorize = seconds_since(started);

    let started = Instant::now();
    let predictions = Predictor::new(&parts.train).predict_all(&result.factors, &parts.test)?;
    let truths: Vec<f64> = parts.test.iter().map(|s| s.rating).collect();
    let values: Vec<f64> = predictions.iter().map(|p| p.value).collect();
    let test_mae = adaptive_cf::cf::mae(&values, &truths)?;
    let fallback_rate = predictions.iter().filter(|p| p.fallback).count() as f64 / predictions.len() as f64;
    timings.evaluate = seconds_since(started);

    let (lo, hi) = ds.rating_range();
    let trace: Vec<TracePoint> = result
        .trace
        .iter()
        .map(|p| TracePoint {
            k: p.k,
            validation_mae: p.validation_mae,
            test_mae: p.monitor_mae,
            seconds: round_ms(p.seconds),
        })
        .collect();
    let report = RunReport {
        command: command.to_string(),
        seed: args.seed,
        k: result.k(),
        method: None,
        passes: result.passes,
        relative_residual: None,
        validation_mae: Some(result.validation_mae),
        test_mae: Some(test_mae),
        test_fallback_rate: Some(fallback_rate),
        singular_values: Vec::new(),
        dataset: DatasetStats {
            path: args.input.input.display().to_string(),
            format: format!("{:?}", resolve_format(&args.input)).to_lowercase(),
            rows: ds.users(),
            cols: ds.items(),
            nnz: ds.len(),
            rating_min: lo,
            rating_max: hi,
            duplicates: Some(duplicates),
        },
        timings,
        split: Some(SplitStats {
            fractions: [spec.train, spec.validation, spec.test],
            train: parts.train.nnz(),
            validation: parts.validation.len(),
            test: parts.test.len(),
        }),
        trace,
    };
    ensure_dir(&args.out)?;
    let manifest = args.out.join(MANIFEST_FILE);
    write_split_manifest(&manifest, &spec, &parts).map_err(|e| match e {
        adaptive_cf::Error::Io(io) => CliError::output(&manifest, io),
        other => other.into(),
    })?;
    write_trace(&args.out.join(TRACE_FILE), &report.trace)?;
    report.write(&args.out.join(crate::pca::REPORT_FILE))?;
    Ok(report)
}

impl RecommendArgs {
    /// Command line equivalent to these arguments.
    pub fn command_line(&self) -> String {
        let mut parts = vec!["adaptive-cf".to_string(), "recommend".into()];
        parts.extend(self.input.to_flags());
        parts.extend([
            "--split".into(),
            self.split.clone(),
            "--block".into(),
            self.block.to_string(),
            "--passes".into(),
            self.passes.to_string(),
            "--patience".into(),
            self.patience.to_string(),
            "--min-improvement".into(),
            self.min_improvement.to_string(),
        ]);
        if let Some(p) = self.prune {
            parts.extend(["--prune".into(), p.to_string()]);
        }
        if self.trace_test {
            parts.push("--trace-test".into());
        }
        parts.extend([
            "--seed".into(),
            self.seed.to_string(),
            "--out".into(),
            self.out.display().to_string(),
        ]);
        parts.join(" ")
    }
}
