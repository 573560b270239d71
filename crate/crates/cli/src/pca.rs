use std::time::Instant;

use adaptive_cf::rsvd::{adaptive_pca_with_state, basic_rsvd, fixed_precision_qb, svd_from_qb, TerminationCriterion};

use crate::args::{Method, PcaArgs};
use crate::error::{CliError, CliResult};
use crate::input::load_matrix;
use crate::report::{ensure_dir, seconds_since, write_singular_values, RunReport, Timings};

pub const REPORT_FILE: &str = "report.toml";
pub const SINGULAR_VALUES_FILE: &str = "singular_values.csv";

/// Factorizes the input and writes `report.toml` and `singular_values.csv`
/// into `args.out`.
pub fn run_pca(args: &PcaArgs, command: &str) -> CliResult<RunReport> {
    let mut timings = Timings::default();
    let started = Instant::now();
    let (a, dataset) = load_matrix(&args.input)?;
    timings.ingest = seconds_since(started);

    let started = Instant::now();
    let (svd, passes) = match (args.method, args.rank, args.tol) {
        (Method::Adaptive, rank, tol) => {
            let criterion = match (rank, tol) {
                (Some(k), None) => TerminationCriterion::FixedRank(k),
                (None, Some(eps)) => TerminationCriterion::FrobTolerance(eps),
                _ => return Err(CliError::Input("give exactly one of --rank and --tol".into())),
            };
            let (svd, state) = adaptive_pca_with_state(&a, args.block, args.pass_count(), criterion, args.seed)?;
            (svd, state.passes())
        }
        (Method::Qb, None, Some(eps)) => {
            let state = fixed_precision_qb(&a, eps, args.block, args.power_rounds(), args.seed)?;
            let svd = svd_from_qb(&state, state.rank(), state.rank())?;
            (svd, state.passes())
        }
        (Method::Basic, Some(k), None) => {
            let p = args.power_rounds();
            (basic_rsvd(&a, k, p, args.oversample, args.seed)?, 2 * p + 2)
        }
        (Method::Qb, ..) => return Err(CliError::Input("--method qb needs --tol".into())),
        (Method::Basic, ..) => return Err(CliError::Input("--method basic needs --rank".into())),
    };
    timings.factorize = seconds_since(started);

    let started = Instant::now();
    let residual = svd.residual_fro(&a)? / a.fro_norm_sq().sqrt();
    timings.evaluate = seconds_since(started);

    let report = RunReport {
        command: command.to_string(),
        seed: args.seed,
        k: svd.rank(),
        method: Some(format!("{:?}", args.method).to_lowercase()),
        passes,
        relative_residual: Some(residual),
        validation_mae: None,
        test_mae: None,
        test_fallback_rate: None,
        singular_values: svd.s.clone(),
        dataset,
        timings,
        split: None,
        trace: Vec::new(),
    };
    ensure_dir(&args.out)?;
    write_singular_values(&args.out.join(SINGULAR_VALUES_FILE), &svd.s)?;
    report.write(&args.out.join(REPORT_FILE))?;
    Ok(report)
}

impl PcaArgs {
    /// Command line equivalent to these arguments.
    pub fn command_line(&self) -> String {
        let mut parts = vec!["adaptive-cf".to_string(), "pca".into()];
        parts.extend(self.input.to_flags());
        if let Some(k) = self.rank {
            parts.extend(["--rank".into(), k.to_string()]);
        }
        if let Some(e) = self.tol {
            parts.extend(["--tol".into(), e.to_string()]);
        }
        parts.extend([
            "--method".into(),
            format!("{:?}", self.method).to_lowercase(),
            "--block".into(),
            self.block.to_string(),
            "--passes".into(),
            self.passes.to_string(),
        ]);
        if let Some(p) = self.power {
            parts.extend(["--power".into(), p.to_string()]);
        }
        if self.method == Method::Basic {
            parts.extend(["--oversample".into(), self.oversample.to_string()]);
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
