//! Verification driver: reads a run configuration, evaluates the pointwise
//! geometry over a parameter grid, runs the requested checks and emits a
//! deterministic report.

pub mod checks;
pub mod config;
pub mod report;

use msk_core::{point_geometry, PointGeometry};
use rayon::prelude::*;
use thiserror::Error;

pub use checks::{CheckId, CheckOutcome};
pub use config::RunConfig;
pub use report::VerificationReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid geometry: {0}")]
    Core(#[from] msk_core::Error),
    #[error("numerical failure{} at (s, t) = ({s}, {t}): {message}", check.as_ref().map(|c| format!(" in {c}")).unwrap_or_default())]
    Numerical { check: Option<String>, s: f64, t: f64, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

/// Report plus the per-point data it was computed from.
pub struct RunOutput {
    pub report: VerificationReport,
    pub geometry: Vec<PointGeometry>,
}

/// Runs every requested check on `threads` workers (all cores when `None`).
/// The result does not depend on the worker count.
pub fn run(config: &RunConfig, threads: Option<usize>) -> Result<RunOutput, CliError> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_inner(config))
}

fn run_inner(config: &RunConfig) -> Result<RunOutput, CliError> {
    let numerics = config.numerics;
    let norm = config.norm.build(&numerics)?;
    let surface = config.surface.build(&norm, &numerics)?;
    let needs_grid = config.checks.iter().any(|c| *c != CheckId::PlanarErmakov);
    let points = if needs_grid {
        surface.grid(config.grid.ns, config.grid.nt, config.grid.margins)?
    } else {
        Vec::new()
    };
    let geometry: Vec<Result<PointGeometry, CliError>> = points
        .par_iter()
        .map(|&(s, t)| {
            point_geometry(&norm, &surface, s, t, &numerics).map_err(|e| CliError::Numerical {
                check: None,
                s,
                t,
                message: e.to_string(),
            })
        })
        .collect();
    let geometry = geometry.into_iter().collect::<Result<Vec<_>, _>>()?;
    let guarded: Vec<bool> = geometry.iter().map(|pg| norm.axis_guarded(&pg.xi)).collect();
    let ctx = checks::Context {
        config,
        norm: &norm,
        surface: &surface,
        numerics: &numerics,
        points: &points,
        geometry: &geometry,
        guarded: &guarded,
        centers: config.center_points(),
    };
    let outcomes = config.checks.iter().map(|&id| ctx.run(id)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput { report: VerificationReport::new(config.clone(), outcomes), geometry })
}
