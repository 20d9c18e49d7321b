//! Run configuration: JSON document describing the norm, the surface, the
//! sample grid and the checks to run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use msk_core::norms::{JetFn, ScalarJet};
use msk_core::surfaces::{self, Domain, Orientation, SurfacePatch};
use msk_core::{JetSource, NormModel, NumericsConfig};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::checks::CheckId;
use crate::CliError;

/// Default relative step for finite-difference norm jets.
pub const NORM_FD_STEP: f64 = 1e-4;
/// Default step for finite-difference surface jets.
pub const SURFACE_FD_STEP: f64 = 3e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JetKind {
    #[default]
    Analytic,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JetConfig {
    #[serde(default)]
    pub source: JetKind,
    /// Finite-difference step; ignored for analytic jets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl JetConfig {
    fn to_source(self, default_step: f64) -> Result<JetSource, CliError> {
        match self.source {
            JetKind::Analytic => Ok(JetSource::Analytic),
            JetKind::Fd => {
                let step = self.step.unwrap_or(default_step);
                if !(step > 0.0 && step.is_finite()) {
                    return Err(CliError::Config(format!("jet step must be positive, got {step}")));
                }
                Ok(JetSource::FiniteDifference { step })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFamilyName {
    Euclidean,
    Ellipsoid,
    Lp,
    /// A built-in gauge whose support function is recovered by Newton's method.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub family: NormFamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Gauge of a `custom` norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Box<NormConfig>>,
    #[serde(default)]
    pub jets: JetConfig,
}

impl NormConfig {
    pub fn build(&self, numerics: &NumericsConfig) -> Result<NormModel, CliError> {
        let model = match self.family {
            NormFamilyName::Euclidean => NormModel::euclidean(),
            NormFamilyName::Ellipsoid => {
                let m = self.matrix.ok_or_else(|| missing("norm.matrix"))?;
                NormModel::ellipsoid(Matrix3::from_fn(|i, j| m[i][j]))?
            }
            NormFamilyName::Lp => {
                NormModel::lp(self.p.ok_or_else(|| missing("norm.p"))?)?.with_axis_guard(numerics.lp_axis_guard)
            }
            NormFamilyName::Custom => {
                let inner = self.gauge.as_ref().ok_or_else(|| missing("norm.gauge"))?;
                if inner.family == NormFamilyName::Custom {
                    return Err(CliError::Config("norm.gauge must be a built-in family".into()));
                }
                let inner = inner.build(numerics)?;
                let gauge: JetFn = Arc::new(move |x: &Vector3<f64>| -> msk_core::Result<ScalarJet> { inner.gauge_jet(x) });
                NormModel::custom(gauge, None)
            }
        };
        Ok(model.with_jet_source(self.jets.to_source(NORM_FD_STEP)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceFamilyName {
    EuclideanSphere,
    Ellipsoid,
    Graph,
    Torus,
    MinkowskiSphere,
    Catenoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrientationName {
    #[default]
    Standard,
    Flipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub family: SurfaceFamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<[f64; 3]>,
    /// Polynomial height `Σ c·sⁱtʲ` as `[i, j, c]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<(u32, u32, f64)>>,
    /// `[s0, s1, t0, t1]`; graphs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    /// Norm of a Minkowski sphere; defaults to the run's norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormConfig>,
    #[serde(default)]
    pub orientation: OrientationName,
    #[serde(default)]
    pub jets: JetConfig,
}

impl SurfaceConfig {
    pub fn center_vector(&self) -> Vector3<f64> {
        self.center.map(Vector3::from).unwrap_or_else(Vector3::zeros)
    }

    pub fn build(&self, run_norm: &NormModel, numerics: &NumericsConfig) -> Result<SurfacePatch, CliError> {
        let patch = match self.family {
            SurfaceFamilyName::EuclideanSphere => {
                surfaces::euclidean_sphere(self.radius.ok_or_else(|| missing("surface.radius"))?, self.center_vector())?
            }
            SurfaceFamilyName::Ellipsoid => {
                let [a, b, c] = self.axes.ok_or_else(|| missing("surface.axes"))?;
                surfaces::ellipsoid(a, b, c)?
            }
            SurfaceFamilyName::Graph => {
                let terms = self.terms.clone().ok_or_else(|| missing("surface.terms"))?;
                let [s0, s1, t0, t1] = self.domain.ok_or_else(|| missing("surface.domain"))?;
                surfaces::polynomial_graph(terms, Domain::new(s0, s1, t0, t1, [false; 2])?)
            }
            SurfaceFamilyName::Torus => surfaces::torus(
                self.major.ok_or_else(|| missing("surface.major"))?,
                self.minor.ok_or_else(|| missing("surface.minor"))?,
            )?,
            SurfaceFamilyName::MinkowskiSphere => {
                let norm = match &self.norm {
                    Some(cfg) => cfg.build(numerics)?,
                    None => run_norm.clone(),
                };
                surfaces::minkowski_sphere(
                    norm,
                    self.radius.ok_or_else(|| missing("surface.radius"))?,
                    self.center_vector(),
                    *numerics,
                )?
            }
            SurfaceFamilyName::Catenoid => surfaces::catenoid(
                self.waist.ok_or_else(|| missing("surface.waist"))?,
                self.height.ok_or_else(|| missing("surface.height"))?,
            )?,
        };
        let orientation = match self.orientation {
            OrientationName::Standard => Orientation::Standard,
            OrientationName::Flipped => Orientation::Flipped,
        };
        Ok(patch
            .with_orientation(orientation)
            .with_jet_source(self.jets.to_source(SURFACE_FD_STEP)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub ns: usize,
    pub nt: usize,
    #[serde(default = "default_margins")]
    pub margins: [f64; 2],
}

fn default_margins() -> [f64; 2] {
    [0.05, 0.05]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    /// Report destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportShape {
    Circle,
    Ellipse,
}

/// Planar support function: either a built-in shape or a CSV of `(θ, g)` rows
/// on a uniform grid over `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<SupportShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default = "default_planar_nodes")]
    pub nodes: usize,
}

fn default_planar_nodes() -> usize {
    2048
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub norm: NormConfig,
    pub surface: SurfaceConfig,
    pub grid: GridConfig,
    pub checks: Vec<CheckId>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    /// Base points for the affine-distance checks; the first one is used for
    /// the sphere characterization. Defaults to the surface centre.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centers: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar: Option<PlanarConfig>,
    /// Per-check tolerance overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<CheckId, f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.numerics.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.grid.ns < 2 || self.grid.nt < 2 {
            return Err(CliError::Config("grid counts must be at least 2".into()));
        }
        if self.checks.is_empty() {
            return Err(CliError::Config("no checks requested".into()));
        }
        for (id, tol) in &self.tolerances {
            if !(*tol >= 0.0) {
                return Err(CliError::Config(format!("tolerance for {id} must be non-negative")));
            }
        }
        if self.checks.contains(&CheckId::PlanarErmakov) && self.planar.is_none() {
            return Err(missing("planar"));
        }
        Ok(())
    }

    pub fn center_points(&self) -> Vec<Vector3<f64>> {
        if self.centers.is_empty() {
            vec![self.surface.center_vector()]
        } else {
            self.centers.iter().copied().map(Vector3::from).collect()
        }
    }
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("missing field {field}"))
}
