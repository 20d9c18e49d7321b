//! Check registry and per-check evaluation over the sample grid.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use msk_core::blaschke::{blaschke_residual, planar_support_check, planar_support_check_samples, PlanarReport};
use msk_core::distances::{
    affine_distance, ambient_steps, chart_derivatives, critical_hessian, locate_focal_offset, nabla_laplacian_rho,
    tangent_plane_field,
};
use msk_core::geometry::AsymptoticDirections;
use msk_core::{Error, NormModel, NumericsConfig, PointGeometry, SurfacePatch};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{NormFamilyName, PlanarConfig, RunConfig, SupportShape, SurfaceFamilyName};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    CurvatureClosedForm,
    Umbilicity,
    IndicatrixMean,
    OrthogonalPairSum,
    AsymptoticDupinOrthogonality,
    GaussianDeterminantRatio,
    TangentDistanceCritical,
    TangentDistanceHessian,
    FocalDistance,
    LaplacianIdentity,
    MinimalityScan,
    SphereCharacterization,
    BlaschkeScan,
    AffineNormalCompare,
    PlanarErmakov,
}

impl CheckId {
    pub const ALL: [CheckId; 15] = [
        CheckId::CurvatureClosedForm,
        CheckId::Umbilicity,
        CheckId::IndicatrixMean,
        CheckId::OrthogonalPairSum,
        CheckId::AsymptoticDupinOrthogonality,
        CheckId::GaussianDeterminantRatio,
        CheckId::TangentDistanceCritical,
        CheckId::TangentDistanceHessian,
        CheckId::FocalDistance,
        CheckId::LaplacianIdentity,
        CheckId::MinimalityScan,
        CheckId::SphereCharacterization,
        CheckId::BlaschkeScan,
        CheckId::AffineNormalCompare,
        CheckId::PlanarErmakov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::CurvatureClosedForm => "curvature-closed-form",
            CheckId::Umbilicity => "umbilicity",
            CheckId::IndicatrixMean => "indicatrix-mean",
            CheckId::OrthogonalPairSum => "orthogonal-pair-sum",
            CheckId::AsymptoticDupinOrthogonality => "asymptotic-dupin-orthogonality",
            CheckId::GaussianDeterminantRatio => "gaussian-determinant-ratio",
            CheckId::TangentDistanceCritical => "tangent-distance-critical",
            CheckId::TangentDistanceHessian => "tangent-distance-hessian",
            CheckId::FocalDistance => "focal-distance",
            CheckId::LaplacianIdentity => "laplacian-identity",
            CheckId::MinimalityScan => "minimality-scan",
            CheckId::SphereCharacterization => "sphere-characterization",
            CheckId::BlaschkeScan => "blaschke-scan",
            CheckId::AffineNormalCompare => "affine-normal-compare",
            CheckId::PlanarErmakov => "planar-ermakov",
        }
    }

    /// The statement being verified.
    pub fn statement(self) -> &'static str {
        match self {
            CheckId::CurvatureClosedForm => "principal, Gaussian and mean curvature match the closed form of the surface",
            CheckId::Umbilicity => "the Birkhoff-Gauss differential is a multiple of the identity",
            CheckId::IndicatrixMean => "the mean of the normal curvature over the Dupin indicatrix is H",
            CheckId::OrthogonalPairSum => "normal curvatures of Dupin-orthogonal directions sum to 2H",
            CheckId::AsymptoticDupinOrthogonality => {
                "asymptotic directions have Dupin cosine 2H/(l2 - l1); Dupin orthogonal where H = 0"
            }
            CheckId::GaussianDeterminantRatio => "K = det(h)/det(b)",
            CheckId::TangentDistanceCritical => "p is a critical point of its tangent-plane distance",
            CheckId::TangentDistanceHessian => "the b-Hessian of the tangent-plane distance at p is -h",
            CheckId::FocalDistance => {
                "with a = p - t eta, hess D_a(X, X) vanishes exactly at t = 1/k(X)"
            }
            CheckId::LaplacianIdentity => "the nabla-Laplacian of the affine distance is 2(H rho - 1)",
            CheckId::MinimalityScan => "where H = 0 the nabla-Laplacian of the affine distance is -2",
            CheckId::SphereCharacterization => "the affine distance is constant on a Minkowski sphere about its centre",
            CheckId::BlaschkeScan => "induced volume equals h-volume (|omega| / omega_h = 1)",
            CheckId::AffineNormalCompare => "the Birkhoff normal coincides with the Euclidean affine normal",
            CheckId::PlanarErmakov => "the support function solves g'' + g = g^-3",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckId::CurvatureClosedForm => 1e-8,
            CheckId::Umbilicity => 1e-6,
            CheckId::IndicatrixMean | CheckId::OrthogonalPairSum => 1e-10,
            CheckId::AsymptoticDupinOrthogonality => 1e-6,
            CheckId::GaussianDeterminantRatio => 1e-8,
            CheckId::TangentDistanceCritical => 1e-6,
            CheckId::TangentDistanceHessian => 1e-3,
            CheckId::FocalDistance => 1e-4,
            CheckId::LaplacianIdentity | CheckId::MinimalityScan => 5e-3,
            CheckId::SphereCharacterization => 1e-8,
            CheckId::BlaschkeScan => 1e-8,
            CheckId::AffineNormalCompare => 1e-6,
            CheckId::PlanarErmakov => 1e-10,
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Aggregated outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: CheckId,
    pub statement: &'static str,
    /// Largest residual over the evaluated points; `null` if none were evaluated.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_point: Option<[f64; 2]>,
    pub n_points: usize,
    pub n_skipped: usize,
    pub details: BTreeMap<String, f64>,
}

/// One evaluated point: the residual and check-specific auxiliary maxima.
#[derive(Debug, Clone, Default)]
struct Sample {
    residual: f64,
    aux: Vec<(&'static str, f64)>,
}

impl Sample {
    fn new(residual: f64) -> Self {
        Sample { residual, aux: Vec::new() }
    }

    fn with(mut self, key: &'static str, value: f64) -> Self {
        self.aux.push((key, value));
        self
    }
}

/// Everything a check needs, shared read-only across workers.
pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub norm: &'a NormModel,
    pub surface: &'a SurfacePatch,
    pub numerics: &'a NumericsConfig,
    pub points: &'a [(f64, f64)],
    pub geometry: &'a [PointGeometry],
    /// Points whose normal falls inside the norm's axis guard; skipped by every check.
    pub guarded: &'a [bool],
    pub centers: Vec<Vector3<f64>>,
}

/// Per-point generator, independent of evaluation order.
fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Errors that mean "this point is outside the check's hypotheses".
fn is_skip(e: &Error) -> bool {
    matches!(e, Error::DegenerateH | Error::NonElliptic { .. })
}

fn numerical(id: CheckId, point: (f64, f64), e: Error) -> CliError {
    CliError::Numerical { check: Some(id.name().to_string()), s: point.0, t: point.1, message: e.to_string() }
}

impl Context<'_> {
    pub fn run(&self, id: CheckId) -> Result<CheckOutcome, CliError> {
        let tolerance = self.config.tolerances.get(&id).copied().unwrap_or(id.default_tolerance());
        match id {
            CheckId::SphereCharacterization => return self.sphere_characterization(tolerance),
            CheckId::PlanarErmakov => {
                let planar = self.config.planar.as_ref().ok_or_else(|| CliError::Config("missing field planar".into()))?;
                return planar_check(planar, tolerance);
            }
            _ => {}
        }
        let closed_form = if id == CheckId::CurvatureClosedForm {
            Some(closed_form(self.config)?)
        } else {
            None
        };
        let samples: Vec<Result<Option<Sample>, CliError>> = (0..self.points.len())
            .into_par_iter()
            .map(|i| {
                let pg = &self.geometry[i];
                let point = self.points[i];
                if self.guarded[i] {
                    return Ok(None);
                }
                let eval = match id {
                    CheckId::CurvatureClosedForm => Ok(Some(curvature_closed_form(pg, closed_form.as_ref().unwrap()))),
                    CheckId::Umbilicity => Ok(Some(umbilicity(pg))),
                    CheckId::IndicatrixMean => indicatrix_mean(pg, self.numerics.quad_nodes).map(Some),
                    CheckId::OrthogonalPairSum => {
                        let theta = point_rng(self.config.seed, i).random_range(0.0..TAU);
                        pg.dupin_orthogonal_pair_sum(theta)
                            .map(|sum| Some(Sample::new((sum - 2.0 * pg.mean).abs() / pg.mean.abs().max(1.0))))
                    }
                    CheckId::AsymptoticDupinOrthogonality => Ok(asymptotic(pg)),
                    CheckId::GaussianDeterminantRatio => pg.gaussian_by_determinants().map(|k| {
                        let diff = (k - pg.lambda1 * pg.lambda2).abs();
                        let scale = pg.gaussian.abs();
                        Some(Sample::new(if scale > 0.0 { diff / scale } else { diff }))
                    }),
                    CheckId::TangentDistanceCritical => {
                        chart_derivatives(tangent_plane_field(self.surface, pg), pg.s, pg.t, ambient_steps(pg, self.numerics.fd_step))
                            .map(|(g, grad, _)| {
                                let ambient = Vector2::new(grad[0] / pg.jet.f_s.norm(), grad[1] / pg.jet.f_t.norm());
                                Some(Sample::new(ambient.norm() / (1.0 + g.abs())))
                            })
                    }
                    CheckId::TangentDistanceHessian => self.tangent_hessian(pg),
                    CheckId::FocalDistance => self.focal(pg, i),
                    CheckId::LaplacianIdentity => self.laplacian(pg, false),
                    CheckId::MinimalityScan => self.laplacian(pg, true),
                    CheckId::BlaschkeScan => blaschke_residual(self.norm, self.surface, pg.s, pg.t, self.numerics)
                        .map(|b| Some(Sample::new((b.ratio - 1.0).abs()).with("max_abs_volume_residual", b.residual.abs()))),
                    CheckId::AffineNormalCompare => {
                        blaschke_residual(self.norm, self.surface, pg.s, pg.t, self.numerics).map(|b| {
                            b.discrepancy.map(|d| Sample::new(d).with("max_angle", b.angle.unwrap_or(f64::NAN)))
                        })
                    }
                    CheckId::SphereCharacterization | CheckId::PlanarErmakov => unreachable!(),
                };
                match eval {
                    Ok(sample) => Ok(sample),
                    Err(e) if is_skip(&e) => Ok(None),
                    Err(e) => Err(numerical(id, point, e)),
                }
            })
            .collect();
        let mut evaluated = Vec::with_capacity(samples.len());
        for (i, s) in samples.into_iter().enumerate() {
            evaluated.push((self.points[i], s?));
        }
        Ok(aggregate(id, tolerance, evaluated))
    }

    fn tangent_hessian(&self, pg: &PointGeometry) -> msk_core::Result<Option<Sample>> {
        let scale = pg.h_mat.norm();
        if scale == 0.0 {
            return Ok(None);
        }
        let hess = critical_hessian(tangent_plane_field(self.surface, pg), pg, self.numerics)?;
        Ok(Some(Sample::new((hess + pg.h_mat).abs().max() / scale)))
    }

    fn focal(&self, pg: &PointGeometry, index: usize) -> msk_core::Result<Option<Sample>> {
        let phi = point_rng(self.config.seed, index).random_range(0.0..std::f64::consts::PI);
        let mut x = pg.v1 * phi.cos() + pg.v2 * phi.sin();
        let mut k = pg.normal_curvature(&x)?;
        if !(k > 0.0) {
            if !(pg.lambda2 > 0.0) {
                return Ok(None);
            }
            x = pg.v2;
            k = pg.lambda2;
        }
        let residual = match locate_focal_offset(self.norm, self.surface, pg, &x, (0.5 / k, 2.0 / k), 1e-8, self.numerics) {
            Ok(t) => (t * k - 1.0).abs(),
            Err(Error::InvalidParameter(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Ok(Some(Sample::new(residual)))
    }

    fn laplacian(&self, pg: &PointGeometry, minimal_only: bool) -> msk_core::Result<Option<Sample>> {
        let scale = pg.lambda1.abs().max(pg.lambda2.abs()).max(1.0);
        if minimal_only && pg.mean.abs() > 1e-6 * scale {
            return Ok(None);
        }
        let mut sample = Sample::new(0.0);
        for a in &self.centers {
            let lap = nabla_laplacian_rho(self.norm, self.surface, pg.s, pg.t, a, self.numerics)?;
            let residual = if minimal_only { (lap.laplacian + 2.0).abs() } else { lap.identity_residual.abs() };
            sample.residual = sample.residual.max(residual);
            sample = sample.with("max_splitting_defect", lap.splitting_defect);
            if minimal_only {
                sample = sample.with("max_abs_mean", pg.mean.abs());
            }
        }
        Ok(Some(sample))
    }

    fn sphere_characterization(&self, tolerance: f64) -> Result<CheckOutcome, CliError> {
        let center = self.centers[0];
        let mut rho = Vec::with_capacity(self.points.len());
        let mut kept = Vec::with_capacity(self.points.len());
        let mut umbilic_defect: f64 = 0.0;
        for ((pg, &point), &guarded) in self.geometry.iter().zip(self.points).zip(self.guarded) {
            if guarded {
                continue;
            }
            kept.push(point);
            let d = affine_distance(pg, &center).map_err(|e| numerical(CheckId::SphereCharacterization, point, e))?;
            rho.push(d.rho);
            umbilic_defect = umbilic_defect.max((pg.lambda2 - pg.lambda1).abs());
        }
        let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (min + max);
        let worst = rho
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |acc, (i, r)| if (r - mid).abs() > acc.1 { (i, (r - mid).abs()) } else { acc })
            .0;
        let spread = max - min;
        let mut details = BTreeMap::new();
        details.insert("rho_min".into(), min);
        details.insert("rho_max".into(), max);
        details.insert("max_umbilic_defect".into(), umbilic_defect);
        Ok(CheckOutcome {
            id: CheckId::SphereCharacterization,
            statement: CheckId::SphereCharacterization.statement(),
            max_residual: spread,
            tolerance,
            pass: !rho.is_empty() && spread <= tolerance,
            worst_point: kept.get(worst).map(|p| [p.0, p.1]),
            n_points: rho.len(),
            n_skipped: self.points.len() - rho.len(),
            details,
        })
    }
}

fn aggregate(id: CheckId, tolerance: f64, samples: Vec<((f64, f64), Option<Sample>)>) -> CheckOutcome {
    let mut max_residual = f64::NAN;
    let mut worst_point = None;
    let mut n_points = 0;
    let mut n_skipped = 0;
    let mut details: BTreeMap<String, f64> = BTreeMap::new();
    for (point, sample) in samples {
        let Some(sample) = sample else {
            n_skipped += 1;
            continue;
        };
        n_points += 1;
        // NaN residuals are failures and win the comparison
        if worst_point.is_none() || sample.residual > max_residual || sample.residual.is_nan() && !max_residual.is_nan() {
            max_residual = sample.residual;
            worst_point = Some([point.0, point.1]);
        }
        for (key, value) in sample.aux {
            let slot = details.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
            *slot = slot.max(value);
        }
    }
    CheckOutcome {
        id,
        statement: id.statement(),
        max_residual,
        tolerance,
        pass: n_points > 0 && max_residual <= tolerance,
        worst_point,
        n_points,
        n_skipped,
        details,
    }
}

fn umbilicity(pg: &PointGeometry) -> Sample {
    let residual = (pg.w - Matrix2::identity() * pg.mean).norm();
    Sample::new(residual).with("max_principal_gap", (pg.lambda2 - pg.lambda1).abs())
}

fn indicatrix_mean(pg: &PointGeometry, nodes: usize) -> msk_core::Result<Sample> {
    let avg = pg.mean_by_indicatrix_average(nodes)?;
    Ok(Sample::new((avg - pg.mean).abs() / pg.mean.abs().max(1.0)))
}

/// Compares the Dupin cosine of the roots of `h(X, X) = 0`, found directly
/// from the coefficients of `h`, with `2H/(λ₂ − λ₁)`. Non-hyperbolic points are skipped.
fn asymptotic(pg: &PointGeometry) -> Option<Sample> {
    if !matches!(pg.asymptotic_directions(), AsymptoticDirections::Two(..)) {
        return None;
    }
    let (a, b, c) = (pg.h_mat[(0, 0)], pg.h_mat[(0, 1)], pg.h_mat[(1, 1)]);
    let disc = (b * b - a * c).max(0.0).sqrt();
    let (x, y) = if c.abs() > a.abs() {
        (Vector2::new(c, -b + disc), Vector2::new(c, -b - disc))
    } else {
        (Vector2::new(-b + disc, a), Vector2::new(-b - disc, a))
    };
    let cosine = pg.d(&x, &y) / (pg.d(&x, &x) * pg.d(&y, &y)).sqrt();
    let expected = 2.0 * pg.mean / (pg.lambda2 - pg.lambda1);
    let scale = pg.lambda1.abs().max(pg.lambda2.abs()).max(1.0);
    let mut sample = Sample::new((cosine.abs() - expected.abs()).abs());
    if pg.mean.abs() <= 1e-6 * scale {
        sample = sample.with("max_dupin_cosine_where_minimal", cosine.abs()).with("n_minimal_points", 1.0);
    }
    Some(sample)
}

type ClosedForm = Box<dyn Fn(&PointGeometry) -> (f64, f64) + Send + Sync>;

/// Closed-form principal curvatures for the surface/norm pairs that have one.
fn closed_form(config: &RunConfig) -> Result<ClosedForm, CliError> {
    let surface = &config.surface;
    let euclidean = config.norm.family == NormFamilyName::Euclidean;
    let sign = match surface.orientation {
        crate::config::OrientationName::Standard => 1.0,
        crate::config::OrientationName::Flipped => -1.0,
    };
    let oriented = move |l1: f64, l2: f64| if sign > 0.0 { (l1, l2) } else { (-l2, -l1) };
    match surface.family {
        SurfaceFamilyName::EuclideanSphere if euclidean => {
            let r = surface.radius.unwrap_or(1.0);
            Ok(Box::new(move |_| oriented(1.0 / r, 1.0 / r)))
        }
        SurfaceFamilyName::MinkowskiSphere if surface.norm.as_ref().is_none_or(|n| *n == config.norm) => {
            let r = surface.radius.unwrap_or(1.0);
            Ok(Box::new(move |_| oriented(1.0 / r, 1.0 / r)))
        }
        SurfaceFamilyName::Ellipsoid if euclidean => {
            let [a, b, c] = surface.axes.unwrap_or([1.0; 3]);
            Ok(Box::new(move |pg: &PointGeometry| {
                let p = pg.position();
                let q = p.x * p.x / a.powi(4) + p.y * p.y / b.powi(4) + p.z * p.z / c.powi(4);
                let abc2 = (a * b * c).powi(2);
                let k = 1.0 / (abc2 * q * q);
                let h = (a * a + b * b + c * c - p.norm_squared()) / (2.0 * abc2 * q.powf(1.5));
                let root = (h * h - k).max(0.0).sqrt();
                oriented(h - root, h + root)
            }))
        }
        SurfaceFamilyName::Catenoid if euclidean => {
            let c = surface.waist.unwrap_or(1.0);
            Ok(Box::new(move |pg: &PointGeometry| {
                let l = 1.0 / (c * (pg.s / c).cosh().powi(2));
                oriented(-l, l)
            }))
        }
        _ => Err(CliError::Config(
            "curvature-closed-form needs a Euclidean sphere, ellipsoid or catenoid under the Euclidean norm, or a Minkowski sphere of the run's norm"
                .into(),
        )),
    }
}

fn curvature_closed_form(pg: &PointGeometry, expected: &ClosedForm) -> Sample {
    let (l1, l2) = expected(pg);
    let residual = [
        (pg.lambda1 - l1).abs(),
        (pg.lambda2 - l2).abs(),
        (pg.gaussian - l1 * l2).abs(),
        (pg.mean - 0.5 * (l1 + l2)).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Sample::new(residual)
}

/// Samples of a planar support function described by `planar`.
pub fn planar_report(planar: &PlanarConfig) -> Result<PlanarReport, CliError> {
    if let Some(path) = &planar.csv {
        let samples = read_support_csv(path)?;
        return Ok(planar_support_check_samples(&samples)?);
    }
    let report = match planar.shape {
        Some(SupportShape::Circle) => {
            let r = planar.radius.unwrap_or(1.0);
            planar_support_check(move |_| (r, 0.0), planar.nodes)?
        }
        Some(SupportShape::Ellipse) => {
            let a = planar.a.ok_or_else(|| CliError::Config("missing field planar.a".into()))?;
            let b = planar.b.ok_or_else(|| CliError::Config("missing field planar.b".into()))?;
            planar_support_check(
                move |th: f64| {
                    let q = a * a * th.cos().powi(2) + b * b * th.sin().powi(2);
                    let g = q.sqrt();
                    let dq = (b * b - a * a) * (2.0 * th).sin();
                    let ddq = 2.0 * (b * b - a * a) * (2.0 * th).cos();
                    (g, ddq / (2.0 * g) - dq * dq / (4.0 * q * g))
                },
                planar.nodes,
            )?
        }
        None => return Err(CliError::Config("planar needs either shape or csv".into())),
    };
    Ok(report)
}

/// Reads `(θ, g)` rows; the angles must form a uniform grid over `[0, 2π)`.
pub fn read_support_csv(path: &std::path::Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut theta = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(e.to_string()))?;
        let parse = |k: usize| -> Result<f64, CliError> {
            record
                .get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("support CSV row {}: expected two numbers", line + 1)))
        };
        match (parse(0), parse(1)) {
            (Ok(a), Ok(g)) => {
                theta.push(a);
                values.push(g);
            }
            // a header row is tolerated
            (Err(e), _) | (_, Err(e)) if line > 0 => return Err(e),
            _ => {}
        }
    }
    let n = theta.len();
    if n < 4 {
        return Err(CliError::Config("support CSV needs at least 4 rows".into()));
    }
    for (i, &a) in theta.iter().enumerate() {
        let expected = TAU * i as f64 / n as f64;
        if (a - expected).abs() > 1e-9 * TAU {
            return Err(CliError::Config(format!(
                "support CSV angles must be uniform on [0, 2pi): row {} has {a}, expected {expected}",
                i + 1
            )));
        }
    }
    Ok(values)
}

fn planar_check(planar: &PlanarConfig, tolerance: f64) -> Result<CheckOutcome, CliError> {
    let report = planar_report(planar).map_err(|e| match e {
        CliError::Core(Error::NonConvexCurve { theta }) => CliError::Numerical {
            check: Some(CheckId::PlanarErmakov.name().into()),
            s: theta,
            t: 0.0,
            message: "support function does not describe a convex curve".into(),
        },
        other => other,
    })?;
    let (worst, max) = report
        .ermakov
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, r)| if r.abs() > acc.1 { (i, r.abs()) } else { acc });
    let mut details = BTreeMap::new();
    details.insert("sup_blaschke_residual".into(), report.sup_blaschke);
    Ok(CheckOutcome {
        id: CheckId::PlanarErmakov,
        statement: CheckId::PlanarErmakov.statement(),
        max_residual: max,
        tolerance,
        pass: max <= tolerance,
        worst_point: Some([report.theta[worst], 0.0]),
        n_points: report.theta.len(),
        n_skipped: 0,
        details,
    })
}

/// `|ω| / ω_h` from the point data, when `h` is nondegenerate.
pub fn blaschke_ratio(pg: &PointGeometry) -> Option<f64> {
    let omega = Matrix3::from_columns(&[pg.jet.f_s, pg.jet.f_t, pg.eta]).determinant();
    let det_h = pg.h_mat.determinant();
    (det_h != 0.0).then(|| omega.abs() / det_h.abs().sqrt())
}
