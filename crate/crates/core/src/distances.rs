//! Distance functions on a surface and their second-order invariants.
//!
//! For a point `p` and any `q`, the splitting `p − q = g(q)·η(p) + V(q)` with
//! `V(q)` tangent at `p` defines the tangent-plane distance `g`. For a centre
//! `a`, `p − a = ρ(p)·η(p) + V(p)` defines the affine distance `ρ`, whose
//! h-gradient is `−V`. Hessians are only evaluated at critical points, where
//! they reduce to plain second derivatives in the chart.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{point_geometry, PointGeometry};
use crate::norms::NormModel;
use crate::numerics::{condition_number, NumericsConfig};
use crate::surfaces::SurfacePatch;

/// `ρ` and the tangential remainder of `p − a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineDistance {
    pub rho: f64,
    /// Tangential part in chart coordinates.
    pub v: Vector2<f64>,
    pub v_ambient: Vector3<f64>,
    /// `|(p − a) − ρη − V|`, with `V` rebuilt from its coordinates.
    pub residual: f64,
}

impl AffineDistance {
    /// `grad_h ρ = −V`.
    pub fn grad_h_rho(&self) -> Vector2<f64> {
        -self.v
    }
}

/// ∇-Laplacian of `ρ` at one point, with the quantities it is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianSample {
    pub laplacian: f64,
    pub rho: f64,
    pub mean: f64,
    /// `Δρ − 2(Hρ − 1)`.
    pub identity_residual: f64,
    /// Largest mismatch between the transversal part of `D_{f_i}(−V)` and `h(f_i, −V)`.
    pub splitting_defect: f64,
}

/// Spread of `ρ` over a set of points together with the umbilicity defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereCharacterization {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_spread: f64,
    pub max_umbilic_defect: f64,
    pub n_points: usize,
}

/// `g(q) = ⟨p − q, ξ⟩ / ⟨η, ξ⟩`.
pub fn tangent_plane_distance(pg: &PointGeometry, q: &Vector3<f64>) -> Result<f64> {
    if !(pg.pairing.abs() > 0.0) {
        return Err(Error::DegeneratePairing);
    }
    Ok((pg.position() - q).dot(&pg.xi) / pg.pairing)
}

/// Chart gradient and Hessian of `field` at `(s, t)` by central differences
/// with per-axis steps.
pub fn chart_derivatives<F>(field: F, s: f64, t: f64, steps: [f64; 2]) -> Result<(f64, Vector2<f64>, Matrix2<f64>)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let [hs, ht] = steps;
    let f0 = field(s, t)?;
    let (fsp, fsm) = (field(s + hs, t)?, field(s - hs, t)?);
    let (ftp, ftm) = (field(s, t + ht)?, field(s, t - ht)?);
    let fpp = field(s + hs, t + ht)?;
    let fpm = field(s + hs, t - ht)?;
    let fmp = field(s - hs, t + ht)?;
    let fmm = field(s - hs, t - ht)?;
    let grad = Vector2::new((fsp - fsm) / (2.0 * hs), (ftp - ftm) / (2.0 * ht));
    let hss = (fsp - 2.0 * f0 + fsm) / (hs * hs);
    let htt = (ftp - 2.0 * f0 + ftm) / (ht * ht);
    let hst = (fpp - fpm - fmp + fmm) / (4.0 * hs * ht);
    Ok((f0, grad, Matrix2::new(hss, hst, hst, htt)))
}

/// Chart steps that move the surface point by `length` along each axis.
pub fn ambient_steps(pg: &PointGeometry, length: f64) -> [f64; 2] {
    [length / pg.jet.f_s.norm(), length / pg.jet.f_t.norm()]
}

fn check_critical(value: f64, grad: &Vector2<f64>, pg: &PointGeometry, cfg: &NumericsConfig) -> Result<()> {
    // gradient measured per unit ambient length
    let ambient = Vector2::new(grad[0] / pg.jet.f_s.norm(), grad[1] / pg.jet.f_t.norm()).norm();
    let tolerance = cfg.critical_tol * (1.0 + value.abs());
    if ambient > tolerance {
        return Err(Error::NotCritical { gradient: ambient, tolerance });
    }
    Ok(())
}

/// Matrix of the b-Hessian of `field` at the critical point `pg`, in chart
/// coordinates. Refuses non-critical points.
pub fn critical_hessian<F>(field: F, pg: &PointGeometry, cfg: &NumericsConfig) -> Result<Matrix2<f64>>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let (value, grad, hess) = chart_derivatives(field, pg.s, pg.t, ambient_steps(pg, cfg.fd_step))?;
    check_critical(value, &grad, pg, cfg)?;
    Ok(hess)
}

/// Second difference of `field` along the chart direction `z`, with a step
/// that moves the surface point by `length`.
fn directional_second<F>(field: &F, pg: &PointGeometry, z: &Vector2<f64>, length: f64, f0: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let speed = pg.ambient(z).norm();
    if speed == 0.0 {
        return Ok(0.0);
    }
    let eps = length / speed;
    let plus = field(pg.s + eps * z[0], pg.t + eps * z[1])?;
    let minus = field(pg.s - eps * z[0], pg.t - eps * z[1])?;
    Ok((plus - 2.0 * f0 + minus) / (eps * eps))
}

/// `hess_b field (X, Y)` at a critical point, from second differences along
/// `X ± Y`.
pub fn hess_b_at_critical<F>(
    field: F,
    pg: &PointGeometry,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    cfg: &NumericsConfig,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let steps = ambient_steps(pg, cfg.fd_step);
    let f0 = field(pg.s, pg.t)?;
    let grad = Vector2::new(
        (field(pg.s + steps[0], pg.t)? - field(pg.s - steps[0], pg.t)?) / (2.0 * steps[0]),
        (field(pg.s, pg.t + steps[1])? - field(pg.s, pg.t - steps[1])?) / (2.0 * steps[1]),
    );
    check_critical(f0, &grad, pg, cfg)?;
    let h = cfg.fd_step;
    if x == y {
        return directional_second(&field, pg, x, h, f0);
    }
    let plus = directional_second(&field, pg, &(x + y), h, f0)?;
    let minus = directional_second(&field, pg, &(x - y), h, f0)?;
    Ok(0.25 * (plus - minus))
}

/// Tangent-plane distance anchored at `pg`, as a function on the chart.
pub fn tangent_plane_field<'a>(surface: &'a SurfacePatch, pg: &'a PointGeometry) -> impl Fn(f64, f64) -> Result<f64> + 'a {
    move |s, t| tangent_plane_distance(pg, &surface.position(s, t)?)
}

/// `D_a(q) = F(q − a)`.
pub fn minkowski_distance(norm: &NormModel, a: &Vector3<f64>, q: &Vector3<f64>) -> f64 {
    norm.gauge(&(q - a))
}

/// `D_a` pulled back to the chart.
pub fn minkowski_distance_field<'a>(
    norm: &'a NormModel,
    surface: &'a SurfacePatch,
    a: Vector3<f64>,
) -> impl Fn(f64, f64) -> Result<f64> + 'a {
    move |s, t| Ok(minkowski_distance(norm, &a, &surface.position(s, t)?))
}

/// Whether `p − a` is Birkhoff orthogonal to the tangent plane, i.e.
/// `(p − a)/F(p − a) = ±η`.
pub fn is_critical(norm: &NormModel, pg: &PointGeometry, a: &Vector3<f64>, cfg: &NumericsConfig) -> bool {
    let v = pg.position() - a;
    let len = norm.gauge(&v);
    if !(len > 0.0) {
        return false;
    }
    let dir = v / len;
    (dir - pg.eta).norm().min((dir + pg.eta).norm()) <= cfg.critical_tol
}

/// Decomposes `p − a = ρη + V`.
pub fn affine_distance(pg: &PointGeometry, a: &Vector3<f64>) -> Result<AffineDistance> {
    if !(pg.pairing.abs() > 0.0) {
        return Err(Error::DegeneratePairing);
    }
    let offset = pg.position() - a;
    let rho = offset.dot(&pg.xi) / pg.pairing;
    let v_ambient = offset - pg.eta * rho;
    let v = pg.tangent_coords(&v_ambient);
    let residual = (offset - pg.eta * rho - pg.ambient(&v)).norm();
    Ok(AffineDistance { rho, v, v_ambient, residual })
}

/// Position, Euclidean normal and Birkhoff normal, without the curvature work.
fn transversal(
    norm: &NormModel,
    surface: &SurfacePatch,
    s: f64,
    t: f64,
    cfg: &NumericsConfig,
) -> Result<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
    let jet = surface.evaluate_jet(s, t)?;
    let xi = surface.euclidean_normal(&jet);
    let eta = norm.birkhoff_point(&xi, cfg)?;
    let eta = if eta.dot(&xi) < 0.0 { -eta } else { eta };
    Ok((jet.f, xi, eta))
}

/// `Δρ` at `(s, t)` by differentiating `grad_h ρ = −V` along `f_s`, `f_t` and
/// keeping the tangential part of the Gauss splitting.
pub fn nabla_laplacian_rho(
    norm: &NormModel,
    surface: &SurfacePatch,
    s: f64,
    t: f64,
    a: &Vector3<f64>,
    cfg: &NumericsConfig,
) -> Result<LaplacianSample> {
    let pg = point_geometry(norm, surface, s, t, cfg)?;
    let det_h = pg.h_mat.determinant();
    if !(det_h.abs() > 1e-10 * pg.h_mat.norm_squared().max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateH);
    }
    let frame = Matrix3::from_columns(&[pg.jet.f_s, pg.jet.f_t, pg.eta]);
    let condition = condition_number(&frame);
    if !(condition <= cfg.cond_guard) {
        return Err(Error::IllConditioned { condition });
    }
    let lu = frame.lu();

    // −V = ρη − (p − a)
    let gradient_field = |s: f64, t: f64| -> Result<Vector3<f64>> {
        let (p, xi, eta) = transversal(norm, surface, s, t, cfg)?;
        let offset = p - a;
        let rho = offset.dot(&xi) / eta.dot(&xi);
        Ok(eta * rho - offset)
    };

    let h = cfg.fd_step;
    let center = affine_distance(&pg, a)?;
    let x_coords = center.grad_h_rho();
    let derivatives = [
        (gradient_field(s + h, t)? - gradient_field(s - h, t)?) / (2.0 * h),
        (gradient_field(s, t + h)? - gradient_field(s, t - h)?) / (2.0 * h),
    ];
    let mut laplacian = 0.0;
    let mut splitting_defect: f64 = 0.0;
    for (i, d) in derivatives.iter().enumerate() {
        let split = lu.solve(d).ok_or(Error::IllConditioned { condition })?;
        laplacian += split[i];
        let e = if i == 0 { Vector2::x() } else { Vector2::y() };
        splitting_defect = splitting_defect.max((split[2] - pg.h(&e, &x_coords)).abs());
    }
    Ok(LaplacianSample {
        laplacian,
        rho: center.rho,
        mean: pg.mean,
        identity_residual: laplacian - 2.0 * (pg.mean * center.rho - 1.0),
        splitting_defect,
    })
}

/// Spread of `ρ` and largest `|λ₁ − λ₂|` over `points`.
pub fn sphere_characterization_check(
    norm: &NormModel,
    surface: &SurfacePatch,
    a: &Vector3<f64>,
    points: &[(f64, f64)],
    cfg: &NumericsConfig,
) -> Result<SphereCharacterization> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no sample points".into()));
    }
    let mut out = SphereCharacterization {
        rho_min: f64::INFINITY,
        rho_max: f64::NEG_INFINITY,
        rho_spread: 0.0,
        max_umbilic_defect: 0.0,
        n_points: points.len(),
    };
    for &(s, t) in points {
        let pg = point_geometry(norm, surface, s, t, cfg)?;
        let rho = affine_distance(&pg, a)?.rho;
        out.rho_min = out.rho_min.min(rho);
        out.rho_max = out.rho_max.max(rho);
        out.max_umbilic_defect = out.max_umbilic_defect.max((pg.lambda2 - pg.lambda1).abs());
    }
    out.rho_spread = out.rho_max - out.rho_min;
    Ok(out)
}

/// `hess D_a (X, X)` at `pg` with centre `a = p − t·η(p)`. The step shrinks
/// with `t` so the stencil stays small against the distance to `a`.
pub fn focal_hessian(
    norm: &NormModel,
    surface: &SurfacePatch,
    pg: &PointGeometry,
    x: &Vector2<f64>,
    offset: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    let a = pg.position() - pg.eta * offset;
    let scaled = NumericsConfig { fd_step: cfg.fd_step * offset.abs().min(1.0), ..*cfg };
    hess_b_at_critical(minkowski_distance_field(norm, surface, a), pg, x, x, &scaled)
}

/// Locates the offset `t` in `bracket` where `hess D_a (X, X)` changes sign,
/// by bisection to relative width `rel_tol`.
pub fn locate_focal_offset(
    norm: &NormModel,
    surface: &SurfacePatch,
    pg: &PointGeometry,
    x: &Vector2<f64>,
    bracket: (f64, f64),
    rel_tol: f64,
    cfg: &NumericsConfig,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter("focal bracket must satisfy 0 < lo < hi".into()));
    }
    let eval = |t: f64| focal_hessian(norm, surface, pg, x, t, cfg);
    let f_lo = eval(lo)?;
    if f_lo * eval(hi)? > 0.0 {
        return Err(Error::InvalidParameter("focal bracket does not contain a sign change".into()));
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? * f_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{catenoid, ellipsoid, euclidean_sphere, minkowski_sphere};
    use approx::assert_relative_eq;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    fn lp_ellipsoid() -> (NormModel, SurfacePatch) {
        (NormModel::lp(4.0).unwrap(), ellipsoid(1.0, 1.3, 0.8).unwrap())
    }

    #[test]
    fn tangent_plane_distance_trivial_cases() {
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        let p = pg.position();
        assert_eq!(tangent_plane_distance(&pg, &p).unwrap(), 0.0);
        assert_relative_eq!(tangent_plane_distance(&pg, &(p - pg.eta * 0.3)).unwrap(), 0.3, max_relative = 1e-12);
        let q = p + pg.jet.f_s * 0.2 - pg.jet.f_t * 0.5;
        assert!(tangent_plane_distance(&pg, &q).unwrap().abs() < 1e-14);
    }

    #[test]
    fn hessian_of_constant_is_zero() {
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        let v = hess_b_at_critical(|_, _| Ok(2.5), &pg, &Vector2::x(), &Vector2::y(), &cfg()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn non_critical_field_is_refused() {
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        let r = hess_b_at_critical(|s, _| Ok(s), &pg, &Vector2::x(), &Vector2::x(), &cfg());
        assert!(matches!(r, Err(Error::NotCritical { .. })));
    }

    #[test]
    fn tangent_plane_hessian_is_minus_h() {
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        let hess = critical_hessian(tangent_plane_field(&surf, &pg), &pg, &cfg()).unwrap();
        assert!((hess + pg.h_mat).norm() <= 1e-4 * pg.h_mat.norm());
    }

    #[test]
    fn minkowski_distance_criticality() {
        let sphere = euclidean_sphere(2.0, Vector3::new(0.5, 0.0, -1.0)).unwrap();
        let norm = NormModel::euclidean();
        let center = Vector3::new(0.5, 0.0, -1.0);
        for (s, t) in [(0.3, 0.1), (1.2, 4.0), (2.5, 2.0)] {
            let pg = point_geometry(&norm, &sphere, s, t, &cfg()).unwrap();
            assert!(is_critical(&norm, &pg, &center, &cfg()));
            assert_relative_eq!(minkowski_distance(&norm, &center, &pg.position()), 2.0, max_relative = 1e-14);
        }
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        let a = pg.position() - pg.eta * 0.6;
        assert!(is_critical(&norm, &pg, &a, &cfg()));
        assert_relative_eq!(minkowski_distance(&norm, &a, &pg.position()), 0.6, max_relative = 1e-12);
        let off = a + Vector3::new(0.1, -0.2, 0.05);
        assert!(!is_critical(&norm, &pg, &off, &cfg()));
        let (_, grad, _) = chart_derivatives(minkowski_distance_field(&norm, &surf, off), 0.7, 0.4, [1e-5; 2]).unwrap();
        assert!(grad.norm() > 1e-3);
    }

    #[test]
    fn affine_distance_examples() {
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        let d = affine_distance(&pg, &pg.position()).unwrap();
        assert_eq!(d.rho, 0.0);
        assert!(d.v.norm() < 1e-15);
        let sphere = euclidean_sphere(1.0, Vector3::zeros()).unwrap();
        let pg = point_geometry(&NormModel::euclidean(), &sphere, 1.1, 0.3, &cfg()).unwrap();
        let d = affine_distance(&pg, &Vector3::zeros()).unwrap();
        assert_relative_eq!(d.rho, 1.0, max_relative = 1e-14);
        assert!(d.v.norm() < 1e-14 && d.residual < 1e-14);
    }

    #[test]
    fn affine_distance_on_minkowski_sphere_is_radius() {
        let norm = NormModel::lp(4.0).unwrap();
        let center = Vector3::new(0.2, -0.1, 0.4);
        let sphere = minkowski_sphere(norm.clone(), 2.0, center, cfg()).unwrap();
        let points = sphere.grid(8, 6, [0.2, 0.0]).unwrap();
        let check = sphere_characterization_check(&norm, &sphere, &center, &points, &cfg()).unwrap();
        assert!(check.rho_spread < 1e-10);
        assert_relative_eq!(check.rho_max, 2.0, max_relative = 1e-10);
        assert!(check.max_umbilic_defect < 1e-8);
        let shifted = sphere_characterization_check(&norm, &sphere, &(center + Vector3::new(0.3, 0.0, 0.0)), &points, &cfg()).unwrap();
        assert!(shifted.rho_spread > 0.1);
    }

    #[test]
    fn laplacian_on_unit_sphere_vanishes() {
        let sphere = euclidean_sphere(1.0, Vector3::zeros()).unwrap();
        let sample = nabla_laplacian_rho(&NormModel::euclidean(), &sphere, 1.0, 0.5, &Vector3::zeros(), &cfg()).unwrap();
        assert!(sample.laplacian.abs() < 1e-5);
        assert!(sample.splitting_defect < 1e-5);
    }

    #[test]
    fn laplacian_identity_on_lp_ellipsoid() {
        let (norm, surf) = lp_ellipsoid();
        let a = Vector3::new(0.1, 0.2, -0.1);
        let sample = nabla_laplacian_rho(&norm, &surf, 0.9, 2.2, &a, &cfg()).unwrap();
        assert!(sample.identity_residual.abs() < 5e-3, "{sample:?}");
        assert!(sample.splitting_defect < 1e-4);
    }

    #[test]
    fn catenoid_laplacian_is_minus_two() {
        let surf = catenoid(1.0, 1.0).unwrap();
        let sample = nabla_laplacian_rho(&NormModel::euclidean(), &surf, 0.3, 1.0, &Vector3::new(0.4, -0.3, 0.2), &cfg()).unwrap();
        assert!(sample.mean.abs() < 1e-10);
        assert!((sample.laplacian + 2.0).abs() < 5e-3);
    }

    #[test]
    fn focal_offset_is_inverse_normal_curvature() {
        let (norm, surf) = lp_ellipsoid();
        let pg = point_geometry(&norm, &surf, 0.7, 0.4, &cfg()).unwrap();
        for x in [pg.v1, pg.v2, Vector2::new(0.4, 1.0)] {
            let k = pg.normal_curvature(&x).unwrap();
            let t = locate_focal_offset(&norm, &surf, &pg, &x, (0.2 / k, 5.0 / k), 1e-7, &cfg()).unwrap();
            assert_relative_eq!(t, 1.0 / k, max_relative = 1e-4);
        }
    }
}
