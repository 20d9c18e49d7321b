//! Volume forms, the Blaschke condition and affine normals.
//!
//! With transversal `η`, the induced volume is `ω(X, Y) = det[X, Y, η]` and the
//! h-volume is `ω_h = |det h|^{1/2}`; the immersion is Blaschke when they
//! agree. The Euclidean affine normal of an ovaloid is `K^{1/4}ξ + Z`, with `K`
//! the Euclidean Gaussian curvature and `Z` tangent.

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::point_geometry;
use crate::norms::NormModel;
use crate::numerics::{spectral_derivatives, NumericsConfig};
use crate::surfaces::SurfacePatch;

/// Volume forms and affine-normal comparison at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlaschkeSample {
    pub omega: f64,
    pub omega_h: f64,
    /// `|ω| − ω_h`.
    pub residual: f64,
    /// `|ω| / ω_h`, independent of the tangent basis.
    pub ratio: f64,
    pub affine_normal: Option<Vector3<f64>>,
    /// `|η − affine normal|`.
    pub discrepancy: Option<f64>,
    /// Angle between `η` and the affine normal, radians.
    pub angle: Option<f64>,
}

/// `|det h|^{1/2}` below this relative level is treated as rank-deficient.
const DEGENERATE_H: f64 = 1e-12;

/// `ω`, `ω_h` and their comparison with transversal `η`, plus the affine normal
/// when the point is elliptic in the Euclidean sense.
pub fn blaschke_residual(
    norm: &NormModel,
    surface: &SurfacePatch,
    s: f64,
    t: f64,
    cfg: &NumericsConfig,
) -> Result<BlaschkeSample> {
    let pg = point_geometry(norm, surface, s, t, cfg)?;
    let omega = Matrix3::from_columns(&[pg.jet.f_s, pg.jet.f_t, pg.eta]).determinant();
    let det_h = pg.h_mat.determinant();
    if !(det_h.abs() > DEGENERATE_H * pg.h_mat.norm_squared().max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateH);
    }
    let omega_h = det_h.abs().sqrt();
    let (affine_normal, discrepancy, angle) = match affine_normal(surface, s, t, cfg) {
        Ok(n) => {
            let angle = (pg.eta.dot(&n) / (pg.eta.norm() * n.norm())).clamp(-1.0, 1.0).acos();
            (Some(n), Some((pg.eta - n).norm()), Some(angle))
        }
        Err(Error::NonElliptic { .. }) => (None, None, None),
        Err(e) => return Err(e),
    };
    Ok(BlaschkeSample {
        omega,
        omega_h,
        residual: omega.abs() - omega_h,
        ratio: omega.abs() / omega_h,
        affine_normal,
        discrepancy,
        angle,
    })
}

/// Euclidean Gaussian curvature `det II / det I`.
pub fn euclidean_gaussian(surface: &SurfacePatch, s: f64, t: f64) -> Result<f64> {
    let (first, second) = euclidean_forms(surface, s, t)?;
    Ok(second.determinant() / first.determinant())
}

fn euclidean_forms(surface: &SurfacePatch, s: f64, t: f64) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let jet = surface.evaluate_jet(s, t)?;
    let xi = surface.euclidean_normal(&jet);
    let frame = Matrix3x2::from_columns(&[jet.f_s, jet.f_t]);
    let second = Matrix2::from_fn(|i, j| jet.second(i, j).dot(&xi));
    Ok((frame.transpose() * frame, 0.5 * (second + second.transpose())))
}

/// Affine normal `K^{1/4}ξ + Z`, where the tangent field `Z` satisfies
/// `II(Z, X) = −X(K^{1/4})` for the Euclidean second fundamental form `II`
/// of the transversal `ξ`.
pub fn affine_normal(surface: &SurfacePatch, s: f64, t: f64, cfg: &NumericsConfig) -> Result<Vector3<f64>> {
    let jet = surface.evaluate_jet(s, t)?;
    let xi = surface.euclidean_normal(&jet);
    let (first, second) = euclidean_forms(surface, s, t)?;
    let gaussian = second.determinant() / first.determinant();
    if !(gaussian > 0.0) {
        return Err(Error::NonElliptic { gaussian });
    }
    let root = |s: f64, t: f64| -> Result<f64> {
        let k = euclidean_gaussian(surface, s, t)?;
        if !(k > 0.0) {
            return Err(Error::NonElliptic { gaussian: k });
        }
        Ok(k.powf(0.25))
    };
    let h = cfg.fd_step;
    let grad = Vector2::new(
        (root(s + h, t)? - root(s - h, t)?) / (2.0 * h),
        (root(s, t + h)? - root(s, t - h)?) / (2.0 * h),
    );
    let z = second.try_inverse().ok_or(Error::DegenerateH)? * (-grad);
    Ok(xi * gaussian.powf(0.25) + jet.f_s * z[0] + jet.f_t * z[1])
}

/// Planar Blaschke and Ermakov–Pinney residual fields for a support function.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarReport {
    pub theta: Vec<f64>,
    /// `k_e − g³` with `k_e = 1/(g″ + g)`.
    pub blaschke: Vec<f64>,
    /// `g″ + g − g⁻³`.
    pub ermakov: Vec<f64>,
    pub sup_blaschke: f64,
    pub sup_ermakov: f64,
}

/// Residuals from analytic `(g, g″)` on a uniform grid of `nodes` angles.
pub fn planar_support_check<F>(support: F, nodes: usize) -> Result<PlanarReport>
where
    F: Fn(f64) -> (f64, f64),
{
    if nodes < 4 {
        return Err(Error::InvalidParameter("need at least 4 support samples".into()));
    }
    let theta = uniform_angles(nodes);
    let (g, g2): (Vec<f64>, Vec<f64>) = theta.iter().map(|&a| support(a)).unzip();
    planar_residuals(theta, &g, &g2)
}

/// Residuals from support samples on a uniform grid over `[0, 2π)`, with
/// spectral differentiation.
pub fn planar_support_check_samples(samples: &[f64]) -> Result<PlanarReport> {
    if samples.len() < 4 {
        return Err(Error::InvalidParameter("need at least 4 support samples".into()));
    }
    let (_, g2) = spectral_derivatives(samples)?;
    planar_residuals(uniform_angles(samples.len()), samples, &g2)
}

fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect()
}

fn planar_residuals(theta: Vec<f64>, g: &[f64], g2: &[f64]) -> Result<PlanarReport> {
    let mut blaschke = Vec::with_capacity(g.len());
    let mut ermakov = Vec::with_capacity(g.len());
    for ((&a, &gv), &gpp) in theta.iter().zip(g).zip(g2) {
        if !(gv > 0.0) {
            return Err(Error::InvalidParameter(format!("support function must be positive, got {gv} at θ = {a}")));
        }
        let radius = gpp + gv;
        if !(radius > 0.0) {
            return Err(Error::NonConvexCurve { theta: a });
        }
        blaschke.push(1.0 / radius - gv.powi(3));
        ermakov.push(radius - gv.powi(-3));
    }
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(PlanarReport {
        sup_blaschke: sup(&blaschke),
        sup_ermakov: sup(&ermakov),
        theta,
        blaschke,
        ermakov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{ellipsoid, euclidean_sphere, minkowski_sphere};
    use approx::assert_relative_eq;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    #[test]
    fn unit_sphere_is_blaschke() {
        let sphere = euclidean_sphere(1.0, Vector3::zeros()).unwrap();
        for (s, t) in [(0.4, 0.1), (1.5, 3.0), (2.6, 5.5)] {
            let sample = blaschke_residual(&NormModel::euclidean(), &sphere, s, t, &cfg()).unwrap();
            assert_relative_eq!(sample.ratio, 1.0, epsilon = 1e-12);
            assert!(sample.discrepancy.unwrap() < 1e-8);
            let p = sphere.position(s, t).unwrap();
            assert!((sample.affine_normal.unwrap() - p).norm() < 1e-8);
        }
    }

    #[test]
    fn sphere_ratio_equals_radius() {
        for r in [0.5, 2.0, 3.0] {
            let sphere = euclidean_sphere(r, Vector3::zeros()).unwrap();
            let sample = blaschke_residual(&NormModel::euclidean(), &sphere, 1.0, 2.0, &cfg()).unwrap();
            assert_relative_eq!(sample.ratio, r, max_relative = 1e-12);
        }
    }

    #[test]
    fn ellipsoid_affine_normal_is_radial() {
        let surf = ellipsoid(1.0, 1.3, 0.8).unwrap();
        for (s, t) in [(0.7, 0.4), (1.9, 2.5), (1.2, 4.4)] {
            let n = affine_normal(&surf, s, t, &cfg()).unwrap();
            let p = surf.position(s, t).unwrap();
            assert!(n.cross(&p).norm() < 1e-6 * n.norm() * p.norm(), "{n} vs {p}");
            assert!(n.dot(&p) > 0.0);
        }
    }

    #[test]
    fn hyperbolic_points_have_no_affine_normal() {
        let surf = crate::surfaces::catenoid(1.0, 1.0).unwrap();
        assert!(matches!(affine_normal(&surf, 0.2, 0.3, &cfg()), Err(Error::NonElliptic { .. })));
    }

    #[test]
    fn lp_unit_sphere_is_not_blaschke() {
        let norm = NormModel::lp(4.0).unwrap();
        let sphere = minkowski_sphere(norm.clone(), 1.0, Vector3::zeros(), cfg()).unwrap();
        let sample = blaschke_residual(&norm, &sphere, 0.8, 0.3, &cfg()).unwrap();
        assert!((sample.ratio - 1.0).abs() > 1e-2);
        assert!(sample.discrepancy.unwrap() > 1e-2);
    }

    #[test]
    fn planar_examples() {
        let unit = planar_support_check(|_| (1.0, 0.0), 64).unwrap();
        assert_eq!(unit.sup_blaschke, 0.0);
        assert_eq!(unit.sup_ermakov, 0.0);
        let c: f64 = 1.5;
        let circle = planar_support_check(|_| (c, 0.0), 16).unwrap();
        assert_relative_eq!(circle.sup_ermakov, c - c.powi(-3), max_relative = 1e-14);
        let samples = vec![1.0; 32];
        let spectral = planar_support_check_samples(&samples).unwrap();
        assert!(spectral.sup_ermakov < 1e-12);
    }

    #[test]
    fn planar_rejects_non_convex_support() {
        let r = planar_support_check(|a| (1.0 + 0.5 * (2.0 * a).cos(), -2.0 * (2.0 * a).cos()), 64);
        assert!(matches!(r, Err(Error::NonConvexCurve { .. })));
    }
}
