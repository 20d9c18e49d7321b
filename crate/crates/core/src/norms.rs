//! Admissible norms on ℝ³, described by the gauge `F` (the norm itself) and
//! its support function `h_B` (the dual norm).
//!
//! The gradient of `h_B` at a Euclidean unit vector `ξ` is the point of the
//! unit sphere `∂B` whose outer Euclidean normal is `ξ`; this map is `u`, and
//! its differential `du` is the Hessian of `h_B` restricted to `ξ^⊥`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::numerics::{sym_eigen_2x2, NumericsConfig};

/// Value, gradient and Hessian of a scalar function on ℝ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

/// Third derivative tensor; `t[k][(i, j)] = ∂ᵢ∂ⱼ∂ₖ f`.
pub type ThirdDerivative = [Matrix3<f64>; 3];

/// Contracts a third-derivative tensor with two vectors, `Σⱼₖ tᵢⱼₖ aⱼ bₖ`.
pub fn contract_third(t: &ThirdDerivative, a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    t[0] * a * b[0] + t[1] * a * b[1] + t[2] * a * b[2]
}

/// How gradients and Hessians are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetSource {
    Analytic,
    /// Central differences of values, with step relative to `|x|₂`.
    FiniteDifference { step: f64 },
}

pub type JetFn = Arc<dyn Fn(&Vector3<f64>) -> Result<ScalarJet> + Send + Sync>;

/// A user-supplied gauge, optionally with its support function.
#[derive(Clone)]
pub struct CustomNorm {
    pub gauge: JetFn,
    pub dual: Option<JetFn>,
    /// Solve for Birkhoff points by Newton iteration when `dual` is absent.
    pub newton_fallback: bool,
}

#[derive(Clone)]
pub enum NormFamily {
    Euclidean,
    /// `‖x‖ = √(xᵀAx)` for symmetric positive definite `A`.
    Ellipsoid { matrix: Matrix3<f64>, inverse: Matrix3<f64> },
    /// ℓᵖ norm with `1 < p < ∞`; `axis_guard` keeps derivative evaluations
    /// away from coordinate planes, where the jets degenerate.
    Lp { p: f64, axis_guard: f64 },
    Custom(CustomNorm),
}

impl fmt::Debug for NormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormFamily::Euclidean => write!(f, "Euclidean"),
            NormFamily::Ellipsoid { matrix, .. } => f.debug_struct("Ellipsoid").field("matrix", matrix).finish(),
            NormFamily::Lp { p, axis_guard } => {
                f.debug_struct("Lp").field("p", p).field("axis_guard", axis_guard).finish()
            }
            NormFamily::Custom(c) => f
                .debug_struct("Custom")
                .field("has_dual", &c.dual.is_some())
                .field("newton_fallback", &c.newton_fallback)
                .finish(),
        }
    }
}

/// An admissible norm. Immutable once built.
#[derive(Debug, Clone)]
pub struct NormModel {
    family: NormFamily,
    jet_source: JetSource,
}

impl NormModel {
    pub fn euclidean() -> Self {
        NormModel { family: NormFamily::Euclidean, jet_source: JetSource::Analytic }
    }

    pub fn ellipsoid(matrix: Matrix3<f64>) -> Result<Self> {
        let asym = (matrix - matrix.transpose()).norm();
        if asym > 1e-12 * matrix.norm() {
            return Err(Error::InvalidParameter("ellipsoid matrix must be symmetric".into()));
        }
        if matrix.cholesky().is_none() {
            return Err(Error::InvalidParameter("ellipsoid matrix must be positive definite".into()));
        }
        let inverse = matrix
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("ellipsoid matrix is singular".into()))?;
        Ok(NormModel {
            family: NormFamily::Ellipsoid { matrix, inverse: 0.5 * (inverse + inverse.transpose()) },
            jet_source: JetSource::Analytic,
        })
    }

    pub fn lp(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("lp norm needs 1 < p < inf, got {p}")));
        }
        Ok(NormModel { family: NormFamily::Lp { p, axis_guard: 1e-8 }, jet_source: JetSource::Analytic })
    }

    pub fn custom(gauge: JetFn, dual: Option<JetFn>) -> Self {
        NormModel {
            family: NormFamily::Custom(CustomNorm { gauge, dual, newton_fallback: true }),
            jet_source: JetSource::Analytic,
        }
    }

    pub fn with_jet_source(mut self, jet_source: JetSource) -> Self {
        self.jet_source = jet_source;
        self
    }

    /// Overrides the coordinate-plane guard of an ℓᵖ norm; no effect otherwise.
    pub fn with_axis_guard(mut self, guard: f64) -> Self {
        if let NormFamily::Lp { axis_guard, .. } = &mut self.family {
            *axis_guard = guard;
        }
        self
    }

    pub fn without_newton_fallback(mut self) -> Self {
        if let NormFamily::Custom(c) = &mut self.family {
            c.newton_fallback = false;
        }
        self
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn jet_source(&self) -> JetSource {
        self.jet_source
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.family, NormFamily::Euclidean)
    }

    /// Whether the unit normal `ξ` lies within the coordinate-plane guard of an
    /// ℓᵖ norm with `p ≠ 2`, where the unit sphere's curvature degenerates and
    /// jets are evaluated at a clamped point. The band is twice the clamp floor
    /// so that normals recovered from clamped jets are caught as well.
    pub fn axis_guarded(&self, xi: &Vector3<f64>) -> bool {
        match &self.family {
            NormFamily::Lp { p, axis_guard } if *p != 2.0 => {
                let n = xi.norm();
                xi.iter().any(|c| c.abs() <= 2.0 * axis_guard * n)
            }
            _ => false,
        }
    }

    /// `F(x) = ‖x‖`.
    pub fn gauge(&self, x: &Vector3<f64>) -> f64 {
        if x.norm() == 0.0 {
            return 0.0;
        }
        match &self.family {
            NormFamily::Euclidean => x.norm(),
            NormFamily::Ellipsoid { matrix, .. } => quadratic_value(matrix, x),
            NormFamily::Lp { p, .. } => power_sum_value(x, *p),
            NormFamily::Custom(c) => (c.gauge)(x).map(|j| j.value).unwrap_or(f64::NAN),
        }
    }

    /// Value, gradient and Hessian of the gauge.
    pub fn gauge_jet(&self, x: &Vector3<f64>) -> Result<ScalarJet> {
        if x.norm() == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        match self.jet_source {
            JetSource::FiniteDifference { step } => fd_jet(|y| Ok(self.gauge(y)), x, step),
            JetSource::Analytic => match &self.family {
                NormFamily::Euclidean => Ok(quadratic_jet(&Matrix3::identity(), x).0),
                NormFamily::Ellipsoid { matrix, .. } => Ok(quadratic_jet(matrix, x).0),
                NormFamily::Lp { p, axis_guard } => Ok(power_sum_jet(x, *p, *axis_guard).0),
                NormFamily::Custom(c) => (c.gauge)(x),
            },
        }
    }

    /// `h_B(ξ) = max{⟨x, ξ⟩ : F(x) ≤ 1}`.
    pub fn dual_support(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<f64> {
        if xi.norm() == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        match &self.family {
            NormFamily::Euclidean => Ok(xi.norm()),
            NormFamily::Ellipsoid { inverse, .. } => Ok(quadratic_value(inverse, xi)),
            NormFamily::Lp { p, .. } => Ok(power_sum_value(xi, dual_exponent(*p))),
            NormFamily::Custom(c) => match &c.dual {
                Some(dual) => dual(xi).map(|j| j.value),
                None => {
                    let x = self.newton_birkhoff(&xi.normalize(), cfg)?;
                    Ok(x.dot(xi))
                }
            },
        }
    }

    /// Value, gradient and Hessian of the support function.
    pub fn dual_jet(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<ScalarJet> {
        if xi.norm() == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        if let JetSource::FiniteDifference { step } = self.jet_source {
            return fd_jet(|y| self.dual_support(y, cfg), xi, step);
        }
        match &self.family {
            NormFamily::Euclidean => Ok(quadratic_jet(&Matrix3::identity(), xi).0),
            NormFamily::Ellipsoid { inverse, .. } => Ok(quadratic_jet(inverse, xi).0),
            NormFamily::Lp { p, axis_guard } => Ok(power_sum_jet(xi, dual_exponent(*p), *axis_guard).0),
            NormFamily::Custom(c) => match &c.dual {
                Some(dual) => dual(xi),
                None => self.newton_dual_jet(xi, cfg),
            },
        }
    }

    /// Third derivative of the support function. Analytic for the built-in
    /// families; otherwise central differences of the Hessian.
    pub fn dual_third(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<ThirdDerivative> {
        if xi.norm() == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        if self.jet_source == JetSource::Analytic {
            match &self.family {
                NormFamily::Euclidean => return Ok(quadratic_jet(&Matrix3::identity(), xi).1),
                NormFamily::Ellipsoid { inverse, .. } => return Ok(quadratic_jet(inverse, xi).1),
                NormFamily::Lp { p, axis_guard } => {
                    return Ok(power_sum_jet(xi, dual_exponent(*p), *axis_guard).1)
                }
                NormFamily::Custom(_) => {}
            }
        }
        // an FD Hessian carries noise of order eps/step², so the outer step balances
        // that against the truncation error
        let rel = match self.jet_source {
            JetSource::Analytic => 1e-4,
            JetSource::FiniteDifference { step } => (f64::EPSILON / (step * step)).cbrt().clamp(1e-4, 5e-2),
        };
        let h = rel * xi.norm();
        let mut t = [Matrix3::zeros(); 3];
        for (k, slot) in t.iter_mut().enumerate() {
            let e = Vector3::ith(k, h);
            let plus = self.dual_jet(&(xi + e), cfg)?.hessian;
            let minus = self.dual_jet(&(xi - e), cfg)?.hessian;
            *slot = (plus - minus) / (2.0 * h);
        }
        Ok(t)
    }

    /// The map `u`: the point of `∂B` whose outer Euclidean normal is `ξ`.
    /// Only the direction of `ξ` matters.
    pub fn birkhoff_point(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<Vector3<f64>> {
        let n = xi.norm();
        if n == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        let unit = xi / n;
        if let NormFamily::Custom(c) = &self.family {
            if c.dual.is_none() && self.jet_source == JetSource::Analytic {
                return self.newton_birkhoff(&unit, cfg);
            }
        }
        Ok(self.dual_jet(&unit, cfg)?.gradient)
    }

    /// Euclidean unit outer normal of `∂B` at `η` (the map `u⁻¹`).
    pub fn euclidean_normal(&self, eta: &Vector3<f64>) -> Result<Vector3<f64>> {
        let g = self.gauge_jet(eta)?.gradient;
        let n = g.norm();
        if n == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        Ok(g / n)
    }

    /// `du` at the unit vector `ξ`: the Hessian of `h_B` restricted to `ξ^⊥`,
    /// returned as a 3×3 operator that annihilates `ξ`.
    pub fn gauss_differential(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<Matrix3<f64>> {
        let (frame, restricted) = self.restricted_dual_hessian(xi, cfg)?;
        Ok(frame * restricted * frame.transpose())
    }

    /// `du⁻¹` at the unit vector `ξ`, as a 3×3 operator on `ξ^⊥` that annihilates `ξ`.
    pub fn dupin_operator(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<Matrix3<f64>> {
        let (frame, restricted) = self.restricted_dual_hessian(xi, cfg)?;
        let eig = sym_eigen_2x2(&restricted);
        let (lo, hi) = (eig.values[0], eig.values[1]);
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= cfg.cond_guard) {
            return Err(Error::SingularRestriction { condition });
        }
        let inverse = restricted.try_inverse().ok_or(Error::SingularRestriction { condition })?;
        Ok(frame * inverse * frame.transpose())
    }

    /// Dupin inner product `⟨du⁻¹_η X, Y⟩` for `X, Y` tangent to `∂B` at `η`.
    pub fn dupin_form(
        &self,
        eta: &Vector3<f64>,
        x: &Vector3<f64>,
        y: &Vector3<f64>,
        cfg: &NumericsConfig,
    ) -> Result<f64> {
        let xi = self.euclidean_normal(eta)?;
        let op = self.dupin_operator(&xi, cfg)?;
        Ok((op * x).dot(y))
    }

    fn restricted_dual_hessian(
        &self,
        xi: &Vector3<f64>,
        cfg: &NumericsConfig,
    ) -> Result<(nalgebra::Matrix3x2<f64>, Matrix2<f64>)> {
        let n = xi.norm();
        if n == 0.0 {
            return Err(Error::NonSmoothPoint);
        }
        let unit = xi / n;
        let hess = self.dual_jet(&unit, cfg)?.hessian;
        let frame = orthonormal_complement(&unit);
        let restricted = frame.transpose() * hess * frame;
        Ok((frame, 0.5 * (restricted + restricted.transpose())))
    }

    /// Projected Newton iteration on `∇F(x) = μξ`, `F(x) = 1`, seeded at `ξ/F(ξ)`.
    fn newton_birkhoff(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<Vector3<f64>> {
        if let NormFamily::Custom(c) = &self.family {
            if !c.newton_fallback {
                return Err(Error::MissingDualJets);
            }
        }
        let unit = xi.normalize();
        let mut x = unit / self.gauge(&unit);
        let mut mu = self.gauge(&unit);
        let residual = |x: &Vector3<f64>, mu: f64| -> Result<(Vector4<f64>, ScalarJet)> {
            let jet = self.gauge_jet(x)?;
            let r = jet.gradient - unit * mu;
            Ok((Vector4::new(r.x, r.y, r.z, jet.value - 1.0), jet))
        };
        let (mut r, mut jet) = residual(&x, mu)?;
        for _ in 0..cfg.newton_max_iter {
            if r.norm() <= cfg.newton_tol {
                break;
            }
            let mut jac = Matrix4::zeros();
            jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&jet.hessian);
            jac.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-unit));
            jac.fixed_view_mut::<1, 3>(3, 0).copy_from(&jet.gradient.transpose());
            let delta = jac.lu().solve(&(-r)).ok_or(Error::NewtonDivergence {
                iterations: cfg.newton_max_iter,
                residual: r.norm(),
            })?;
            let mut scale = 1.0;
            loop {
                let trial_x = x + delta.fixed_rows::<3>(0) * scale;
                let trial_mu = mu + delta[3] * scale;
                if let Ok((trial_r, trial_jet)) = residual(&trial_x, trial_mu) {
                    if trial_r.norm() < r.norm() || scale < 1e-4 {
                        x = trial_x;
                        mu = trial_mu;
                        r = trial_r;
                        jet = trial_jet;
                        break;
                    }
                }
                scale *= 0.5;
                if scale < 1e-6 {
                    return Err(Error::NewtonDivergence { iterations: cfg.newton_max_iter, residual: r.norm() });
                }
            }
        }
        if r.norm() > cfg.newton_tol || mu <= 0.0 {
            return Err(Error::NewtonDivergence { iterations: cfg.newton_max_iter, residual: r.norm() });
        }
        Ok(x)
    }

    /// Support-function jet of a custom gauge without dual jets. Uses
    /// `(Hess F + ∇F∇Fᵀ) · Hess h_B = (I − ξ xᵀ / h_B) / h_B` at `x = u(ξ)`.
    fn newton_dual_jet(&self, xi: &Vector3<f64>, cfg: &NumericsConfig) -> Result<ScalarJet> {
        let x = self.newton_birkhoff(xi, cfg)?;
        let value = x.dot(xi);
        let gauge = self.gauge_jet(&x)?;
        let bordered = gauge.hessian + gauge.gradient * gauge.gradient.transpose();
        let rhs = (Matrix3::identity() - xi * x.transpose() / value) / value;
        let hessian = bordered
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularRestriction { condition: f64::INFINITY })?;
        Ok(ScalarJet { value, gradient: x, hessian: 0.5 * (hessian + hessian.transpose()) })
    }
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`, as columns.
pub fn orthonormal_complement(n: &Vector3<f64>) -> nalgebra::Matrix3x2<f64> {
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = n.cross(&axis).normalize();
    let e2 = n.cross(&e1);
    nalgebra::Matrix3x2::from_columns(&[e1, e2])
}

fn dual_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

fn quadratic_value(m: &Matrix3<f64>, x: &Vector3<f64>) -> f64 {
    x.dot(&(m * x)).sqrt()
}

/// Jets of `√(xᵀMx)` up to third order.
fn quadratic_jet(m: &Matrix3<f64>, x: &Vector3<f64>) -> (ScalarJet, ThirdDerivative) {
    let y = m * x;
    let g = x.dot(&y).sqrt();
    let gradient = y / g;
    let hessian = m / g - y * y.transpose() / g.powi(3);
    let mut third = [Matrix3::zeros(); 3];
    for (k, slot) in third.iter_mut().enumerate() {
        let mk = m.column(k).into_owned();
        *slot = -m * y[k] / g.powi(3) - (mk * y.transpose() + y * mk.transpose()) / g.powi(3)
            + y * y.transpose() * (3.0 * y[k] / g.powi(5));
    }
    (ScalarJet { value: g, gradient, hessian }, third)
}

fn power_sum_value(x: &Vector3<f64>, r: f64) -> f64 {
    let max = x.amax();
    if max == 0.0 {
        return 0.0;
    }
    max * x.iter().map(|c| (c.abs() / max).powf(r)).sum::<f64>().powf(1.0 / r)
}

/// Jets of `(Σ|xᵢ|ʳ)^{1/r}` up to third order, as a composition `ψ(Σ φ(xᵢ))`.
fn power_sum_jet(x: &Vector3<f64>, r: f64, guard: f64) -> (ScalarJet, ThirdDerivative) {
    let value = power_sum_value(x, r);
    let floor = guard * x.norm();
    let clamped = x.map(|c| {
        let s = if c < 0.0 { -1.0 } else { 1.0 };
        s * c.abs().max(floor)
    });
    let g = power_sum_value(&clamped, r);
    let d1 = clamped.map(|c| r * c.abs().powf(r - 1.0) * c.signum());
    let d2 = clamped.map(|c| r * (r - 1.0) * c.abs().powf(r - 2.0));
    let d3 = clamped.map(|c| r * (r - 1.0) * (r - 2.0) * c.abs().powf(r - 3.0) * c.signum());
    let inv = 1.0 / r;
    let psi1 = inv * g.powf(1.0 - r);
    let psi2 = inv * (inv - 1.0) * g.powf(1.0 - 2.0 * r);
    let psi3 = inv * (inv - 1.0) * (inv - 2.0) * g.powf(1.0 - 3.0 * r);

    // the gradient is continuous up to the coordinate planes; only the
    // higher jets are taken at the clamped point
    let g0 = value.max(f64::MIN_POSITIVE);
    let gradient = x.map(|c| (c.abs() / g0).powf(r - 1.0) * c.signum());
    let hessian = d1 * d1.transpose() * psi2 + Matrix3::from_diagonal(&d2) * psi1;
    let mut third = [Matrix3::zeros(); 3];
    for (k, slot) in third.iter_mut().enumerate() {
        let mut t = d1 * d1.transpose() * (psi3 * d1[k]);
        for i in 0..3 {
            for j in 0..3 {
                let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                t[(i, j)] += psi2
                    * (d2[i] * d1[j] * delta(i, k) + d1[i] * d2[j] * delta(j, k) + d2[i] * d1[k] * delta(i, j))
                    + psi1 * d3[i] * delta(i, j) * delta(j, k);
            }
        }
        *slot = t;
    }
    (ScalarJet { value, gradient, hessian }, third)
}

/// Central-difference jet of a scalar function, step relative to `|x|₂`.
fn fd_jet<F>(f: F, x: &Vector3<f64>, step: f64) -> Result<ScalarJet>
where
    F: Fn(&Vector3<f64>) -> Result<f64>,
{
    let h = step * x.norm();
    let f0 = f(x)?;
    let mut gradient = Vector3::zeros();
    let mut hessian = Matrix3::zeros();
    for i in 0..3 {
        let ei = Vector3::ith(i, h);
        let fp = f(&(x + ei))?;
        let fm = f(&(x - ei))?;
        gradient[i] = (fp - fm) / (2.0 * h);
        hessian[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let ej = Vector3::ith(j, h);
            let v = (f(&(x + ei + ej))? - f(&(x + ei - ej))? - f(&(x - ei + ej))? + f(&(x - ei - ej))?)
                / (4.0 * h * h);
            hessian[(i, j)] = v;
            hessian[(j, i)] = v;
        }
    }
    Ok(ScalarJet { value: f0, gradient, hessian })
}
