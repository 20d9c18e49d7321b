//! Shared numerical kernels: finite differences, the 2×2 symmetric
//! generalized eigensolver, periodic quadrature and spectral differentiation.
//!
//! Every tolerance used across the crate lives in [`NumericsConfig`], which is
//! threaded explicitly through the pipeline.

use nalgebra::{Matrix2, Matrix3, Vector2};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric regime shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Central-difference step, relative to the scale of the evaluation point.
    pub fd_step: f64,
    /// Combine steps `h` and `h/2` into an O(h⁴) estimate.
    pub richardson: bool,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    /// Node count for periodic Simpson quadrature (even).
    pub quad_nodes: usize,
    /// Relative gap below which two principal curvatures count as equal.
    pub umbilic_tol: f64,
    /// Gradient threshold for critical points: `|dg| <= critical_tol * (1 + |g|)`.
    pub critical_tol: f64,
    /// Largest accepted condition number for 3×3 splitting solves.
    pub cond_guard: f64,
    /// Relative asymmetry of `Wᵀb` tolerated before eigenvalues are declared complex.
    pub self_adjoint_tol: f64,
    /// Relative distance kept from coordinate planes when differentiating ℓᵖ jets.
    pub lp_axis_guard: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            fd_step: 1e-5,
            richardson: false,
            newton_max_iter: 50,
            newton_tol: 1e-12,
            quad_nodes: 256,
            umbilic_tol: 1e-7,
            critical_tol: 1e-6,
            cond_guard: 1e8,
            self_adjoint_tol: 1e-4,
            lp_axis_guard: 1e-8,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fd_step", self.fd_step),
            ("newton_tol", self.newton_tol),
            ("umbilic_tol", self.umbilic_tol),
            ("critical_tol", self.critical_tol),
            ("cond_guard", self.cond_guard),
            ("self_adjoint_tol", self.self_adjoint_tol),
            ("lp_axis_guard", self.lp_axis_guard),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParameter("newton_max_iter must be positive".into()));
        }
        if self.quad_nodes < 4 || !self.quad_nodes.is_multiple_of(2) {
            return Err(Error::OddSampleCount(self.quad_nodes));
        }
        Ok(())
    }
}

/// Central difference of `field` at `point` along `direction`.
///
/// Returns `(f(x + h·d) − f(x − h·d)) / 2h`.
pub fn central_diff<F>(field: F, point: &[f64], direction: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if point.len() != direction.len() {
        return Err(Error::InvalidParameter("point and direction differ in dimension".into()));
    }
    let shifted = |sign: f64| -> Vec<f64> {
        point.iter().zip(direction).map(|(x, d)| x + sign * step * d).collect()
    };
    let plus = field(&shifted(1.0))?;
    let minus = field(&shifted(-1.0))?;
    Ok((plus - minus) / (2.0 * step))
}

/// Richardson-extrapolated central difference, combining steps `h` and `h/2`.
pub fn central_diff_richardson<F>(field: F, point: &[f64], direction: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let coarse = central_diff(&field, point, direction, step)?;
    let fine = central_diff(&field, point, direction, 0.5 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Scalar derivative `f'(x)`, optionally Richardson-extrapolated.
pub fn derivative<F>(f: F, x: f64, step: f64, richardson: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let field = |p: &[f64]| f(p[0]);
    if richardson {
        central_diff_richardson(field, &[x], &[1.0], step)
    } else {
        central_diff(field, &[x], &[1.0], step)
    }
}

/// Result of `A x = λ B x` for symmetric `A` and SPD `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedEigen2 {
    /// Ascending eigenvalues.
    pub values: [f64; 2],
    /// B-orthonormal eigenvectors, matching `values`.
    pub vectors: [Vector2<f64>; 2],
}

/// Eigen-decomposition of a symmetric 2×2 matrix via one Jacobi rotation.
/// Eigenvalues ascend; eigenvectors are orthonormal.
pub fn sym_eigen_2x2(m: &Matrix2<f64>) -> GeneralizedEigen2 {
    let (p, q, r) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let (mut pairs, scale) = ([(p, Vector2::new(1.0, 0.0)), (r, Vector2::new(0.0, 1.0))], p.abs() + r.abs());
    if q.abs() > f64::EPSILON * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
        let tau = (r - p) / (2.0 * q);
        let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        pairs = [(p - t * q, Vector2::new(c, -s)), (r + t * q, Vector2::new(s, c))];
    }
    if pairs[0].0 > pairs[1].0 {
        pairs.swap(0, 1);
    }
    GeneralizedEigen2 {
        values: [pairs[0].0, pairs[1].0],
        vectors: [pairs[0].1, pairs[1].1],
    }
}

/// Lower Cholesky factor of a 2×2 SPD matrix.
pub fn cholesky_2x2(b: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let scale = b[(0, 0)].abs() + b[(1, 1)].abs();
    let tiny = 1e-14 * scale;
    let asym = (b[(0, 1)] - b[(1, 0)]).abs();
    if !(b[(0, 0)] > tiny) || asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSpd);
    }
    let l11 = b[(0, 0)].sqrt();
    let l21 = b[(1, 0)] / l11;
    let rest = b[(1, 1)] - l21 * l21;
    if !(rest > tiny) {
        return Err(Error::NotSpd);
    }
    Ok(Matrix2::new(l11, 0.0, l21, rest.sqrt()))
}

/// Solves `A x = λ B x` with `A` symmetric and `B` SPD by reducing through
/// the Cholesky factor of `B`. Eigenvectors come back B-orthonormal.
pub fn sym_generalized_eigen_2x2(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Result<GeneralizedEigen2> {
    let l = cholesky_2x2(b)?;
    let l_inv = l.try_inverse().ok_or(Error::NotSpd)?;
    let reduced = l_inv * a * l_inv.transpose();
    let sym = 0.5 * (reduced + reduced.transpose());
    let eig = sym_eigen_2x2(&sym);
    let back = l_inv.transpose();
    Ok(GeneralizedEigen2 {
        values: eig.values,
        vectors: [back * eig.vectors[0], back * eig.vectors[1]],
    })
}

/// Mean value over one period of equally spaced samples on `[0, 2π)`,
/// by the composite Simpson rule with wrap-around.
pub fn simpson_periodic(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::OddSampleCount(n));
    }
    let weighted: f64 = samples
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 2.0 * v } else { 4.0 * v })
        .sum();
    Ok(weighted / (3.0 * n as f64))
}

/// First and second derivatives of a smooth `2π`-periodic function from
/// equally spaced samples, by trigonometric interpolation.
pub fn spectral_derivatives(samples: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = samples.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::OddSampleCount(n));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut spectrum: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut spectrum);

    let wavenumber = |k: usize| -> f64 {
        if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        }
    };
    let mut first = spectrum.clone();
    let mut second = spectrum;
    for k in 0..n {
        let w = wavenumber(k);
        // Nyquist mode has no odd-derivative counterpart on a real grid.
        first[k] *= if k == n / 2 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, w) };
        second[k] *= -w * w;
    }
    inverse.process(&mut first);
    inverse.process(&mut second);
    let scale = 1.0 / n as f64;
    Ok((
        first.iter().map(|c| c.re * scale).collect(),
        second.iter().map(|c| c.re * scale).collect(),
    ))
}

/// 2-norm condition number of a 3×3 matrix (infinite when singular).
pub fn condition_number(m: &Matrix3<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
