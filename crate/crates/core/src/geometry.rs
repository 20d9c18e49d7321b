//! Pointwise Minkowski curvature data.
//!
//! At a surface point `p` with Euclidean unit normal `ξ`, the Birkhoff normal
//! is `η = u(ξ)` and its differential is `dη = du ∘ dξ`. The affine
//! fundamental form of the transversal `η` is `h(X, Y) = ⟨D_X Y, ξ⟩ / ⟨η, ξ⟩`,
//! the Dupin metric is `d(X, Y) = ⟨du⁻¹X, Y⟩` and the weighted Dupin metric is
//! `b = d / ⟨η, ξ⟩`. They are tied together by `h(X, Y) = −b(dη X, Y)`, so the
//! principal curvatures solve the symmetric pencil `(−h) v = λ b v`.
//!
//! Tangent vectors are coordinate 2-vectors in the chart basis `(f_s, f_t)`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::norms::NormModel;
use crate::numerics::{simpson_periodic, sym_generalized_eigen_2x2, NumericsConfig};
use crate::surfaces::{SurfaceJet, SurfacePatch};

/// Everything known about the immersion at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGeometry {
    pub s: f64,
    pub t: f64,
    pub jet: SurfaceJet,
    /// Euclidean unit normal.
    pub xi: Vector3<f64>,
    /// Birkhoff normal, on the unit sphere of the norm.
    pub eta: Vector3<f64>,
    /// `⟨η, ξ⟩`, positive.
    pub pairing: f64,
    /// Set when `η` had to be re-oriented to make the pairing positive.
    pub eta_flipped: bool,
    /// Euclidean first fundamental form.
    pub first_form: Matrix2<f64>,
    /// `⟨f_ij, ξ⟩`.
    pub second_form: Matrix2<f64>,
    /// Matrix of `dξ`; column `j` holds the coordinates of `dξ(f_j)`.
    pub weingarten: Matrix2<f64>,
    /// Matrix of `dη` in the same convention.
    pub w: Matrix2<f64>,
    pub h_mat: Matrix2<f64>,
    pub d_mat: Matrix2<f64>,
    pub b_mat: Matrix2<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Principal directions, b-orthonormal.
    pub v1: Vector2<f64>,
    pub v2: Vector2<f64>,
    /// Minkowski Gaussian curvature `λ₁λ₂`.
    pub gaussian: f64,
    /// Minkowski mean curvature `(λ₁ + λ₂)/2`.
    pub mean: f64,
    pub umbilic: bool,
    /// `du` at `ξ` (annihilates `ξ`).
    pub gauss_differential: Matrix3<f64>,
    /// `du⁻¹` at `ξ` (annihilates `ξ`).
    pub dupin_operator: Matrix3<f64>,
    umbilic_tol: f64,
}

/// Asymptotic directions at a point, d-normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticDirections {
    /// `K > 0`.
    None,
    /// Exactly one principal curvature vanishes.
    One(Vector2<f64>),
    /// `K < 0`.
    Two(Vector2<f64>, Vector2<f64>),
    /// Both principal curvatures vanish; every direction is asymptotic.
    Planar,
}

impl AsymptoticDirections {
    pub fn count(&self) -> usize {
        match self {
            AsymptoticDirections::None | AsymptoticDirections::Planar => 0,
            AsymptoticDirections::One(_) => 1,
            AsymptoticDirections::Two(..) => 2,
        }
    }
}

/// Computes the full pointwise geometry of `surface` at `(s, t)` in the normed
/// space defined by `norm`.
pub fn point_geometry(
    norm: &NormModel,
    surface: &SurfacePatch,
    s: f64,
    t: f64,
    cfg: &NumericsConfig,
) -> Result<PointGeometry> {
    let jet = surface.evaluate_jet(s, t)?;
    let xi = surface.euclidean_normal(&jet);
    let frame = Matrix3x2::from_columns(&[jet.f_s, jet.f_t]);
    let first_form = frame.transpose() * frame;
    let first_inv = first_form.try_inverse().ok_or(Error::SingularMetric)?;
    let second_form = Matrix2::from_fn(|i, j| jet.second(i, j).dot(&xi));
    let second_form = 0.5 * (second_form + second_form.transpose());
    let weingarten = -first_inv * second_form;

    let mut eta = norm.birkhoff_point(&xi, cfg)?;
    let mut pairing = eta.dot(&xi);
    let mut eta_flipped = false;
    if pairing < 0.0 {
        eta = -eta;
        pairing = -pairing;
        eta_flipped = true;
    }
    if !(pairing > 0.0) {
        return Err(Error::DegeneratePairing);
    }

    let gauss_differential = norm.gauss_differential(&xi, cfg)?;
    let dupin_operator = norm.dupin_operator(&xi, cfg)?;
    // dη(f_j) = du(dξ f_j), read back in the chart basis
    let w = first_inv * frame.transpose() * gauss_differential * frame * weingarten;
    let d_mat = frame.transpose() * dupin_operator * frame;
    let d_mat = 0.5 * (d_mat + d_mat.transpose());
    let h_mat = second_form / pairing;
    let b_mat = d_mat / pairing;

    let wb = w.transpose() * b_mat;
    let asymmetry = (wb - wb.transpose()).norm() / wb.norm().max(f64::MIN_POSITIVE);
    if asymmetry > cfg.self_adjoint_tol && wb.norm() > 1e-12 * b_mat.norm() {
        return Err(Error::ComplexEigenvalues { asymmetry });
    }

    let eig = sym_generalized_eigen_2x2(&(-h_mat), &b_mat)?;
    let (lambda1, lambda2) = (eig.values[0], eig.values[1]);
    let umbilic = (lambda1 - lambda2).abs() <= cfg.umbilic_tol * 1f64.max(lambda1.abs() + lambda2.abs());
    let (v1, v2) = if umbilic {
        b_gram_schmidt(&b_mat)
    } else {
        (eig.vectors[0], eig.vectors[1])
    };

    Ok(PointGeometry {
        s,
        t,
        jet,
        xi,
        eta,
        pairing,
        eta_flipped,
        first_form,
        second_form,
        weingarten,
        w,
        h_mat,
        d_mat,
        b_mat,
        lambda1,
        lambda2,
        v1,
        v2,
        gaussian: lambda1 * lambda2,
        mean: 0.5 * (lambda1 + lambda2),
        umbilic,
        gauss_differential,
        dupin_operator,
        umbilic_tol: cfg.umbilic_tol,
    })
}

/// b-orthonormal frame obtained from the coordinate axes.
fn b_gram_schmidt(b: &Matrix2<f64>) -> (Vector2<f64>, Vector2<f64>) {
    let inner = |x: &Vector2<f64>, y: &Vector2<f64>| x.dot(&(b * y));
    let e1 = Vector2::x() / inner(&Vector2::x(), &Vector2::x()).sqrt();
    let raw = Vector2::y() - e1 * inner(&e1, &Vector2::y());
    (e1, raw / inner(&raw, &raw).sqrt())
}

impl PointGeometry {
    pub fn position(&self) -> Vector3<f64> {
        self.jet.f
    }

    /// Ambient vector of tangent coordinates.
    pub fn ambient(&self, x: &Vector2<f64>) -> Vector3<f64> {
        self.jet.f_s * x[0] + self.jet.f_t * x[1]
    }

    /// Chart coordinates of the orthogonal projection of `v` onto the tangent plane.
    pub fn tangent_coords(&self, v: &Vector3<f64>) -> Vector2<f64> {
        let rhs = Vector2::new(self.jet.f_s.dot(v), self.jet.f_t.dot(v));
        self.first_form.try_inverse().unwrap_or_else(Matrix2::zeros) * rhs
    }

    pub fn h(&self, x: &Vector2<f64>, y: &Vector2<f64>) -> f64 {
        x.dot(&(self.h_mat * y))
    }

    pub fn b(&self, x: &Vector2<f64>, y: &Vector2<f64>) -> f64 {
        x.dot(&(self.b_mat * y))
    }

    pub fn d(&self, x: &Vector2<f64>, y: &Vector2<f64>) -> f64 {
        x.dot(&(self.d_mat * y))
    }

    /// `k(X) = −h(X, X) / b(X, X)`.
    pub fn normal_curvature(&self, x: &Vector2<f64>) -> Result<f64> {
        let bb = self.b(x, x);
        if x.norm() == 0.0 || bb == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(-self.h(x, x) / bb)
    }

    /// `k(X) = ⟨du⁻¹X, dηX⟩ / ⟨du⁻¹X, X⟩`, through the Birkhoff–Gauss differential.
    pub fn normal_curvature_from_dupin(&self, x: &Vector2<f64>) -> Result<f64> {
        let dd = self.d(x, x);
        if x.norm() == 0.0 || dd == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(self.d(x, &(self.w * x)) / dd)
    }

    /// Principal directions rescaled to unit Dupin length.
    pub fn dupin_frame(&self) -> (Vector2<f64>, Vector2<f64>) {
        let scale = self.pairing.sqrt().recip();
        (self.v1 * scale, self.v2 * scale)
    }

    /// Point `V₁cos θ + V₂sin θ` of the Dupin indicatrix.
    pub fn dupin_indicatrix(&self, theta: f64) -> Vector2<f64> {
        let (a, b) = self.dupin_frame();
        a * theta.cos() + b * theta.sin()
    }

    /// Mean of the normal curvature over the Dupin indicatrix, by periodic Simpson.
    pub fn mean_by_indicatrix_average(&self, nodes: usize) -> Result<f64> {
        if nodes < 4 || !nodes.is_multiple_of(2) {
            return Err(Error::OddSampleCount(nodes));
        }
        let samples = (0..nodes)
            .map(|i| self.normal_curvature(&self.dupin_indicatrix(2.0 * PI * i as f64 / nodes as f64)))
            .collect::<Result<Vec<_>>>()?;
        simpson_periodic(&samples)
    }

    /// `k(V(θ₀)) + k(V(θ₀ + π/2))`.
    pub fn dupin_orthogonal_pair_sum(&self, theta0: f64) -> Result<f64> {
        Ok(self.normal_curvature(&self.dupin_indicatrix(theta0))?
            + self.normal_curvature(&self.dupin_indicatrix(theta0 + 0.5 * PI))?)
    }

    /// Directions with `h(X, X) = 0`, from `tan²θ = −λ₁/λ₂` in the Dupin frame.
    pub fn asymptotic_directions(&self) -> AsymptoticDirections {
        let zero = |l: f64| l.abs() <= self.umbilic_tol * 1f64.max(self.lambda1.abs() + self.lambda2.abs());
        let (a, b) = self.dupin_frame();
        match (zero(self.lambda1), zero(self.lambda2)) {
            (true, true) => AsymptoticDirections::Planar,
            (true, false) => AsymptoticDirections::One(a),
            (false, true) => AsymptoticDirections::One(b),
            (false, false) if self.lambda1 * self.lambda2 < 0.0 => {
                let theta = (-self.lambda1 / self.lambda2).sqrt().atan();
                let (c, s) = (theta.cos(), theta.sin());
                AsymptoticDirections::Two(a * c + b * s, a * c - b * s)
            }
            _ => AsymptoticDirections::None,
        }
    }

    /// `det(h) / det(b)`.
    pub fn gaussian_by_determinants(&self) -> Result<f64> {
        let det_b = self.b_mat.determinant();
        if !(det_b.abs() > 1e-300) {
            return Err(Error::SingularMetric);
        }
        Ok(self.h_mat.determinant() / det_b)
    }

    /// Eigenvalues of the raw matrix of `dη`, ascending, if real.
    pub fn raw_shape_eigenvalues(&self) -> Option<[f64; 2]> {
        let tr = self.w.trace();
        let det = self.w.determinant();
        let disc = tr * tr - 4.0 * det;
        let scale = tr * tr + det.abs();
        if disc < -1e-10 * scale {
            return None;
        }
        let root = disc.max(0.0).sqrt();
        Some([0.5 * (tr - root), 0.5 * (tr + root)])
    }
}
