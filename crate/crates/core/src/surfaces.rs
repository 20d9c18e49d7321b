//! Oriented parametric surface patches with second-order jets.
//!
//! A [`SurfacePatch`] wraps a [`Chart`] (an analytic map `(s, t) ↦ f(s, t)`
//! with its partials) together with a rectangular parameter domain, periodicity
//! flags and an orientation. Jets are either taken from the chart or rebuilt
//! from positions by central differences.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::norms::{contract_third, JetSource, NormModel};
use crate::numerics::NumericsConfig;

/// Position and partial derivatives up to second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub f: Vector3<f64>,
    pub f_s: Vector3<f64>,
    pub f_t: Vector3<f64>,
    pub f_ss: Vector3<f64>,
    pub f_st: Vector3<f64>,
    pub f_tt: Vector3<f64>,
}

impl SurfaceJet {
    pub fn second(&self, i: usize, j: usize) -> Vector3<f64> {
        match (i, j) {
            (0, 0) => self.f_ss,
            (1, 1) => self.f_tt,
            _ => self.f_st,
        }
    }

    pub fn first(&self, i: usize) -> Vector3<f64> {
        if i == 0 {
            self.f_s
        } else {
            self.f_t
        }
    }
}

/// A parametrization `(s, t) ↦ f(s, t)` defined on a neighbourhood of its domain.
pub trait Chart: Send + Sync + fmt::Debug {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>>;
    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet>;
}

/// Parameter rectangle `[s0, s1] × [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub t1: f64,
    pub periodic: [bool; 2],
}

impl Domain {
    pub fn new(s0: f64, s1: f64, t0: f64, t1: f64, periodic: [bool; 2]) -> Result<Self> {
        if !(s1 > s0 && t1 > t0) {
            return Err(Error::InvalidParameter("empty parameter domain".into()));
        }
        Ok(Domain { s0, s1, t0, t1, periodic })
    }

    fn bounds(&self, axis: usize) -> (f64, f64) {
        if axis == 0 {
            (self.s0, self.s1)
        } else {
            (self.t0, self.t1)
        }
    }

    fn wrap(&self, axis: usize, x: f64) -> f64 {
        let (lo, hi) = self.bounds(axis);
        if self.periodic[axis] {
            lo + (x - lo).rem_euclid(hi - lo)
        } else {
            x
        }
    }

    fn contains(&self, axis: usize, x: f64) -> bool {
        let (lo, hi) = self.bounds(axis);
        let slack = 1e-12 * (hi - lo);
        x >= lo - slack && x <= hi + slack
    }
}

/// Sign convention for the Euclidean normal `±(f_s × f_t)/|f_s × f_t|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Standard,
    Flipped,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Flipped => -1.0,
        }
    }
}

/// An oriented single-chart surface. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    chart: Arc<dyn Chart>,
    domain: Domain,
    orientation: Orientation,
    jet_source: JetSource,
    immersion_guard: f64,
}

impl SurfacePatch {
    pub fn new(chart: Arc<dyn Chart>, domain: Domain) -> Self {
        SurfacePatch {
            chart,
            domain,
            orientation: Orientation::Standard,
            jet_source: JetSource::Analytic,
            immersion_guard: 1e-10,
        }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_jet_source(mut self, jet_source: JetSource) -> Self {
        self.jet_source = jet_source;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn flipped(&self) -> Self {
        let orientation = match self.orientation {
            Orientation::Standard => Orientation::Flipped,
            Orientation::Flipped => Orientation::Standard,
        };
        self.clone().with_orientation(orientation)
    }

    pub fn chart(&self) -> &Arc<dyn Chart> {
        &self.chart
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn jet_source(&self) -> JetSource {
        self.jet_source
    }

    /// Wraps periodic axes and rejects points outside the rectangle.
    pub fn normalize_params(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        let (ws, wt) = (self.domain.wrap(0, s), self.domain.wrap(1, t));
        if !(s.is_finite() && t.is_finite()) || !self.domain.contains(0, ws) || !self.domain.contains(1, wt) {
            return Err(Error::OutOfDomain { s, t });
        }
        Ok((ws, wt))
    }

    pub fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        let (s, t) = self.normalize_params(s, t)?;
        self.chart.position(s, t)
    }

    /// Second-order jet at `(s, t)`.
    pub fn evaluate_jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let (s, t) = self.normalize_params(s, t)?;
        let jet = match self.jet_source {
            JetSource::Analytic => self.chart.jet(s, t)?,
            JetSource::FiniteDifference { step } => self.fd_jet(s, t, step)?,
        };
        let cross = jet.f_s.cross(&jet.f_t).norm();
        if !(cross >= self.immersion_guard) {
            return Err(Error::DegenerateJet { s, t, cross });
        }
        Ok(jet)
    }

    /// Euclidean unit normal with the patch's orientation.
    pub fn euclidean_normal(&self, jet: &SurfaceJet) -> Vector3<f64> {
        jet.f_s.cross(&jet.f_t).normalize() * self.orientation.sign()
    }

    fn fd_jet(&self, s: f64, t: f64, step: f64) -> Result<SurfaceJet> {
        let chart = &self.chart;
        let f = chart.position(s, t)?;
        let along_s = |t: f64| {
            move |x: f64| chart.position(x, t)
        };
        let (f_s, f_ss) = self.axis_derivatives(0, s, step, along_s(t))?;
        let (f_t, f_tt) = self.axis_derivatives(1, t, step, |y| chart.position(s, y))?;
        // mixed partial: s-derivative of the t-derivative
        let (f_st, _) = self.axis_derivatives(0, s, step, |x| {
            self.axis_derivatives(1, t, step, |y| chart.position(x, y)).map(|d| d.0)
        })?;
        Ok(SurfaceJet { f, f_s, f_t, f_ss, f_st, f_tt })
    }

    /// First and second derivative along one parameter axis: fourth-order
    /// central where the five-point stencil fits in the domain (always on
    /// periodic axes), second-order central or one-sided closer to the edge.
    fn axis_derivatives<G>(&self, axis: usize, x: f64, h: f64, g: G) -> Result<(Vector3<f64>, Vector3<f64>)>
    where
        G: Fn(f64) -> Result<Vector3<f64>>,
    {
        let (lo, hi) = self.domain.bounds(axis);
        let periodic = self.domain.periodic[axis];
        if periodic || (x - 2.0 * h >= lo && x + 2.0 * h <= hi) {
            let (f2p, fp, f0, fm, f2m) = (g(x + 2.0 * h)?, g(x + h)?, g(x)?, g(x - h)?, g(x - 2.0 * h)?);
            let d1 = (8.0 * (fp - fm) - (f2p - f2m)) / (12.0 * h);
            let d2 = (16.0 * (fp + fm) - (f2p + f2m) - 30.0 * f0) / (12.0 * h * h);
            return Ok((d1, d2));
        }
        if x - h >= lo && x + h <= hi {
            let (fp, f0, fm) = (g(x + h)?, g(x)?, g(x - h)?);
            return Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)));
        }
        let dir = if x - h < lo { 1.0 } else { -1.0 };
        let f: Vec<Vector3<f64>> = (0..4).map(|k| g(x + dir * h * k as f64)).collect::<Result<_>>()?;
        let d1 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h) * dir;
        let d2 = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
        Ok((d1, d2))
    }

    /// Sample grid in row-major order (`s` outer). Periodic axes are sampled
    /// without repeating the endpoint; other axes stay `margin` inside.
    pub fn grid(&self, ns: usize, nt: usize, margins: [f64; 2]) -> Result<Vec<(f64, f64)>> {
        if ns < 2 || nt < 2 {
            return Err(Error::InvalidParameter("grid counts must be at least 2".into()));
        }
        let axis = |axis: usize, n: usize| -> Result<Vec<f64>> {
            let (lo, hi) = self.domain.bounds(axis);
            if self.domain.periodic[axis] {
                return Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect());
            }
            let (a, b) = (lo + margins[axis], hi - margins[axis]);
            if !(b > a) {
                return Err(Error::InvalidParameter("grid margins swallow the domain".into()));
            }
            Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
        };
        let (ss, ts) = (axis(0, ns)?, axis(1, nt)?);
        Ok(ss.iter().flat_map(|&s| ts.iter().map(move |&t| (s, t))).collect())
    }
}

/// Spherical-angle chart of the Euclidean unit sphere: `s` is the polar
/// angle, `t` the azimuth. Returns `ξ` and its partials up to second order.
pub fn unit_sphere_jet(s: f64, t: f64) -> SurfaceJet {
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    SurfaceJet {
        f: Vector3::new(ss * ct, ss * st, cs),
        f_s: Vector3::new(cs * ct, cs * st, -ss),
        f_t: Vector3::new(-ss * st, ss * ct, 0.0),
        f_ss: Vector3::new(-ss * ct, -ss * st, -cs),
        f_st: Vector3::new(-cs * st, cs * ct, 0.0),
        f_tt: Vector3::new(-ss * ct, -ss * st, 0.0),
    }
}

fn polar_domain() -> Domain {
    Domain { s0: 0.0, s1: PI, t0: 0.0, t1: 2.0 * PI, periodic: [false, true] }
}

/// Affine image `center + diag(scale)·ξ(s, t)` of the spherical chart.
#[derive(Debug, Clone, Copy)]
pub struct AxisEllipsoidChart {
    pub axes: Vector3<f64>,
    pub center: Vector3<f64>,
}

impl Chart for AxisEllipsoidChart {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        Ok(self.center + unit_sphere_jet(s, t).f.component_mul(&self.axes))
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let j = unit_sphere_jet(s, t);
        let m = |v: Vector3<f64>| v.component_mul(&self.axes);
        Ok(SurfaceJet {
            f: self.center + m(j.f),
            f_s: m(j.f_s),
            f_t: m(j.f_t),
            f_ss: m(j.f_ss),
            f_st: m(j.f_st),
            f_tt: m(j.f_tt),
        })
    }
}

/// Euclidean sphere of radius `r` about `center`, outward oriented.
pub fn euclidean_sphere(radius: f64, center: Vector3<f64>) -> Result<SurfacePatch> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("sphere radius must be positive".into()));
    }
    Ok(SurfacePatch::new(
        Arc::new(AxisEllipsoidChart { axes: Vector3::repeat(radius), center }),
        polar_domain(),
    ))
}

/// Ellipsoid with semi-axes `a, b, c` centred at the origin, outward oriented.
pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<SurfacePatch> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter("ellipsoid semi-axes must be positive".into()));
    }
    Ok(SurfacePatch::new(
        Arc::new(AxisEllipsoidChart { axes: Vector3::new(a, b, c), center: Vector3::zeros() }),
        polar_domain(),
    ))
}

/// Height function jet `(φ, φ_s, φ_t, φ_ss, φ_st, φ_tt)`.
pub type HeightFn = Arc<dyn Fn(f64, f64) -> [f64; 6] + Send + Sync>;

/// Graph `(s, t) ↦ (s, t, φ(s, t))`.
#[derive(Clone)]
pub struct GraphChart {
    pub height: HeightFn,
}

impl fmt::Debug for GraphChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GraphChart")
    }
}

impl Chart for GraphChart {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        Ok(Vector3::new(s, t, (self.height)(s, t)[0]))
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let [z, zs, zt, zss, zst, ztt] = (self.height)(s, t);
        Ok(SurfaceJet {
            f: Vector3::new(s, t, z),
            f_s: Vector3::new(1.0, 0.0, zs),
            f_t: Vector3::new(0.0, 1.0, zt),
            f_ss: Vector3::new(0.0, 0.0, zss),
            f_st: Vector3::new(0.0, 0.0, zst),
            f_tt: Vector3::new(0.0, 0.0, ztt),
        })
    }
}

pub fn graph(height: HeightFn, domain: Domain) -> SurfacePatch {
    SurfacePatch::new(Arc::new(GraphChart { height }), domain)
}

/// Graph of the polynomial `Σ c·sⁱtʲ` given as `(i, j, c)` terms.
pub fn polynomial_graph(terms: Vec<(u32, u32, f64)>, domain: Domain) -> SurfacePatch {
    let height = move |s: f64, t: f64| {
        // d-th derivative of x^n
        let pd = |x: f64, n: u32, d: u32| -> f64 {
            if d > n {
                return 0.0;
            }
            let coeff: f64 = (0..d).map(|k| (n - k) as f64).product();
            coeff * x.powi((n - d) as i32)
        };
        let mut out = [0.0; 6];
        for &(i, j, c) in &terms {
            out[0] += c * pd(s, i, 0) * pd(t, j, 0);
            out[1] += c * pd(s, i, 1) * pd(t, j, 0);
            out[2] += c * pd(s, i, 0) * pd(t, j, 1);
            out[3] += c * pd(s, i, 2) * pd(t, j, 0);
            out[4] += c * pd(s, i, 1) * pd(t, j, 1);
            out[5] += c * pd(s, i, 0) * pd(t, j, 2);
        }
        out
    };
    graph(Arc::new(height), domain)
}

/// Torus of revolution about the z-axis; `s` is the azimuth, `t` the tube
/// angle, so that `f_s × f_t` points outward.
#[derive(Debug, Clone, Copy)]
pub struct TorusChart {
    pub major: f64,
    pub minor: f64,
}

impl Chart for TorusChart {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        Ok(self.jet(s, t)?.f)
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let (ss, cs) = s.sin_cos();
        let (st, ct) = t.sin_cos();
        let (big, r) = (self.major, self.minor);
        let w = big + r * ct;
        Ok(SurfaceJet {
            f: Vector3::new(w * cs, w * ss, r * st),
            f_s: Vector3::new(-w * ss, w * cs, 0.0),
            f_t: Vector3::new(-r * st * cs, -r * st * ss, r * ct),
            f_ss: Vector3::new(-w * cs, -w * ss, 0.0),
            f_st: Vector3::new(r * st * ss, -r * st * cs, 0.0),
            f_tt: Vector3::new(-r * ct * cs, -r * ct * ss, -r * st),
        })
    }
}

pub fn torus(major: f64, minor: f64) -> Result<SurfacePatch> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::InvalidParameter("torus needs major > minor > 0".into()));
    }
    Ok(SurfacePatch::new(
        Arc::new(TorusChart { major, minor }),
        Domain { s0: 0.0, s1: 2.0 * PI, t0: 0.0, t1: 2.0 * PI, periodic: [true, true] },
    ))
}

/// Catenoid `(c·cosh(s/c)·cos t, c·cosh(s/c)·sin t, s)`.
#[derive(Debug, Clone, Copy)]
pub struct CatenoidChart {
    pub waist: f64,
}

impl Chart for CatenoidChart {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        Ok(self.jet(s, t)?.f)
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let c = self.waist;
        let (ch, sh) = ((s / c).cosh(), (s / c).sinh());
        let (st, ct) = t.sin_cos();
        Ok(SurfaceJet {
            f: Vector3::new(c * ch * ct, c * ch * st, s),
            f_s: Vector3::new(sh * ct, sh * st, 1.0),
            f_t: Vector3::new(-c * ch * st, c * ch * ct, 0.0),
            f_ss: Vector3::new(ch * ct / c, ch * st / c, 0.0),
            f_st: Vector3::new(-sh * st, sh * ct, 0.0),
            f_tt: Vector3::new(-c * ch * ct, -c * ch * st, 0.0),
        })
    }
}

pub fn catenoid(waist: f64, height: f64) -> Result<SurfacePatch> {
    if !(waist > 0.0 && height > 0.0) {
        return Err(Error::InvalidParameter("catenoid needs positive waist and height".into()));
    }
    Ok(SurfacePatch::new(
        Arc::new(CatenoidChart { waist }),
        Domain { s0: -height, s1: height, t0: 0.0, t1: 2.0 * PI, periodic: [false, true] },
    ))
}

/// `center + ρ·u(ξ(s, t))` with `ξ` the spherical-angle chart; the Euclidean
/// normal at `f(s, t)` is `ξ(s, t)` by construction.
#[derive(Debug, Clone)]
pub struct MinkowskiSphereChart {
    pub norm: NormModel,
    pub radius: f64,
    pub center: Vector3<f64>,
    pub numerics: NumericsConfig,
}

impl Chart for MinkowskiSphereChart {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        let xi = unit_sphere_jet(s, t).f;
        Ok(self.center + self.norm.birkhoff_point(&xi, &self.numerics)? * self.radius)
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let x = unit_sphere_jet(s, t);
        let dual = self.norm.dual_jet(&x.f, &self.numerics)?;
        let third = self.norm.dual_third(&x.f, &self.numerics)?;
        let h = dual.hessian;
        let rho = self.radius;
        let second = |a: &Vector3<f64>, b: &Vector3<f64>, ab: &Vector3<f64>| {
            (contract_third(&third, a, b) + h * ab) * rho
        };
        Ok(SurfaceJet {
            f: self.center + dual.gradient * rho,
            f_s: h * x.f_s * rho,
            f_t: h * x.f_t * rho,
            f_ss: second(&x.f_s, &x.f_s, &x.f_ss),
            f_st: second(&x.f_s, &x.f_t, &x.f_st),
            f_tt: second(&x.f_t, &x.f_t, &x.f_tt),
        })
    }
}

pub fn minkowski_sphere(
    norm: NormModel,
    radius: f64,
    center: Vector3<f64>,
    numerics: NumericsConfig,
) -> Result<SurfacePatch> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("Minkowski sphere radius must be positive".into()));
    }
    Ok(SurfacePatch::new(Arc::new(MinkowskiSphereChart { norm, radius, center, numerics }), polar_domain()))
}

/// Precomposition with an affine map of the parameter plane:
/// `(σ, τ) ↦ f(offset + M·(σ, τ))`.
#[derive(Debug, Clone)]
pub struct LinearReparam {
    pub inner: Arc<dyn Chart>,
    pub matrix: Matrix2<f64>,
    pub offset: Vector2<f64>,
}

impl Chart for LinearReparam {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        let p = self.offset + self.matrix * Vector2::new(s, t);
        self.inner.position(p[0], p[1])
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let p = self.offset + self.matrix * Vector2::new(s, t);
        let j = self.inner.jet(p[0], p[1])?;
        let m = &self.matrix;
        let d1 = |k: usize| j.f_s * m[(0, k)] + j.f_t * m[(1, k)];
        let d2 = |k: usize, l: usize| {
            j.f_ss * (m[(0, k)] * m[(0, l)])
                + j.f_st * (m[(0, k)] * m[(1, l)] + m[(1, k)] * m[(0, l)])
                + j.f_tt * (m[(1, k)] * m[(1, l)])
        };
        Ok(SurfaceJet { f: j.f, f_s: d1(0), f_t: d1(1), f_ss: d2(0, 0), f_st: d2(0, 1), f_tt: d2(1, 1) })
    }
}

/// Homothety `λ·f` of a chart.
#[derive(Debug, Clone)]
pub struct ScaledChart {
    pub inner: Arc<dyn Chart>,
    pub factor: f64,
}

impl Chart for ScaledChart {
    fn position(&self, s: f64, t: f64) -> Result<Vector3<f64>> {
        Ok(self.inner.position(s, t)? * self.factor)
    }

    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet> {
        let j = self.inner.jet(s, t)?;
        let k = self.factor;
        Ok(SurfaceJet { f: j.f * k, f_s: j.f_s * k, f_t: j.f_t * k, f_ss: j.f_ss * k, f_st: j.f_st * k, f_tt: j.f_tt * k })
    }
}
