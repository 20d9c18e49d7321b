use thiserror::Error;

/// Failures raised by the geometric pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative requested at the origin, where the gauge is not smooth")]
    NonSmoothPoint,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("custom norm has no dual jets and the Newton fallback is disabled")]
    MissingDualJets,
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("restricted Hessian of the support function is singular (condition {condition:e})")]
    SingularRestriction { condition: f64 },
    #[error("parameter ({s}, {t}) lies outside the chart domain")]
    OutOfDomain { s: f64, t: f64 },
    #[error("chart is not immersed at ({s}, {t}): |f_s x f_t| = {cross:e}")]
    DegenerateJet { s: f64, t: f64, cross: f64 },
    #[error("shape operator is not self-adjoint for b (relative asymmetry {asymmetry:e})")]
    ComplexEigenvalues { asymmetry: f64 },
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("metric matrix is singular")]
    SingularMetric,
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("periodic Simpson rule needs an even sample count >= 4, got {0}")]
    OddSampleCount(usize),
    #[error("transversal pairing <eta, xi> vanishes")]
    DegeneratePairing,
    #[error("point is not critical: |grad| = {gradient:e} exceeds {tolerance:e}")]
    NotCritical { gradient: f64, tolerance: f64 },
    #[error("affine fundamental form has rank < 2")]
    DegenerateH,
    #[error("linear system is ill-conditioned (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("Euclidean Gaussian curvature {gaussian:e} is not positive")]
    NonElliptic { gaussian: f64 },
    #[error("support function does not describe a convex curve near theta = {theta}")]
    NonConvexCurve { theta: f64 },
    #[error("evaluation failed: {0}")]
    EvaluationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
