use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid sphere context: d = {d}, R = {radius}")]
    InvalidContext { d: usize, radius: f64 },
    #[error("dimension d = {0} has no numerical basis (supported: 2, 3)")]
    UnsupportedDimension(usize),
    #[error("point is off the sphere: |x| = {norm}, R = {radius}")]
    OffSphere { norm: f64, radius: f64 },
    #[error("invalid cap radius a = {a} (must lie in (0, R], R = {radius})")]
    InvalidCapRadius { a: f64, radius: f64 },
    #[error("direction is not orthogonal to the start point: p·v = {inner}")]
    NotOrthogonal { inner: f64 },
    #[error("invalid segment parameter length l = {0} (must lie in (0, 2π])")]
    InvalidSegmentLength(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("region node `{kind}` is not defined for d = {d}")]
    RegionDimension { kind: &'static str, d: usize },
    #[error("cap cover leaves {uncovered} of {samples} verification points uncovered")]
    CoverageFailure { uncovered: usize, samples: usize },
    #[error("cover multiplicity {kappa} exceeds the bound {bound}")]
    MultiplicityBound { kappa: usize, bound: f64 },
    #[error("no direction among {n_dirs} sees the region inside the cap")]
    NoDirectionFound { n_dirs: usize },
    #[error("empty region")]
    EmptyRegion,
    #[error("region has zero measure")]
    ZeroMeasure,
    #[error("non-finite integrand value at node {0}")]
    NonFinite(usize),
    #[error("interpolation residual {residual:e} exceeds tolerance {tolerance:e}")]
    Interpolation { residual: f64, tolerance: f64 },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NotConverged(usize),
    #[error("region too small for degree {degree} at this quadrature: λ_min = {lambda_min:e}")]
    NearSingularGram { degree: usize, lambda_min: f64 },
    #[error("region/time too small at cutoff L = {cutoff}: λ_min(W) = {lambda_min:e}")]
    SingularGramian { cutoff: usize, lambda_min: f64 },
    #[error("negative time t = {0}")]
    NegativeTime(f64),
    #[error("terminal residual {residual:e} exceeds tolerance {tolerance:e}")]
    ToleranceNotMet { residual: f64, tolerance: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
