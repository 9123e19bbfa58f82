use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown group `{0}`")]
    UnknownName(String),

    #[error("unsupported dimension for {name}: {detail}")]
    UnsupportedDimension { name: String, detail: String },

    #[error("matrix leaves the span of the algebra basis (residual {residual:e})")]
    ClosureViolation { residual: f64 },

    #[error("matrix is not a group element (residual {residual:e}, tolerance {tol:e})")]
    NotInGroup { residual: f64, tol: f64 },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generator is not in the subalgebra h (m-component norm {leak:e})")]
    InputNotInH { leak: f64 },

    #[error("vector is not in the complement m (h-component norm {leak:e})")]
    InputNotInM { leak: f64 },

    #[error("operator is not symmetric (asymmetry {asymmetry:e}); drifted generators are not decomposed")]
    NonSymmetricOperator { asymmetry: f64 },

    #[error("h does not act faithfully on the component (smallest form eigenvalue {min_eig:e})")]
    NonFaithfulAction { min_eig: f64 },

    #[error("trace form is not proportional to the inner product on h (spread {spread:e})")]
    NonProportionalForm { spread: f64 },

    #[error("centring condition fails: |mean Ad(h)Y0| = {norm:e} exceeds 4 SE = {bound:e}")]
    CentringViolation { norm: f64, bound: f64 },

    #[error("Y0 has mass {mass:e} on a zero-eigenvalue component")]
    ZeroEigenvalueComponent { mass: f64 },

    #[error("Y0 spreads over {count} isotypic components; closed form needs exactly one")]
    MixedComponentInput { count: usize },

    #[error(
        "coefficient matrix is indefinite beyond noise (eigenvalue {min_eig:e}, tolerance {tol:e})"
    )]
    IndefiniteCoefficients { min_eig: f64, tol: f64 },

    #[error("component carries {forms} invariant symmetric forms; closed form needs one")]
    ReducibleComponent { forms: usize },

    #[error("effective generator is not isotropic")]
    NotIsotropic,

    #[error("projection validity check failed: {0}")]
    GeometricCheckFailed(String),

    #[error("step {dt:e} exceeds the fast-scale limit {max:e}")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("horizon needs {steps:e} steps, above the guard of 1e9")]
    HorizonGuard { steps: f64 },

    #[error("budget exceeded: {steps:e} projected steps")]
    BudgetExceeded { steps: f64 },

    #[error("fast path does not resolve the slow grid: {0}")]
    InsufficientHResolution(String),

    #[error("batches live on different model manifolds: {0} vs {1}")]
    MismatchedManifold(String, String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
