use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation at the cone tip z = 0 is undefined")]
    ConeTip,

    #[error("integrator step underflow: {0}")]
    StepUnderflow(String),

    #[error("trajectory norm collapsed to {norm:e} (floor {floor:e})")]
    NormCollapse { norm: f64, floor: f64 },

    #[error("subdivision needs more than {cap} pieces (delta too small or flow too fast)")]
    PieceCap { cap: usize },

    #[error("leaf Newton solve did not converge (residual {residual:e} after {iterations} iterations)")]
    LeafNewton { residual: f64, iterations: usize },

    #[error("rotation parameter |t| = {0} is not below 1/2")]
    RotationSingular(f64),

    #[error("rotation family needs at least 3 pieces, got {0}")]
    TooFewPieces(usize),

    #[error("hamiltonian is not sign-definite on the sphere (sampled range [{min}, {max}])")]
    IndefiniteHamiltonian { min: f64, max: f64 },

    #[error("fiber block of the endpoint rotation form has nullity {nullity} at t = {t}")]
    EndpointNullity { t: f64, nullity: usize },

    #[error("hamiltonian is not Z2-symmetric: max |h(z) - h(-z)| = {0:e}")]
    NotSymmetric(f64),

    #[error("record at t = {t} has no antipodal partner")]
    UnpairedRecord { t: f64 },

    #[error("route disagreement: {0}")]
    RouteDisagreement(String),

    #[error("reduced base point failed the direct residual check: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
