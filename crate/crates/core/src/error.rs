use thiserror::Error;

/// Errors raised by the sensitivity toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("moment order {order} exceeds the supported maximum {max}")]
    MomentOrderTooLarge { order: usize, max: usize },

    #[error("quadrature size {0} outside 1..=256")]
    QuadratureSize(usize),

    #[error("q-function index {0} outside 1..=4")]
    QIndex(usize),

    #[error("invalid prior hyperparameter: {0}")]
    InvalidPrior(String),

    #[error("value {value} lies outside the support of the {family} prior")]
    OutsideSupport { family: &'static str, value: f64 },

    #[error("operation requires a normal prior, got {0}")]
    UnsupportedFamily(&'static str),

    #[error("perturbation ({l2}, {l3}, {l4}) is not feasible")]
    Infeasible { l2: f64, l3: f64, l4: f64 },

    #[error("perturbation has lambda3 = {0}, outside the symmetric cross-section")]
    OutsideRestriction(f64),

    #[error("boundary chart is singular at z = {z} (determinant {det:e})")]
    SingularChart { z: f64, det: f64 },

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("posterior normaliser xi = {0} is not positive on a feasible perturbation")]
    NonPositiveXi(f64),

    #[error("predictive factor {value} is not positive at quadrature node y = {node}")]
    NonPositivePredictive { node: f64, value: f64 },

    #[error("KL quadrature not converged: {coarse} vs {fine}")]
    QuadratureMismatch { coarse: f64, fine: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("summary lists do not match: {0}")]
    SummaryMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
