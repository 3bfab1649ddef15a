use thiserror::Error;

use crate::evolution::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The matched expansion only exists for antisymmetric boundary data.
    #[error("incompatible boundary data: beta = {beta} but -alpha = {neg_alpha}")]
    IncompatibleBoundary { beta: f64, neg_alpha: f64 },

    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field value at node {index} is not finite")]
    NonFinite { index: usize },

    #[error("newton iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular jacobian: zero pivot at row {row}")]
    SingularJacobian { row: usize },

    #[error("symmetrization weight underflows (min {min:e}); eps = {eps} is too small for double precision")]
    Underflow { min: f64, eps: f64 },

    #[error("eps = {eps} is below the double-precision floor {floor} for spectra; pass an override to proceed")]
    PrecisionFloor { eps: f64, floor: f64 },

    #[error(
        "grid with {n} nodes does not resolve the layer at eps = {eps}; need at least {required}"
    )]
    Resolution { n: usize, eps: f64, required: usize },

    #[error("eigenvalue bisection did not converge for index {index}")]
    IterationLimit { index: usize },

    #[error("implicit step did not converge at t = {t} (residual {residual:e}); try a smaller dt")]
    StepNoConvergence { t: f64, residual: f64 },

    #[error("evolution failed at t = {t}: {source}")]
    EvolutionFailed {
        t: f64,
        partial: Box<Trajectory>,
        #[source]
        source: Box<Error>,
    },

    #[error("not enough points for a fit: have {got}, need {need}")]
    NotEnoughPoints { got: usize, need: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
