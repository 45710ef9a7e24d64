use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },

    /// Density fell below the floor; velocity and potential are undefined there.
    #[error("density {rho:e} below floor {floor:e}")]
    Node { rho: f64, floor: f64 },

    #[error("term magnitude overflowed at x = {x}, t = {t}")]
    Overflow { x: f64, t: f64 },

    #[error("singular well geometry at t = {t} (denominator {denominator:e})")]
    Singularity { t: f64, denominator: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step limit reached at t = {t}")]
    StepLimit { t: f64 },
}
