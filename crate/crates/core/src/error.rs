use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EgmError {
    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("interaction constant kappa must be non-zero")]
    ZeroKappa,

    #[error("wave vector must have unit length (|m| = {0})")]
    NonUnitVector(f64),

    #[error("{needed} time levels required, {got} supplied")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("need at least {needed} fields, got {got}")]
    TooFewFields { needed: usize, got: usize },

    #[error("degenerate subregion: {0}")]
    DegenerateRegion(String),

    #[error("time step {dtau} violates CFL limit {limit}")]
    CflViolation { dtau: f64, limit: f64 },

    #[error("non-finite value after step; last stable tau = {last_stable_tau}")]
    NumericalAbort { last_stable_tau: f64 },
}

pub type Result<T> = std::result::Result<T, EgmError>;
