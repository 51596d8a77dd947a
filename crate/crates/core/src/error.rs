use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("frequency {xi} lies outside the spectrum's range [{lo}, {hi}]")]
    OutOfRange { xi: f64, lo: f64, hi: f64 },

    #[error("non-finite risk {risk} at iteration {iteration}")]
    NonFiniteLoss { iteration: usize, risk: f64 },

    #[error("singular tridiagonal pivot {pivot:e} at row {row}")]
    SingularPivot { row: usize, pivot: f64 },

    #[error("time step {got} does not match the factored step {expected}")]
    StepMismatch { expected: f64, got: f64 },

    #[error("no frequency passed the amplitude floor {floor:e}")]
    EmptyProfile { floor: f64 },

    #[error("traces are inconsistent: {0}")]
    InconsistentTraces(String),

    #[error("empty comparison band: {0}")]
    EmptyBand(String),
}
