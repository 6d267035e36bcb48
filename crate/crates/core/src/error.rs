use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the numerical layers.
///
/// The variants split into three families that the scenario runner maps to
/// distinct exit codes: invalid input, numerical aborts and bookkeeping/IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("axis {axis} out of range for a {dims}D grid")]
    AxisOutOfRange { axis: usize, dims: usize },
    #[error("derivative order {0} not supported (expected 1 or 2)")]
    InvalidOrder(u32),
    #[error("spectral differentiation requires a periodic boundary")]
    SchemeBoundaryMismatch,
    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("under-resolved initial state: {0}")]
    UnderResolved(String),
    #[error("state has zero norm after construction")]
    ZeroNorm,
    #[error("norm drift {drift:.3e} exceeds {limit:.1e} after {steps} steps")]
    NormDrift { drift: f64, limit: f64, steps: usize },
    #[error("time step violates resolution limit: {0}")]
    Cfl(String),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("linear solve did not converge: {0}")]
    SolverFailure(String),
    #[error("degenerate state: {0}")]
    Degenerate(String),
    #[error("missing time slabs: {0}")]
    MissingSlabs(String),
    #[error("time mismatch: {0}")]
    TimeMismatch(String),
    #[error("non-square two-body grid: {0}")]
    NonSquareGrid(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("no bundle found in {0}")]
    NoBundle(String),
    #[error("incomplete bundle, missing: {0}")]
    IncompleteBundle(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that stop a run because the numerics became unreliable
    /// (norm drift, time-step limits, stiffness rejections, solver breakdown).
    pub fn is_numerical_abort(&self) -> bool {
        matches!(
            self,
            Error::NormDrift { .. }
                | Error::Cfl(_)
                | Error::StepRejected(_)
                | Error::SolverFailure(_)
                | Error::NonFinite(_)
        )
    }
}
