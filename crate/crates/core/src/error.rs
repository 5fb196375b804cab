use thiserror::Error;

/// Errors raised by the functionals, solvers and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid orders: {0}")]
    InvalidOrders(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("order p = 1 is the Shannon limit; {0}")]
    LimitBranch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: {nodes} nodes, need at least {min}")]
    GridTooCoarse { nodes: usize, min: usize },

    #[error("quadrature degeneracy: {0}")]
    Degenerate(String),

    #[error("non-positive value {value:e} at node {node} inside the support")]
    NonPositive { node: usize, value: f64 },

    #[error("invalid flow spec: {0}")]
    InvalidFlow(String),

    #[error("fixed dt = {dt:e} violates the CFL bound; maximal stable dt is {max_dt:e}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("scheme instability at t = {t:e}: value {value:e} at node {node}")]
    Instability { t: f64, node: usize, value: f64 },

    #[error("boundary mass leak {leak:e} exceeds {limit:e} at t = {t:e}")]
    MassLeak { t: f64, leak: f64, limit: f64 },

    #[error("implicit solve failed: {0}")]
    Solve(String),

    #[error("too few snapshots: {have}, need at least {need}")]
    TooFewSnapshots { have: usize, need: usize },

    #[error("check not applicable: {0}")]
    NotApplicable(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the time integration itself (CFL, blow-up, leak).
    pub fn is_numerical_abort(&self) -> bool {
        matches!(
            self,
            Error::Cfl { .. } | Error::Instability { .. } | Error::MassLeak { .. } | Error::Solve(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
