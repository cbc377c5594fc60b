use thiserror::Error;

/// Errors surfaced by grid construction, rearrangement operations, the Robin
/// solver, and the inequality checkers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("n_cells must be even and at least 2, got {0}")]
    BadCellCount(usize),

    #[error("grid function needs {expected} cell values, got {got}")]
    BadValueCount { expected: usize, got: usize },

    #[error("cell value at index {index} must be finite and non-negative, got {value}")]
    BadCellValue { index: usize, value: f64 },

    #[error("Lp exponent must satisfy p >= 1 (or be infinite), got {0}")]
    BadExponent(f64),

    #[error("convex test function parameter out of range: {0}")]
    BadPhiParameter(String),

    #[error("polarization center must lie on the half-grid (a cell boundary or cell midpoint), got b = {0}")]
    CenterOffGrid(f64),

    #[error("polarization center b must lie in (-pi, 0) or (0, pi), got b = {0}")]
    CenterOutOfRange(f64),

    #[error("alpha must be finite and strictly positive, got {0}")]
    BadAlpha(f64),

    #[error("kernel argument {name} = {value} lies outside [-pi, pi]")]
    OutsideDomain { name: &'static str, value: f64 },

    #[error("point {name} = {value} lies outside the reflection interval [{lo}, {hi}]")]
    OutsideInterval {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("oracle refinement must be at least 1 and give at least 4 nodes, got refinement {0}")]
    BadRefinement(usize),

    #[error("tridiagonal system is singular (zero pivot at row {0})")]
    SingularSystem(usize),

    #[error("majorization precondition ({clause}) violated: {detail}")]
    MajorizationPrecondition { clause: char, detail: String },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("unknown tolerance name {0:?}")]
    UnknownTolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
