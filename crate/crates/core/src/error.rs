use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Structural variants name the violated hypergraph assumption together with
/// the offending (1-based) indices so that validation reports can be read
/// against the adjacency data directly.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("asymmetry in {matrix}: entry ({i},{j}) differs from ({j},{i}) [undirected edges]")]
    Asymmetry { matrix: String, i: usize, j: usize },

    #[error("self-loop in {matrix}: entry ({i},{j}) must be zero [no self-loops]")]
    SelfLoop { matrix: String, i: usize, j: usize },

    #[error(
        "pairwise graph is disconnected: node {node} is unreachable from node 1 [irreducibility]"
    )]
    Disconnected { node: usize },

    #[error("negative weight {value} in {matrix} at ({i},{j}) [nonnegative weights]")]
    NegativeWeight {
        matrix: String,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("non-finite weight in {matrix} at ({i},{j})")]
    NonFinite { matrix: String, i: usize, j: usize },

    #[error("node {node} has zero generalized degree")]
    ZeroDegree { node: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("at least 2 nodes are required, got {n}")]
    TooFewNodes { n: usize },

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("header declares alpha={declared} but the tensor data {found}")]
    AlphaMismatch { declared: f64, found: String },

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("nonlinearity '{name}' violates assumption: {clause}")]
    AssumptionViolated { name: String, clause: String },

    #[error("trajectory diverged at t={time}: |x{component}| exceeded the blow-up guard")]
    Divergence { time: f64, component: usize },

    #[error("matrix is not symmetric (deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("matrix dimension {n} exceeds the dense solver limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("leading eigenvalue is not simple (spectral gap {gap:e})")]
    Multiplicity { gap: f64 },

    #[error("Perron vector is not strictly positive")]
    NotPositive,

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("Jacobian is singular near x (pivot ratio {ratio:e})")]
    SingularJacobian { ratio: f64 },

    #[error("proportional influence does not hold for this hypergraph")]
    NotProportional,

    #[error("no bistability interval for alpha={alpha}")]
    NoBistability { alpha: f64 },

    #[error("bistability check failed at pi={pi}: {reason}")]
    BistabilityCheck { pi: f64, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
