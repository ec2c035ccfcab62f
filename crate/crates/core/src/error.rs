use thiserror::Error;

/// Errors raised while loading instances, building generators and evaluating bounds.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed document: {0}")]
    MalformedDocument(String),

    #[error("degenerate spectrum: energies {index} and {next} differ by {gap:e} (tolerance {tol:e})", next = index + 1)]
    DegenerateSpectrum { index: usize, gap: f64, tol: f64 },

    #[error("coupling {index} is not Hermitian (relative residual {residual:e})")]
    NonHermitianCoupling { index: usize, residual: f64 },

    #[error("empty couplings: {0}")]
    EmptyCouplings(String),

    #[error("unknown bath kind '{0}'")]
    UnknownBathKind(String),

    #[error("tabulated bath has no value at Bohr frequency {0}")]
    MissingBathFrequency(f64),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("generator is not primitive: {0}")]
    NotPrimitive(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("frequency {0} is not a Bohr frequency of the instance")]
    UnknownFrequency(f64),

    #[error("variance block at frequency {0} has a zero diagonal entry")]
    SingularVariance(f64),

    #[error("transition graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("vertex {0} is not in the tree")]
    VertexNotInTree(usize),

    #[error("kernel of B is not contained in kernel of A (residual {0:e})")]
    KernelMismatch(f64),

    #[error("tree normalization vanishes for the block at frequency {nu}")]
    DegenerateNormalization { nu: f64 },

    #[error("no valid lower bound: {0}")]
    NoValidBound(String),

    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

pub type Result<T> = std::result::Result<T, Error>;
