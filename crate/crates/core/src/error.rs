use thiserror::Error;

/// A single violated model invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("n_sites must be positive")]
    NoSites,
    #[error("modes_per_site must be positive")]
    NoModes,
    #[error("qubits_per_mode must be positive (n_x = 0)")]
    ZeroQubitsPerMode,
    #[error("{field} has shape {found}, expected {expected}")]
    Shape {
        field: &'static str,
        found: String,
        expected: String,
    },
    #[error("non-finite value in {field}")]
    NonFinite { field: &'static str },
    #[error("asymmetric hopping: V[{i}][{j}] = {forward} but V[{j}][{i}] = {backward}")]
    AsymmetricHopping {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("nonzero hopping diagonal at site {site}")]
    NonzeroDiagonal { site: usize },
    #[error("non-positive frequency {value} at site {site}, mode {mode}")]
    NonPositiveFrequency { site: usize, mode: usize, value: f64 },
    #[error("invalid sampling interval: lo = {lo} > hi = {hi}")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {}", join(.0))]
    Model(Vec<ModelError>),
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("circuit width mismatch: {left} vs {right} qubits")]
    WidthMismatch { left: usize, right: usize },
    #[error("{what} needs {requested} qubits, limit is {limit}")]
    TooManyQubits {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("exact-diagonalization dimension {requested} exceeds cap {limit}")]
    DimensionExceeded { requested: usize, limit: usize },
    #[error("Pauli exponential of the identity string (a pure phase)")]
    IdentityExponential,
    #[error("empty register")]
    EmptyRegister,
    #[error("operator is not Hermitian: imaginary coefficient {0:e}")]
    NotHermitian(f64),
    #[error("trotter plan needs at least one step and a finite, non-negative time")]
    InvalidPlan,
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("shots must be positive")]
    NoShots,
    #[error("invalid recompiler configuration: {0}")]
    InvalidRecompileConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

fn join(errors: &[ModelError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Self {
        Error::Model(vec![e])
    }
}
