use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("{requested} qubits requested, the dense simulator supports at most {max}")]
    TooManyQubits { requested: usize, max: usize },

    #[error("post-selection impossible: branch weight {weight:e} is below threshold")]
    PostSelectionImpossible { weight: f64 },

    #[error("degenerate post-selection: 1 + C = {one_plus_c:e}")]
    DegeneratePostSelection { one_plus_c: f64 },

    #[error("angle {0} rad is outside [0, pi]")]
    ThetaOutOfRange(f64),

    #[error("invalid entanglement spec: {0}")]
    InvalidSpec(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("exhaustive enumeration is capped at n = {max} particles, got n = {n}")]
    EnumerationCap { n: usize, max: usize },

    #[error("{0} is not a paradox state for this configuration")]
    NotAParadoxState(String),

    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("histograms cover different outcome spaces ({0} vs {1} bits)")]
    MismatchedOutcomeSpace(usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
