use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid bit string length {0} (must be 1..=64)")]
    InvalidLength(usize),
    #[error("index {index} does not fit in {n} bits")]
    IndexTooLarge { index: u64, n: usize },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{qubits} qubits exceeds the simulator budget of {max}")]
    QubitBudget { qubits: usize, max: usize },
    #[error("register {start}..{end} does not fit in {num_qubits} qubits")]
    RegisterMismatch {
        start: usize,
        end: usize,
        num_qubits: usize,
    },
    #[error("control qubit {0} overlaps the target register")]
    ControlOverlap(usize),
    #[error("state norm drifted to {0}")]
    NormDrift(f64),
    #[error("point is not a member of the perturbation set at feature {0}")]
    NotAPerturbation(usize),
    #[error("ball ({r_a}, {r_d}) is larger than the string length {n}")]
    BallTooLarge { r_a: usize, r_d: usize, n: usize },
    #[error("empty input")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
