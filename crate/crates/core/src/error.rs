use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("register of {0} qubits is outside 1..={max}", max = crate::MAX_QUBITS)]
    QubitCount(usize),
    #[error("basis index {index} out of range for {n_qubits} qubits")]
    BasisOutOfRange { index: u64, n_qubits: usize },
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate targets must be distinct (qubit {0} repeated)")]
    DuplicateTarget(usize),
    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },
    #[error("parameter vector has length {found}, ansatz needs {expected}")]
    ParameterLength { expected: usize, found: usize },
    #[error("{what} of {n_qubits} qubits exceeds the cap of {cap}")]
    TooLarge { what: &'static str, n_qubits: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("objective returned a non-finite value at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
    #[error("no unique-solution instance after {attempts} attempts (n_vars={n_vars}, seed={seed})")]
    Generation { n_vars: usize, seed: u64, attempts: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
