use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("qubit {qubit} out of range for {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("block index {index} out of range ({blocks} blocks)")]
    BlockOutOfRange { index: usize, blocks: usize },
    #[error("parameter index {index} out of range ({params} parameters)")]
    ParamOutOfRange { index: usize, params: usize },
    #[error("blocks {0} and {1} are not connected")]
    NotAnEdge(usize, usize),
    #[error("block {0} is not a head block")]
    NotAHead(usize),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("size limit: {0}")]
    SizeLimit(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
