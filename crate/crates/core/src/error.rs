use thiserror::Error;

/// Errors produced by state construction, optimisation and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 2, 4 or 8")]
    InvalidDimension(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("state vector norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("tensor product of dimensions {0} and {1} exceeds 8")]
    DimensionOverflow(usize, usize),
    #[error("invalid subsystem selection {keep:?} for {qubits} qubits")]
    InvalidSubsystems { keep: Vec<usize>, qubits: usize },
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("basis is not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("rejection sampling for {0} failed after {1} attempts")]
    SamplingFailed(&'static str, usize),
    #[error("no sign change of the detection verdict on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
