use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |A - A^dag| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("not unitary (max |U^dag U - I| = {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),
    #[error("invalid Choi state: {0}")]
    InvalidChoi(String),
    #[error("Choi state is not pure (largest eigenvalue {largest_eigenvalue})")]
    NotPureChoi { largest_eigenvalue: f64 },
    #[error("superoperation has no Kraus form")]
    NoKrausForm,
    #[error("invalid weights: {0}")]
    WeightError(String),
    #[error("input operation is not CPTP")]
    InputNotCptp,
    #[error("unsupported dimension {0}")]
    UnsupportedDim(usize),
    #[error("conversion undefined: {0}")]
    ConversionUndefined(String),
    #[error("generator exhausted after {attempts} attempts")]
    GeneratorExhausted { attempts: usize },
    #[error("method inapplicable: {0}")]
    MethodInapplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
