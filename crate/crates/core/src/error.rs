use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    Dimension { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian (entrywise defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("k = {k} is out of range for dimension n = {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate pencil: b1 = b2 = 0, every angle is critical")]
    DegeneratePencil,
    #[error("direction is not exposed: s = {s} lies within {gap:e} of an eigenvalue")]
    NonExposedDirection { s: f64, gap: f64 },
    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
