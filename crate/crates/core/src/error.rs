use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: order {left} vs order {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected a matrix of order {expected}, got order {got}")]
    WrongOrder { expected: usize, got: usize },

    #[error("matrix order {0} outside the supported range 1..=16")]
    UnsupportedOrder(usize),

    #[error("matrix has {got} entries, expected {expected}")]
    EntryCount { expected: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (relative defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not normal (relative defect {defect:e})")]
    NotNormal { defect: f64 },

    #[error("grid of {0} angles is too coarse (minimum 16)")]
    GridTooCoarse(usize),

    #[error("matrices do not commute (defect {defect:e})")]
    NonCommuting { defect: f64 },

    #[error("pair is normal after triangularization; use the diagonal path")]
    NormalPath,

    #[error("matrix is not normalized: numerical radius {radius} differs from 1")]
    NotNormalized { radius: f64 },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("family `{family}` does not generate matrices of order {order}")]
    FamilyOrder { family: &'static str, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
