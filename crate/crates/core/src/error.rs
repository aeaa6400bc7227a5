use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid highest weight {omega:?}: entries must satisfy w_1 >= ... >= w_n >= 0")]
    InvalidWeight { omega: Vec<i64> },

    #[error("tensor space of dimension {required} (= {n}^{k}) exceeds the configured budget {budget}")]
    TensorBudget {
        n: usize,
        k: usize,
        required: u128,
        budget: u128,
    },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not symplectic (deviation {deviation:.3e})")]
    NotSymplectic { deviation: f64 },

    #[error("matrix is not symmetric (deviation {deviation:.3e})")]
    NotSymmetric { deviation: f64 },

    #[error("point is outside the bounded domain (min eigenvalue of I - w*w is {min_eig:.3e})")]
    NotInDisk { min_eig: f64 },

    #[error("Cz + D is numerically singular (condition number {cond:.3e}); invalid input pair")]
    SingularCocycle { cond: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("element has no finite order modulo +-I within bound {bound}")]
    OrderBoundExceeded { bound: usize },

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
