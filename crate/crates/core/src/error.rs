use thiserror::Error;

/// Errors raised by construction and verification stages.
///
/// Verification *suites* never error; they record named residuals in a
/// [`crate::VerificationReport`]. Errors are reserved for inputs on which a
/// construction cannot proceed at all (dimension mismatches, non-positive
/// Gram matrices, unsolvable structure maps, malformed files).
#[derive(Debug, Error)]
pub enum WqgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite number encountered: {0}")]
    NonFiniteNumber(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("linear algebra backend failure: {0}")]
    Backend(String),
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("canonical idempotent violation: {0}")]
    IdempotentViolation(String),
    #[error("leg of the canonical idempotent is not a unital *-subalgebra: {0}")]
    LegNotSubalgebra(String),
    #[error("leg antipode unsolvable: {0}")]
    AntipodeUnsolvable(String),
    #[error("distinguished functional is not positive and faithful: {0}")]
    DistinguishedFunctionalNotPositive(String),
    #[error("counit unsolvable: {0}")]
    CounitUnsolvable(String),
    #[error("no nonzero invariant functional exists: {0}")]
    NoIntegral(String),
    #[error("invariant cone is nonzero but contains no faithful positive candidate: {0}")]
    NoFaithfulPositiveIntegral(String),
    #[error("antipode span condition fails: {0}")]
    SpanDeficient(String),
    #[error("antipode cross-checks inconsistent: {0}")]
    AntipodeInconsistent(String),
    #[error("functional is not faithful: {0}")]
    NotFaithful(String),
    #[error("base bridge map is not unitary: {0}")]
    BridgeNotUnitary(String),
    #[error("partial isometry violation: {0}")]
    PartialIsometryViolation(String),
    #[error("modular element is not positive: {0}")]
    DeltaNotPositive(String),
    #[error("invalid group table: {0}")]
    InvalidGroupTable(String),
    #[error("invalid groupoid: {0}")]
    InvalidGroupoid(String),
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl WqgError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        WqgError::SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}
