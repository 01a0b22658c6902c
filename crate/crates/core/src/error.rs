//! Error types shared across the library.

use thiserror::Error;

/// Errors raised by exact-arithmetic and symbolic operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    /// Attempted to add two scalars carrying different powers of the formal
    /// constant pi. Every verified identity is pi-homogeneous termwise, so a
    /// mixed sum indicates a genuine mathematical error upstream.
    #[error("pi-homogeneity violation: cannot add pi^{0} and pi^{1}")]
    PiMismatch(i64, i64),
    /// Operands were built for different signatures (p, q, r, s).
    #[error("signature mismatch: {0:?} vs {1:?}")]
    SignatureMismatch((u32, u32, u32, u32), (u32, u32, u32, u32)),
    /// A Fock variable combination that does not occur in the model.
    #[error("inadmissible Fock variable: vec_index={vec_index}, witness_index={witness_index}, kind={kind}")]
    InadmissibleVariable {
        vec_index: u32,
        witness_index: u32,
        kind: &'static str,
    },
    /// A basis or multi-index entry outside its declared range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    /// Division by an exact zero.
    #[error("division by zero scalar")]
    DivisionByZero,
}

/// Errors raised by numerical evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    /// A series or continued fraction failed to meet the requested relative
    /// error within the allowed number of terms.
    #[error("failed to converge: {context} (estimated error {estimate:e}, target {target:e})")]
    NoConvergence {
        context: String,
        estimate: f64,
        target: f64,
    },
    /// Parameters outside the supported domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Evaluation requested at (or too close to) a singularity.
    #[error("singular evaluation: {0}")]
    Singularity(String),
}

/// Errors raised by lattice construction and validation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("discriminant {0} is not a negative fundamental discriminant")]
    BadDiscriminant(i64),
    #[error("gram matrix is not hermitian")]
    NotHermitian,
    #[error("gram matrix is singular")]
    SingularGram,
    #[error("lattice is not integral: {0}")]
    NotIntegral(String),
    #[error("signature mismatch: gram has signature ({0},{1}), declared ({2},{3})")]
    SignatureMismatch(u32, u32, u32, u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid lattice configuration: {0}")]
    BadConfig(String),
}
