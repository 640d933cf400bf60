use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("defining polynomial is not squarefree modulo {0}; place construction unsupported")]
    RamifiedOrNonMonogenic(u64),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("argument outside the convergence domain: {0}")]
    OutsideConvergenceDomain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("norm matrix is singular or not injective")]
    SingularNormSpec,
    #[error("slope of the zero bundle is undefined")]
    ZeroBundle,
    #[error("not a subspace: {0}")]
    NotASubspace(String),
    #[error("index length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("maximal slope is only a lower bound for this bundle")]
    InexactMaxSlope,
    #[error("rank could not be certified at the working precision")]
    RankUncertified,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("search budget exceeded")]
    SearchBudgetExceeded { best: Option<Vec<BigInt>> },
    #[error("invalid value for the frak-e parameter: {0}")]
    InvalidFrakE(String),
    #[error("bound kind mismatch: {0}")]
    KindMismatch(String),
    #[error("input exceeds desk scale: {0}")]
    DeskScaleExceeded(String),
    #[error("all linear forms are indistinguishable from zero at the maximal precision")]
    DegenerateInstance,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
