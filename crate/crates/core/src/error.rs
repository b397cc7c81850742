use alloc::string::String;

use num_bigint::BigInt;

/// Every failure the library can report.
///
/// Variants carry enough context to print a useful message; [`Error::code`]
/// gives a stable identifier for machine-readable output.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: BigInt, modulus: BigInt },
    #[error("expected a positive integer, got {0}")]
    NonPositive(BigInt),
    #[error("matrix sizes do not match ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("invalid index set: {0}")]
    BadIndexSet(String),
    #[error("unsupported rank {0}")]
    BadRank(usize),
    #[error("root does not belong to rank {rank}: {detail}")]
    BadRoot { rank: usize, detail: String },
    #[error("letter {letter} is not a simple reflection of rank {rank}")]
    BadLetter { letter: usize, rank: usize },
    #[error("matrix is not in the long-word Bruhat cell: {0}")]
    NotInBigCell(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("matrix has determinant {0}, expected 1")]
    NotSpecialLinear(BigInt),
    #[error("2x2 factor {index} has determinant {det}, expected 1")]
    NotUnimodular { index: usize, det: BigInt },
    #[error("factor {index} has lower-left entry {found}, cell requires {expected}")]
    CellMismatch {
        index: usize,
        expected: BigInt,
        found: BigInt,
    },
    #[error("gcd refinement is not integral: {0}")]
    NonIntegralRefinement(String),
    #[error("cell data is not positive: {0}")]
    NegativeCellData(String),
    #[error("coprimality precondition violated: {0}")]
    NotCoprime(String),
    #[error("enumeration budget exceeded: needs more than {budget} search nodes")]
    BudgetExceeded { budget: u64 },
    #[error("Kloosterman argument is not integral: {0}")]
    NonIntegralArgument(String),
    #[error("matrix must have even size, got {0}")]
    OddSize(usize),
    #[error("unsupported query: {0}")]
    Unsupported(String),
}

impl Error {
    /// Stable identifier used by the CLI in JSON error documents.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::NotInvertible { .. } => "NotInvertible",
            Error::NonPositive(_) => "NonPositive",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::BadIndexSet(_) => "BadIndexSet",
            Error::BadRank(_) => "BadRank",
            Error::BadRoot { .. } => "BadRoot",
            Error::BadLetter { .. } => "BadLetter",
            Error::NotInBigCell(_) => "NotInBigCell",
            Error::InternalInconsistency(_) => "InternalInconsistency",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::NotSpecialLinear(_) => "NotSpecialLinear",
            Error::CellMismatch { .. } => "CellMismatch",
            Error::NonIntegralRefinement(_) => "NonIntegralRefinement",
            Error::NegativeCellData(_) => "NegativeCellData",
            Error::NotCoprime(_) => "NotCoprime",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::NonIntegralArgument(_) => "NonIntegralArgument",
            Error::OddSize(_) => "OddSize",
            Error::Unsupported(_) => "Unsupported",
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
