use thiserror::Error;

use crate::structure::FinStructure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("element {element} is outside the carrier of size {carrier}")]
    InvalidSubset { element: usize, carrier: usize },

    #[error("structures have different signatures")]
    SignatureMismatch,

    #[error("amalgamation embeddings do not share a source structure")]
    AmalgamationBaseMismatch,

    #[error("inner embedding target does not match outer embedding source")]
    CompositionMismatch,

    #[error("map is not an embedding: {0}")]
    NotAnEmbedding(String),

    #[error("partial map does not cover element {0} of the embedding image")]
    DomainNotCovered(usize),

    #[error("partial automorphisms overlap at element {0}")]
    DomainOverlap(usize),

    #[error("map is not a partial automorphism: {0}")]
    NotAPartialAutomorphism(String),

    #[error("embedding is outside the colouring domain")]
    OutOfDomain,

    #[error("invalid colouring: {0}")]
    InvalidColouring(String),

    #[error("witness does not verify: {0}")]
    WitnessInvalid(String),

    #[error("EPPA extension failed: {0}")]
    EppaContractViolated(String),

    #[error("pigeonhole shortfall: best colour pair realized in {achieved} copies, {required} required")]
    InsufficientCopies { achieved: usize, required: usize },

    #[error("carrier budget {budget} exhausted before the extension property closed")]
    BudgetExceeded { budget: usize, partial: Box<FinStructure>, unrealized: usize },

    #[error("class is not closed under {0}")]
    NotClosed(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
