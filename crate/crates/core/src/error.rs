use thiserror::Error;

use crate::scalars::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("σ-polynomial is zero")]
    ZeroSigmaPoly,
    #[error("element {0} is not in the index order")]
    ElementNotInOrder(String),
    #[error("automorphism does not fit the order: {0}")]
    IncompatibleAuto(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("vector does not belong to the model")]
    ModelMismatch,
    #[error("the zero vector has no valuation")]
    ZeroVector,
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(Rational),
    #[error("unsupported scalar field: {0}")]
    UnsupportedScalarField(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("σ-polynomial is not absolutely monotone")]
    NotMonotone,
    #[error("interval endpoints must satisfy a < b")]
    InvalidInterval,
    #[error("the equation is solvable in the model: {0}")]
    Solvable(String),
    #[error("cut side-query cannot be decided: {0}")]
    CutQueryUndecidable(String),
    #[error("equation is not a normalizable degree-1 equation: {0}")]
    NotNormalized(String),
    #[error("not a substructure: {0}")]
    NotASubstructure(String),
    #[error("action is not order preserving: {0}")]
    ActionNotOrderPreserving(String),
    #[error("no solution produced: {0}")]
    SolveIncomplete(String),
    #[error("φ and ψ both hold at sequence position {0}")]
    DisjointnessViolated(usize),
    #[error("variable {0} is not bound by the assignment")]
    UnboundVariable(usize),
    #[error("unknown suite {0}")]
    UnknownSuite(String),
    #[error("stage {stage}: {source}")]
    Stage { stage: usize, source: Box<Error> },
}

impl Error {
    pub fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
