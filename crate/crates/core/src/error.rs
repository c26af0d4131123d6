use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("sort mismatch in {context}: {message}")]
    SortMismatch { context: String, message: String },

    #[error("unknown sort `{0}`")]
    UnknownSort(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("sort index {0} out of range")]
    SortOutOfRange(usize),

    #[error("tuple type mismatch: {0}")]
    TypeMismatch(String),

    #[error("element {0} is not in the structure")]
    NotInStructure(String),

    #[error("assignment does not match free variables: {0}")]
    BadAssignment(String),

    #[error("duplicate tuple {tuple} in relation `{relation}`")]
    DuplicateTuple { relation: String, tuple: String },

    #[error("operation requires a {expected} structure")]
    WrongStructureKind { expected: &'static str },

    #[error("budget field `{0}` must be positive")]
    ZeroBudget(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("formula set contains a non-binary formula (index {0})")]
    NonBinaryFormula(usize),

    #[error("formula level {level} exceeds the allowed level {allowed}")]
    LevelTooHigh { level: usize, allowed: usize },

    #[error("flip-uniqueness violated for {relation} at tuple {tuple} with prefix {prefix}")]
    FlipViolation {
        relation: String,
        tuple: String,
        prefix: String,
    },

    #[error("limit function returned non-boolean value {value} at ({n}, {s})")]
    NonBoolean { n: u64, s: u64, value: u64 },

    #[error("finite chain of order {0} is not a prime power")]
    NotPrimePower(u64),

    #[error("non-bipartite edge {0}")]
    NonBipartiteEdge(String),

    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),

    #[error("duplicate code {0} in registry")]
    DuplicateCode(u64),
}
