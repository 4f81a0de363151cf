use thiserror::Error;

/// Errors raised by the library. Failed checks are reported in report
/// structs instead; these are for malformed input and impossible requests.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("generator set is empty")]
    NoGenerators,
    #[error("group closure exceeds the size cap of {cap} elements")]
    SizeCap { cap: usize },
    #[error("state count {states} exceeds the state cap of {cap}")]
    StateCap { states: u128, cap: u128 },
    #[error("unknown built-in group {0:?}")]
    UnknownGroup(String),
    #[error("element {0} is not in the group")]
    NotInGroup(String),
    #[error("set is not a subgroup")]
    NotSubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("generators do not generate the group ({reached} of {order} reached)")]
    NotGenerating { reached: usize, order: usize },
    #[error("epsilon out of range: {0}")]
    EpsilonOutOfRange(String),
    #[error("malformed subgroup chain: {0}")]
    BadChain(String),
    #[error("invalid table: {0}")]
    BadTable(String),
    #[error("mode mismatch")]
    ModeMismatch,
    #[error("element must have shift 0")]
    NonzeroShift,
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("index sequences invalid: {0}")]
    BadIndices(String),
    #[error("base group fails statement {0}")]
    BaseRejected(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
