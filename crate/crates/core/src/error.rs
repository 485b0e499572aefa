use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chain length {0} outside 1..=64")]
    ChainLength(u32),
    #[error("link {link} outside 1..={n}")]
    LinkOutOfRange { link: u32, n: u32 },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("vertex set is not a stump set (order ideal containing the root)")]
    NotStumpSet,
    #[error("edge set is not contained in the tree's edges")]
    NotEdgeSet,
    #[error("pair is not comparable in the pruning poset")]
    Incomparable,
    #[error("enumeration needs {needed} terms, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("size bound exceeded: {what} is {got}, limit {limit}")]
    SizeBound { what: &'static str, got: usize, limit: usize },
    #[error("invalid rates: {0}")]
    InvalidRates(String),
    #[error("operation requires {expected} rates")]
    WrongMode { expected: &'static str },
    #[error("invalid time: {0}")]
    InvalidTime(String),
    #[error("subset {0} is not contained in the endpoints of the chain")]
    NotEndpointSubset(String),
    #[error("subset {subset} is not contained in fragment {fragment}")]
    NotInFragment { subset: String, fragment: String },
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
