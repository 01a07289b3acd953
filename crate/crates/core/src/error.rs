use thiserror::Error;

use crate::instance::NodeId;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arc ({i},{j}) has negative fixed cost {q}")]
    NegativeFixedCost { i: NodeId, j: NodeId, q: String },
    #[error("arc ({i},{j}) appears more than once")]
    DuplicateArc { i: NodeId, j: NodeId },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("capacity of node {node} is not a nonnegative integer: {value}")]
    NonIntegerCapacity { node: NodeId, value: String },
    #[error("arc ({i},{j}) references a node outside 1..={n}")]
    UnknownNode { i: NodeId, j: NodeId, n: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),
    #[error("corrupt dp tables: {0}")]
    CorruptTables(String),
    #[error("infeasible flow: {0}")]
    InfeasibleFlow(String),
    #[error("point is not in the LP relaxation: {0}")]
    NotInP(String),
    #[error("arc ({i},{j}) has zero capacity but carries flow")]
    ZeroCapacityArcWithFlow { i: NodeId, j: NodeId },
    #[error("point is not in the single-node polyhedron: {0}")]
    NotInQsn(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("search space bound {bound} exceeds limit {limit}")]
    BudgetExceeded { bound: String, limit: u128 },
    #[error("invalid 3-partition input: {0}")]
    InvalidThreePartition(String),
    #[error("3-partition input with n={n} is above the exhaustive bound {max}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("demand/supply target unreachable: {0}")]
    UnreachableTarget(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("name longer than {max} characters: `{name}`")]
    NameTooLong { name: String, max: usize },
    #[error("bound of `{0}` is not a terminating decimal")]
    InexactBound(String),
    #[error("capacity arithmetic overflow")]
    Overflow,
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
