use thiserror::Error;

/// Errors raised while reading a fact document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unknown predicate {pred}/{arity}")]
    UnknownPredicate {
        pred: String,
        arity: usize,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: bad argument in {pred}: {message}")]
    BadArgument {
        pred: String,
        message: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: dangling reference: {message}")]
    Dangling {
        message: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: conflicting fact: {message}")]
    Conflicting {
        message: String,
        line: usize,
        col: usize,
    },
    #[error("train {train}: {message}")]
    DegreeMismatch { train: String, message: String },
    #[error("missing fact: {0}")]
    Missing(String),
    #[error("train {0} has no edges, nodes, start or end")]
    EmptyTrain(String),
}

/// Precomputed area or mandatory-edge facts that do not hold.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreprocessError {
    #[error("precomputed resource areas of {train} on {resource}: {property}")]
    InvalidCoverage {
        train: String,
        resource: String,
        property: String,
    },
    #[error("precomputed mandatory edge {edge} of {train} is not on every path")]
    InvalidMandatory { train: String, edge: String },
    #[error("train {0} has a cyclic subgraph")]
    Cyclic(String),
}

/// Faults detected while building the constraint model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("threshold {threshold} for {train} at node {node} exceeds the latest arrival {latest}")]
    ThresholdBeyondLatest {
        train: String,
        node: String,
        threshold: i64,
        latest: i64,
    },
    #[error("connection {0} references a node the train cannot visit")]
    UnvisitableConnection(String),
    #[error("constraint weight {0} is out of range")]
    WeightOutOfRange(i64),
}

/// Misuse of the difference-logic engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("checkpoint {0} was already consumed or never taken")]
    StaleCheckpoint(usize),
    #[error("variable has no lower bound through the zero variable")]
    Unbounded,
    #[error("minimal model requested on an inconsistent system")]
    Inconsistent,
    #[error("arithmetic overflow in difference constraints")]
    Overflow,
}

/// The brute-force oracle refused an instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration needs {needed} combinations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("instance not supported by the oracle: {0}")]
    Unsupported(String),
}

/// Problems reading a solution document.
#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("malformed solution JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed term {0:?} in solution")]
    Term(String),
}
