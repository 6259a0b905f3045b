use thiserror::Error;

use crate::graph::Edge;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertex {vertex} out of range for a graph on {order} vertices")]
    VertexOutOfRange { vertex: usize, order: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Edge),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raised when a commit would reuse a host edge or leave the permitted edge set.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("host edge {0:?} is already used")]
    Conflict(Edge),
    #[error("host edge {0:?} lies outside the permitted edge set")]
    OutsideHost(Edge),
    #[error("embedding is not valid against the host ({0} violations)")]
    InvalidEmbedding(usize),
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("maximum degree {max_degree} cannot support a tree on {n} vertices")]
    InvalidDegree { n: usize, max_degree: usize },
    #[error("invalid range: need 1 <= lo <= n, got lo={lo}, n={n}")]
    InvalidRange { lo: usize, n: usize },
    #[error("cycle length {0} is below 3")]
    CycleTooShort(usize),
    #[error("cycle lengths sum to {sum}, expected {n}")]
    WrongLengthSum { sum: usize, n: usize },
    #[error("component of size {size} is neither a tree nor a cycle and exceeds the bound {bound}")]
    UnsupportedFamily { size: usize, bound: usize },
    #[error("separator needs {needed} vertices, budget is {budget}")]
    SeparatorBudget { needed: usize, budget: usize },
    #[error("greedy scan found only {found} of {wanted} 2-independent vertices")]
    Infeasible { wanted: usize, found: usize },
    #[error("input graph {index} has {order} vertices, more than n = {n}")]
    TooLarge { index: usize, order: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BalanceError {
    #[error("need at least one part")]
    NoParts,
    #[error("coordinate outside [0,1] in vector {payload}")]
    CoordinateRange { payload: usize },
    #[error("vectors have mismatched dimensions")]
    Dimension,
    #[error("achieved discrepancy {achieved} exceeds tolerance {tolerance}")]
    ToleranceUnmet { achieved: f64, tolerance: f64 },
    #[error("cell capacity {capacity} cannot hold the components (largest {largest}, total {total})")]
    CellOverflow {
        capacity: usize,
        largest: usize,
        total: usize,
    },
}

#[derive(Debug, Error)]
pub enum SliceError {
    #[error("invalid pipeline constants: {0}")]
    Constants(String),
    #[error("{zones} zones of {size} vertices do not fit into {n} vertices")]
    ZonesDoNotFit { zones: usize, size: usize, n: usize },
    #[error("layer {layer} has {observed} edges, outside {lo:.1}..{hi:.1}")]
    Marginal {
        layer: usize,
        observed: usize,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum CliqueError {
    #[error("found {found} clique factors, need at least {required}")]
    InsufficientFactors { found: usize, required: usize },
    #[error("cell packing failed after {restarts} restarts")]
    CellPackingFailed { restarts: usize },
    #[error("bucket superposition failed with C = {c}")]
    BucketSuperposition { c: usize },
    #[error("spread violation: {counter} at {location} is {value}, cap {cap:.2}")]
    SpreadViolation {
        counter: &'static str,
        location: String,
        value: usize,
        cap: f64,
    },
    #[error("instance {instance} needs {needed} cell vertices, factor offers {available}")]
    FactorTooSmall {
        instance: usize,
        needed: usize,
        available: usize,
    },
    #[error("instance {instance}: {vertices} vertices could not be placed")]
    Unplaced { instance: usize, vertices: usize },
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("no zone candidate for separator vertex {vertex} of instance {instance} ({trace})")]
    NoCandidate {
        instance: usize,
        vertex: usize,
        trace: String,
    },
    #[error("auxiliary graph of instance {instance} has {left} left and {right} right vertices")]
    SizeMismatch {
        instance: usize,
        left: usize,
        right: usize,
    },
    #[error("found only {found} of {wanted} edge-disjoint perfect matchings")]
    Shortfall { found: usize, wanted: usize },
    #[error("completion of instance {0} failed after all retries")]
    CompletionFailed(usize),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Umbrella error for callers that drive several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Clique(#[from] CliqueError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
