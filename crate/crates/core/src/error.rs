use thiserror::Error;

/// Errors raised by graph construction and by the graph algorithms when a
/// caller violates a precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("node index {0} is out of range")]
    UnknownNode(usize),
    #[error("unknown node name `{0}`")]
    UnknownName(String),
    #[error("node names must be non-empty")]
    EmptyName,
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("directed cycle through edge {0} -> {1}")]
    DirectedCycle(String, String),
    #[error("order must list every observed node exactly once: {0}")]
    OrderCoverage(String),
    #[error("latent node `{0}` cannot appear in an ordering")]
    LatentInOrder(String),
    #[error("order is not topological: {0} -> {1} but {1} comes first")]
    NotTopological(String, String),
    #[error("graph still has latent nodes; project it first")]
    HasLatents,
    #[error("every node is latent; nothing to project onto")]
    AllLatent,
    #[error("sets must be pairwise disjoint")]
    NotDisjoint,
    #[error("{0} must be non-empty")]
    EmptySet(&'static str),
    #[error("set is not ancestral")]
    NotAncestral,
    #[error("{0}")]
    Precondition(String),
    #[error("{what}: {n} nodes exceeds the cap of {cap} ({candidates} candidates)")]
    CapExceeded { what: &'static str, n: usize, cap: usize, candidates: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
