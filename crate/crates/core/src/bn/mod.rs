//! Discrete Bayesian networks and exact inference.

mod enumerate;
mod junction_tree;
mod network;

pub use enumerate::{brute_force_marginals, MAX_JOINT_STATES};
pub use junction_tree::{Clique, JunctionTree, IMPOSSIBLE_EVIDENCE_THRESHOLD};
pub use network::{ConditionalTable, DiscreteNode, EvidenceAssignment, Network, State, ROW_SUM_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnError {
    #[error("directed cycle through node {0}")]
    CycleDetected(String),
    #[error("no conditional table for node {0}")]
    MissingTable(String),
    #[error("more than one table for node {0}")]
    DuplicateTable(String),
    #[error("row {row} of the table for {node} is not a distribution (sum {sum})")]
    NonStochasticRow { node: String, row: usize, sum: f64 },
    #[error("table for {node} has {found} entries, expected {expected}")]
    TableShape { node: String, expected: usize, found: usize },
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("node {node} lists unknown parent {parent}")]
    UnknownParent { node: String, parent: String },
    #[error("node {node} lists parent {parent} twice")]
    DuplicateParent { node: String, parent: String },
    #[error("node {0} needs at least two states")]
    TooFewStates(String),
    #[error("invalid states for {node}: {reason}")]
    InvalidStates { node: String, reason: String },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("state {state} out of range for {node} ({cardinality} states)")]
    StateOutOfRange { node: String, state: usize, cardinality: usize },
    #[error("evidence has zero probability")]
    ImpossibleEvidence,
    #[error("joint state space of {0} configurations is too large to enumerate")]
    StateSpaceTooLarge(u128),
    #[error("clique potential of {0} entries is too large")]
    CliqueTooLarge(usize),
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("internal inconsistency: {0}")]
    Internal(String),
}
