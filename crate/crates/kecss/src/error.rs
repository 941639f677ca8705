use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("self-loop on vertex {vertex} (edge {edge})")]
    SelfLoop { edge: EdgeId, vertex: VertexId },
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(EdgeId),
    #[error("edge {edge} references vertex {vertex} but n = {n}")]
    VertexOutOfRange { edge: EdgeId, vertex: VertexId, n: usize },
    #[error("edge {edge} has weight {weight} above the bound {bound}")]
    WeightTooLarge { edge: EdgeId, weight: u64, bound: u64 },
    #[error("edge subset references edge {0}, which the graph does not contain")]
    InvalidSubset(EdgeId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("node {node} exceeded the budget on edge {edge} in round {round}: {words} words > {budget}")]
    BudgetViolation { node: VertexId, edge: EdgeId, round: u64, words: u64, budget: u64 },
    #[error("node {node} sent two messages on edge {edge} in round {round}")]
    DuplicateSend { node: VertexId, edge: EdgeId, round: u64 },
    #[error("node {node} used port {port}, which does not exist")]
    BadPort { node: VertexId, port: usize },
    #[error("no termination after {0} rounds")]
    MaxRounds(u64),
    #[error("overlay is not a tree: {0}")]
    NotATree(String),
    #[error("{what} refused: size {actual} exceeds guard {limit}")]
    SizeGuard { what: &'static str, limit: usize, actual: usize },
    #[error("edge {0} is not a tree edge")]
    NotTreeEdge(EdgeId),
    #[error("edge {edge} does not cover tree edge {tree_edge}")]
    DoesNotCover { edge: EdgeId, tree_edge: EdgeId },
    #[error("edge {0} already belongs to the subgraph")]
    EdgeInSubgraph(EdgeId),
    #[error("subgraph min cut is {actual}, expected {expected}")]
    MinCutMismatch { expected: usize, actual: usize },
    #[error("graph is not {0}-edge-connected")]
    NotKConnected(usize),
    #[error("tree packing is empty")]
    EmptyPacking,
    #[error("value of {bits} bits does not fit the per-message budget of {budget_bits} bits")]
    ValueTooWide { bits: u64, budget_bits: u64 },
    #[error("tree packing failed validation: {0}")]
    PackingValidation(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("augmentation ended before the subgraph became {0}-edge-connected")]
    AugmentationIncomplete(usize),
}
