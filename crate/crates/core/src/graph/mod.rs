//! Undirected graphs, broadcast instances and their validation.
//!
//! Node ids are 1-based throughout the crate, matching the SteinLib and
//! edge-list file formats.

mod generate;
pub mod io;

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

pub use generate::{generate_random, GeneratorConfig};

/// 1-based node identifier.
pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node id {node} out of range 1..={n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("graph must have at least one node")]
    Empty,
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<InstanceViolation>),
}

fn join_violations(v: &[InstanceViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Simple undirected graph on nodes `1..=n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted; neighbor lists are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(GraphError::NodeOutOfRange { node: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &list {
            adjacency[u - 1].push(v);
            adjacency[v - 1].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            edges: list,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.node_count()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Both orientations of every edge, in ascending `(u, v)` order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v - 1]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v - 1].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        (1..=self.node_count()).contains(&v)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains_node(u) && self.contains_node(v) && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([1]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v - 1] {
                    seen[v - 1] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == n
    }

    /// Copy of the graph without the edges having both endpoints in `inside`.
    pub fn without_internal_edges(&self, inside: &[bool]) -> Graph {
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| !(inside[u - 1] && inside[v - 1]));
        Graph::from_edges(self.node_count(), edges).expect("subgraph of a valid graph")
    }
}

/// A graph together with its ordered, nonempty list of source nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub sources: Vec<NodeId>,
    pub name: String,
    is_source: Vec<bool>,
}

impl Instance {
    /// Builds an instance without checking it; see [`validate_instance`].
    pub fn new(graph: Graph, sources: Vec<NodeId>, name: impl Into<String>) -> Self {
        let mut is_source = vec![false; graph.node_count()];
        for &s in &sources {
            if graph.contains_node(s) {
                is_source[s - 1] = true;
            }
        }
        Self {
            graph,
            sources,
            name: name.into(),
            is_source,
        }
    }

    /// Builds an instance and rejects it unless [`validate_instance`] passes.
    pub fn checked(
        graph: Graph,
        sources: Vec<NodeId>,
        name: impl Into<String>,
    ) -> Result<Self, GraphError> {
        let inst = Self::new(graph, sources, name);
        validate_instance(&inst).map_err(GraphError::Invalid)?;
        Ok(inst)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    /// Number of nodes that still have to be informed, `n - σ`.
    pub fn uninformed_count(&self) -> usize {
        self.node_count() - self.source_count()
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.is_source[v - 1]
    }

    /// Source membership indexed by `id - 1`.
    pub fn source_mask(&self) -> &[bool] {
        &self.is_source
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceViolation {
    NoSources,
    SourceOutOfRange(NodeId),
    DuplicateSource(NodeId),
    Disconnected,
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoSources => write!(f, "no sources"),
            Self::SourceOutOfRange(v) => write!(f, "source {v} out of range"),
            Self::DuplicateSource(v) => write!(f, "duplicate source {v}"),
            Self::Disconnected => write!(f, "graph disconnected"),
        }
    }
}

/// Checks connectivity and the source list, reporting every violation found.
pub fn validate_instance(inst: &Instance) -> Result<(), Vec<InstanceViolation>> {
    let mut violations = Vec::new();
    if inst.sources.is_empty() {
        violations.push(InstanceViolation::NoSources);
    }
    let mut seen = vec![false; inst.node_count()];
    for &s in &inst.sources {
        if !inst.graph.contains_node(s) {
            violations.push(InstanceViolation::SourceOutOfRange(s));
        } else if std::mem::replace(&mut seen[s - 1], true) {
            violations.push(InstanceViolation::DuplicateSource(s));
        }
    }
    if !inst.graph.is_connected() {
        violations.push(InstanceViolation::Disconnected);
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Source degrees in source order, followed by the non-source degrees in
/// non-increasing order.
pub fn ordered_degree_sequence(inst: &Instance) -> Vec<usize> {
    let g = &inst.graph;
    let mut degrees: Vec<usize> = inst.sources.iter().map(|&s| g.degree(s)).collect();
    let mut rest: Vec<usize> = g
        .nodes()
        .filter(|&v| !inst.is_source(v))
        .map(|v| g.degree(v))
        .collect();
    rest.sort_unstable_by(|a, b| b.cmp(a));
    degrees.extend(rest);
    degrees
}

/// Small named graph families used by tests, examples and the CLI.
pub mod families {
    use super::{Graph, NodeId};

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|u| (u, u + 1))).expect("path")
    }

    pub fn complete(n: usize) -> Graph {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).expect("complete graph")
    }

    /// Star with center 1 and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (2..=leaves + 1).map(|v| (1, v))).expect("star")
    }

    /// Hypercube of dimension `dim`; node `i + 1` carries bit label `i`.
    pub fn hypercube(dim: u32) -> Graph {
        let n = 1usize << dim;
        let edges = (0..n).flat_map(|i| {
            (0..dim).filter_map(move |b| {
                let j = i ^ (1 << b);
                (i < j).then_some((i + 1, j + 1) as (NodeId, NodeId))
            })
        });
        Graph::from_edges(n, edges).expect("hypercube")
    }
}
