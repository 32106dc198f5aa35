//! Statement graphs, prime detection and the contraction/expansion operations.
//!
//! A prime is an induced, closed subgraph isomorphic to one of the non-trivial
//! statement graphs. Closedness means only the source may have in-neighbors
//! outside the prime, only the sink may have out-neighbors outside it, and
//! every cycle edge entering the source comes from one of its out-neighbors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{is_valid_name, CycleEdgeSet, FlowGraph, VertexId};
use crate::work::WorkGraph;

/// The seven statement graphs of classical structured programming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StatementKind {
    Trivial,
    Sequence,
    IfThen,
    IfThenElse,
    /// Multiway selection with `p >= 3` arms.
    Case(u32),
    While,
    Repeat,
}

impl StatementKind {
    /// The integer that stands for this statement graph in canonical codes.
    pub fn type_code(self) -> u32 {
        match self {
            StatementKind::Trivial => 1,
            StatementKind::Sequence => 2,
            StatementKind::IfThen => 3,
            StatementKind::While => 4,
            StatementKind::Repeat => 5,
            StatementKind::IfThenElse => 6,
            StatementKind::Case(p) => p + 4,
        }
    }

    /// If-then-else for two arms, case for more.
    pub fn branching(arms: u32) -> Self {
        if arms == 2 {
            StatementKind::IfThenElse
        } else {
            StatementKind::Case(arms)
        }
    }

    /// Number of vertices the statement graph adds when it replaces a vertex.
    pub fn fresh_vertex_count(self) -> usize {
        match self {
            StatementKind::Trivial => 0,
            StatementKind::Sequence => 1,
            StatementKind::IfThen | StatementKind::While | StatementKind::Repeat => 2,
            StatementKind::IfThenElse => 3,
            StatementKind::Case(p) => p as usize + 1,
        }
    }

    /// Edges of the statement graph over local indices: 0 is the source and
    /// `1..=fresh_vertex_count()` are the fresh vertices in expansion order,
    /// the last of which is the sink.
    pub(crate) fn local_edges(self) -> Vec<(usize, usize)> {
        match self {
            StatementKind::Trivial => vec![],
            StatementKind::Sequence => vec![(0, 1)],
            StatementKind::IfThen => vec![(0, 1), (0, 2), (1, 2)],
            StatementKind::While => vec![(0, 1), (1, 0), (0, 2)],
            StatementKind::Repeat => vec![(0, 1), (1, 0), (1, 2)],
            StatementKind::IfThenElse | StatementKind::Case(_) => {
                let sink = self.fresh_vertex_count();
                (1..sink).flat_map(|b| [(0, b), (b, sink)]).collect()
            }
        }
    }

    fn is_well_formed(self) -> bool {
        !matches!(self, StatementKind::Case(p) if p < 3)
    }
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatementKind::Trivial => f.write_str("trivial"),
            StatementKind::Sequence => f.write_str("sequence"),
            StatementKind::IfThen => f.write_str("if-then"),
            StatementKind::IfThenElse => f.write_str("if-then-else"),
            StatementKind::Case(p) => write!(f, "case{p}"),
            StatementKind::While => f.write_str("while"),
            StatementKind::Repeat => f.write_str("repeat"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown statement kind {0:?}")]
pub struct ParseKindError(pub String);

impl FromStr for StatementKind {
    type Err = ParseKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s {
            "trivial" => StatementKind::Trivial,
            "sequence" | "seq" => StatementKind::Sequence,
            "if-then" | "if" => StatementKind::IfThen,
            "if-then-else" | "ite" => StatementKind::IfThenElse,
            "while" => StatementKind::While,
            "repeat" => StatementKind::Repeat,
            _ => {
                let arms = s
                    .strip_prefix("case")
                    .and_then(|p| p.parse::<u32>().ok())
                    .filter(|&p| p >= 3)
                    .ok_or_else(|| ParseKindError(s.to_string()))?;
                StatementKind::Case(arms)
            }
        };
        Ok(kind)
    }
}

impl From<StatementKind> for String {
    fn from(kind: StatementKind) -> String {
        kind.to_string()
    }
}

impl TryFrom<String> for StatementKind {
    type Error = ParseKindError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A prime subgraph located at a specific source vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeMatch {
    kind: StatementKind,
    source: VertexId,
    sink: VertexId,
    members: Vec<VertexId>,
    branch_order: Vec<VertexId>,
}

impl PrimeMatch {
    pub(crate) fn new(kind: StatementKind, source: VertexId, sink: VertexId, branch_order: Vec<VertexId>) -> Self {
        let mut members = branch_order.clone();
        members.push(source);
        members.push(sink);
        members.sort_unstable();
        members.dedup();
        PrimeMatch {
            kind,
            source,
            sink,
            members,
            branch_order,
        }
    }

    pub fn kind(&self) -> StatementKind {
        self.kind
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    /// Member vertices in ascending order.
    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    /// Out-neighbors of the source inside the prime, in detection order.
    pub fn branch_order(&self) -> &[VertexId] {
        &self.branch_order
    }

    /// Members other than the source and the sink, in branch order.
    pub fn interior(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.branch_order.iter().copied().filter(move |&b| b != self.sink)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Number of edges inside the prime.
    pub fn edge_count(&self) -> usize {
        self.kind.local_edges().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimeError {
    #[error("prime match does not hold in the given graph")]
    InvalidMatch,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("fresh name `{0}` collides with an existing vertex or is invalid")]
    NameCollision(String),
    #[error("{kind} needs {expected} fresh vertices, got {got}")]
    ArityMismatch {
        kind: StatementKind,
        expected: usize,
        got: usize,
    },
}

/// Returns the prime whose source is `v`, if there is one.
pub fn match_prime_at(g: &FlowGraph, ec: &CycleEdgeSet, v: VertexId) -> Option<PrimeMatch> {
    WorkGraph::new(g, ec).match_at(v)
}

/// Contracts `pm` into its source, returning the new graph and its cycle
/// edges. The source keeps its id; the cycle status of surviving edges is
/// carried over unchanged.
pub fn contract(g: &FlowGraph, ec: &CycleEdgeSet, pm: &PrimeMatch) -> Result<(FlowGraph, CycleEdgeSet), PrimeError> {
    let mut work = WorkGraph::new(g, ec);
    if work.match_at(pm.source()).as_ref() != Some(pm) {
        return Err(PrimeError::InvalidMatch);
    }
    work.contract(pm);
    Ok(work.to_flow_graph())
}

/// Replaces `v` by the statement graph `kind`. The statement's source reuses
/// `v`'s name and inherits its in-edges; its sink inherits `v`'s out-edges.
/// `fresh_names` name the remaining statement vertices in order, sink last
/// (for if-then, while and repeat the first fresh vertex is the branch/body).
pub fn expand<S: AsRef<str>>(
    g: &FlowGraph,
    v: VertexId,
    kind: StatementKind,
    fresh_names: &[S],
) -> Result<FlowGraph, PrimeError> {
    if !g.contains(v) {
        return Err(PrimeError::UnknownVertex(v));
    }
    let expected = kind.fresh_vertex_count();
    if fresh_names.len() != expected || !kind.is_well_formed() {
        return Err(PrimeError::ArityMismatch {
            kind,
            expected,
            got: fresh_names.len(),
        });
    }
    if kind == StatementKind::Trivial {
        return Ok(g.clone());
    }
    let mut seen = std::collections::HashSet::new();
    for name in fresh_names {
        let name = name.as_ref();
        if !is_valid_name(name) || g.vertex(name).is_some() || !seen.insert(name) {
            return Err(PrimeError::NameCollision(name.to_string()));
        }
    }

    let local: Vec<&str> = std::iter::once(g.name(v))
        .chain(fresh_names.iter().map(AsRef::as_ref))
        .collect();
    let sink = *local.last().expect("non-trivial statement has a sink");
    let mut vertices: Vec<&str> = g.vertices().map(|u| g.name(u)).collect();
    vertices.extend(&local[1..]);
    let mut edges: Vec<(&str, &str)> = g
        .edges()
        .map(|(a, b)| (if a == v { sink } else { g.name(a) }, g.name(b)))
        .collect();
    edges.extend(kind.local_edges().into_iter().map(|(a, b)| (local[a], local[b])));
    FlowGraph::build(vertices, edges, g.name(g.source()))
        .map_err(|e| unreachable!("expansion of a valid graph is valid: {e}"))
}
