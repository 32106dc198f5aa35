//! Canonical codes of Dijkstra graphs and isomorphism via code equality.
//!
//! The code of a vertex starts as the single token `1`. When the pass
//! contracts a prime rooted at the vertex, the prime's type code and the
//! (already final) codes of its other members are appended:
//!
//! | prime        | appended                                    |
//! |--------------|---------------------------------------------|
//! | sequence     | `2`, successor                              |
//! | if-then      | `3`, branch, sink                           |
//! | while        | `4`, body, sink                             |
//! | repeat       | `5`, body, sink                             |
//! | if-then-else | `6`, arms in lexicographic order, sink      |
//! | p-case       | `p+4`, arms in lexicographic order, sink    |
//!
//! The code of the graph is the code of the vertex that survives the pass.
//! Codes are kept as a tree of per-vertex nodes and only flattened at the end,
//! so building them costs time linear in the graph plus the arm comparisons.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{FlowGraph, VertexId};
use crate::primes::{PrimeMatch, StatementKind};
use crate::recognizer::{run_pass, PassStats, Verdict};

/// Integer-token code of a Dijkstra graph, with the vertex behind each `1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalCode {
    tokens: Vec<u32>,
    provenance: Vec<(usize, VertexId)>,
}

impl CanonicalCode {
    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    /// `(position, vertex)` for every `1` token, in code order.
    pub fn provenance(&self) -> &[(usize, VertexId)] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of contractions encoded (tokens greater than one).
    pub fn contractions(&self) -> usize {
        self.tokens.len() - self.provenance.len()
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tokens(f, &self.tokens)
    }
}

fn write_tokens(f: &mut fmt::Formatter<'_>, tokens: &[u32]) -> fmt::Result {
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

/// A code line read back from its serialized form (`"1 3 1 2 1 1"`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeLine(pub Vec<u32>);

impl fmt::Display for CodeLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tokens(f, &self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid code token {0:?}")]
pub struct ParseCodeError(pub String);

impl FromStr for CodeLine {
    type Err = ParseCodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_ascii_whitespace()
            .map(|t| match t.parse::<u32>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(ParseCodeError(t.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(CodeLine)
    }
}

impl From<&CanonicalCode> for CodeLine {
    fn from(code: &CanonicalCode) -> Self {
        CodeLine(code.tokens.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("not a Dijkstra graph: {0}")]
    NotDijkstra(Box<Verdict>),
    #[error("graph {which} is not a Dijkstra graph: {verdict}")]
    OperandNotDijkstra { which: usize, verdict: Box<Verdict> },
    #[error("extracted vertex mapping does not preserve edges")]
    InvalidMapping,
}

/// Per-vertex code nodes built during the pass.
struct CodeForest {
    /// Type code and ordered member children of the prime rooted here.
    nodes: Vec<Option<(u32, Vec<VertexId>)>>,
    /// Structural id: equal ids mean equal codes.
    ids: Vec<u32>,
    interned: HashMap<(u32, Vec<u32>), u32>,
}

impl CodeForest {
    fn new(bound: usize) -> Self {
        CodeForest {
            nodes: vec![None; bound],
            ids: vec![0; bound],
            interned: HashMap::new(),
        }
    }

    fn tokens(&self, v: VertexId) -> Tokens<'_> {
        Tokens {
            forest: self,
            stack: vec![Pending::Vertex(v)],
        }
    }

    fn compare(&self, a: VertexId, b: VertexId) -> Ordering {
        if self.ids[a.index()] == self.ids[b.index()] {
            return Ordering::Equal;
        }
        self.tokens(a).map(|(t, _)| t).cmp(self.tokens(b).map(|(t, _)| t))
    }

    fn record(&mut self, pm: &PrimeMatch) {
        let mut children: Vec<VertexId> = pm.interior().collect();
        if matches!(pm.kind(), StatementKind::IfThenElse | StatementKind::Case(_)) {
            children.sort_by(|&a, &b| self.compare(a, b).then(a.cmp(&b)));
        }
        children.push(pm.sink());
        let type_code = pm.kind().type_code();
        let key = (type_code, children.iter().map(|c| self.ids[c.index()]).collect());
        let next = self.interned.len() as u32 + 1;
        let id = *self.interned.entry(key).or_insert(next);
        let v = pm.source();
        self.ids[v.index()] = id;
        self.nodes[v.index()] = Some((type_code, children));
    }
}

enum Pending {
    Vertex(VertexId),
    Token(u32),
}

/// Lazy walk over the tokens of one vertex code.
struct Tokens<'a> {
    forest: &'a CodeForest,
    stack: Vec<Pending>,
}

impl Iterator for Tokens<'_> {
    type Item = (u32, Option<VertexId>);

    fn next(&mut self) -> Option<Self::Item> {
        match self.stack.pop()? {
            Pending::Token(t) => Some((t, None)),
            Pending::Vertex(v) => {
                if let Some((type_code, children)) = &self.forest.nodes[v.index()] {
                    self.stack.extend(children.iter().rev().map(|&c| Pending::Vertex(c)));
                    self.stack.push(Pending::Token(*type_code));
                }
                Some((1, Some(v)))
            }
        }
    }
}

/// Computes the canonical code of a Dijkstra graph.
pub fn canonical_code(g: &FlowGraph) -> Result<CanonicalCode, CanonError> {
    canonical_code_instrumented(g).0
}

/// [`canonical_code`] together with the work counters of its pass.
pub fn canonical_code_instrumented(g: &FlowGraph) -> (Result<CanonicalCode, CanonError>, PassStats) {
    let mut stats = PassStats::default();
    let mut forest = CodeForest::new(g.id_bound());
    let pass = match run_pass(g, &mut stats, |_, pm| forest.record(pm)) {
        Ok(pass) => pass,
        Err(rejected) => return (Err(CanonError::NotDijkstra(Box::new(rejected))), stats),
    };
    if pass.work.vertex_count() != 1 {
        return (Err(CanonError::NotDijkstra(Box::new(pass.verdict()))), stats);
    }
    let root = pass.work.source();
    let mut tokens = Vec::with_capacity(2 * g.vertex_count());
    let mut provenance = Vec::with_capacity(g.vertex_count());
    for (t, vertex) in forest.tokens(root) {
        if let Some(v) = vertex {
            provenance.push((tokens.len(), v));
        }
        tokens.push(t);
    }
    (Ok(CanonicalCode { tokens, provenance }), stats)
}

/// A vertex bijection between two graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoMapping {
    pairs: Vec<(VertexId, VertexId)>,
}

impl IsoMapping {
    pub fn new(mut pairs: Vec<(VertexId, VertexId)>) -> Self {
        pairs.sort_unstable();
        IsoMapping { pairs }
    }

    /// `(vertex of the first graph, its image)`, ordered by the first.
    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }

    pub fn image(&self, v: VertexId) -> Option<VertexId> {
        self.pairs
            .binary_search_by_key(&v, |&(a, _)| a)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// Checks that this is a bijection between the vertex sets that maps
    /// source to source and edges onto edges in both directions.
    pub fn preserves_edges(&self, g1: &FlowGraph, g2: &FlowGraph) -> bool {
        if g1.vertex_count() != g2.vertex_count()
            || g1.edge_count() != g2.edge_count()
            || self.pairs.len() != g1.vertex_count()
        {
            return false;
        }
        let mut forward = vec![None; g1.id_bound()];
        let mut hit = vec![false; g2.id_bound()];
        for &(a, b) in &self.pairs {
            if !g1.contains(a) || !g2.contains(b) || forward[a.index()].is_some() || hit[b.index()] {
                return false;
            }
            forward[a.index()] = Some(b);
            hit[b.index()] = true;
        }
        if forward[g1.source().index()] != Some(g2.source()) {
            return false;
        }
        // injective on vertices and on edges, with equal edge counts
        g1.edges().all(|(u, w)| match (forward[u.index()], forward[w.index()]) {
            (Some(fu), Some(fw)) => g2.has_edge(fu, fw),
            _ => false,
        })
    }
}

/// Decides isomorphism of two Dijkstra graphs. Returns the vertex mapping
/// that pairs the vertices behind equally placed `1` tokens when the codes
/// agree, `None` when they differ.
pub fn is_isomorphic(g1: &FlowGraph, g2: &FlowGraph) -> Result<Option<IsoMapping>, CanonError> {
    let operand = |which: usize, g: &FlowGraph| {
        canonical_code(g).map_err(|e| match e {
            CanonError::NotDijkstra(verdict) => CanonError::OperandNotDijkstra { which, verdict },
            other => other,
        })
    };
    let c1 = operand(1, g1)?;
    let c2 = operand(2, g2)?;
    c1.mapping_to(g1, &c2, g2)
}

impl CanonicalCode {
    /// Pairs the vertices behind equally placed `1` tokens of two codes of
    /// `g1` and `g2`; `None` when the token sequences differ. The mapping is
    /// checked against both graphs before it is returned.
    pub fn mapping_to(
        &self,
        g1: &FlowGraph,
        other: &CanonicalCode,
        g2: &FlowGraph,
    ) -> Result<Option<IsoMapping>, CanonError> {
        if self.tokens != other.tokens {
            return Ok(None);
        }
        let mapping = IsoMapping::new(
            self.provenance
                .iter()
                .zip(&other.provenance)
                .map(|(&(_, a), &(_, b))| (a, b))
                .collect(),
        );
        if !mapping.preserves_edges(g1, g2) {
            return Err(CanonError::InvalidMapping);
        }
        Ok(Some(mapping))
    }
}
