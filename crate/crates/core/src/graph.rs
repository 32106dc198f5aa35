//! Flow graphs and the traversal primitives every analysis builds on.
//!
//! Vertex ids are dense indices assigned in ascending name order, so comparing
//! two ids is the same as comparing the vertex names. Graphs obtained by
//! contraction keep the index space of the graph they came from; absorbed
//! vertices simply stop being present.

use std::borrow::Cow;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Identifier of a vertex inside one graph's index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u32);

impl VertexId {
    pub(crate) fn new(index: usize) -> Self {
        VertexId(u32::try_from(index).expect("vertex index exceeds u32"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("edge endpoint `{0}` is not a declared vertex")]
    UnknownEndpoint(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("parallel edge `{0}` -> `{1}`")]
    ParallelEdge(String, String),
    #[error("source `{0}` is not a declared vertex")]
    SourceMissing(String),
    #[error("invalid vertex name {0:?}: names must be non-empty and contain no whitespace")]
    InvalidName(String),
    #[error("the graph minus the supplied cycle edges still contains a cycle")]
    CycleRemains,
}

/// Returns true when `name` is usable as a vertex name.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || c.is_control())
}

/// A simple directed graph with a distinguished source vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    names: Arc<[String]>,
    present: Vec<bool>,
    succ: Vec<Vec<VertexId>>,
    pred: Vec<Vec<VertexId>>,
    source: VertexId,
    vertex_count: usize,
    edge_count: usize,
}

impl FlowGraph {
    /// Builds and validates a graph from vertex names, named edges and the
    /// source name.
    pub fn build<V, E, S>(vertices: V, edges: E, source: &str) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (S, S)>,
    {
        let mut names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if let Some(bad) = names.iter().find(|n| !is_valid_name(n)) {
            return Err(GraphError::InvalidName(bad.clone()));
        }
        names.sort_unstable();
        if let Some(pair) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(pair[0].clone()));
        }
        let lookup = |name: &str| names.binary_search_by(|n| n.as_str().cmp(name)).ok();

        let source_id = lookup(source).ok_or_else(|| GraphError::SourceMissing(source.to_string()))?;
        let mut succ: Vec<Vec<VertexId>> = vec![Vec::new(); names.len()];
        for (from, to) in edges {
            let (from, to): (String, String) = (from.into(), to.into());
            let u = lookup(&from).ok_or(GraphError::UnknownEndpoint(from.clone()))?;
            let w = lookup(&to).ok_or(GraphError::UnknownEndpoint(to.clone()))?;
            if u == w {
                return Err(GraphError::SelfLoop(from));
            }
            succ[u].push(VertexId::new(w));
        }
        for (u, list) in succ.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(pair) = list.windows(2).find(|p| p[0] == p[1]) {
                return Err(GraphError::ParallelEdge(
                    names[u].clone(),
                    names[pair[0].index()].clone(),
                ));
            }
        }
        let present = vec![true; names.len()];
        Ok(Self::from_parts(names.into(), present, succ, VertexId::new(source_id)))
    }

    /// Assembles a graph from already validated parts. Successor lists must be
    /// free of loops and duplicates; they are sorted here.
    pub(crate) fn from_parts(
        names: Arc<[String]>,
        present: Vec<bool>,
        mut succ: Vec<Vec<VertexId>>,
        source: VertexId,
    ) -> Self {
        let mut pred: Vec<Vec<VertexId>> = vec![Vec::new(); names.len()];
        let mut edge_count = 0;
        for (u, list) in succ.iter_mut().enumerate() {
            list.sort_unstable();
            edge_count += list.len();
            for w in list.iter() {
                pred[w.index()].push(VertexId::new(u));
            }
        }
        let vertex_count = present.iter().filter(|&&p| p).count();
        FlowGraph {
            names,
            present,
            succ,
            pred,
            source,
            vertex_count,
            edge_count,
        }
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    /// Number of present vertices (n).
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of edges (m).
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_trivial(&self) -> bool {
        self.vertex_count == 1
    }

    /// Size of the underlying index space, including absorbed vertices.
    pub fn id_bound(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.present.get(v.index()).copied().unwrap_or(false)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    /// Looks up a present vertex by name.
    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        let idx = self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()?;
        self.present[idx].then(|| VertexId::new(idx))
    }

    /// Present vertices in ascending name order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| VertexId::new(i))
    }

    /// Out-neighbors in ascending name order.
    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v.index()]
    }

    /// In-neighbors in ascending name order.
    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.pred[v.index()]
    }

    pub fn has_edge(&self, from: VertexId, to: VertexId) -> bool {
        self.succ[from.index()].binary_search(&to).is_ok()
    }

    /// All edges, ordered by (from, to).
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&w| (VertexId::new(u), w)))
    }

    /// Edges as name pairs, ordered by (from, to).
    pub fn named_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges().map(|(u, w)| (self.name(u), self.name(w)))
    }

    /// Rebuilds the graph with every vertex renamed through `rename`.
    pub fn renamed<F>(&self, mut rename: F) -> Result<FlowGraph, GraphError>
    where
        F: FnMut(&str) -> String,
    {
        let mut map = vec![String::new(); self.id_bound()];
        for v in self.vertices() {
            map[v.index()] = rename(self.name(v));
        }
        let vertices: Vec<String> = self.vertices().map(|v| map[v.index()].clone()).collect();
        let edges: Vec<(String, String)> = self
            .edges()
            .map(|(u, w)| (map[u.index()].clone(), map[w.index()].clone()))
            .collect();
        FlowGraph::build(vertices, edges, &map[self.source.index()])
    }
}

/// Cycle edges of one depth-first search of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CycleEdgeSet {
    edges: Vec<(VertexId, VertexId)>,
}

impl CycleEdgeSet {
    pub fn contains(&self, from: VertexId, to: VertexId) -> bool {
        self.edges.binary_search(&(from, to)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges ordered by (from, to).
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }
}

impl FromIterator<(VertexId, VertexId)> for CycleEdgeSet {
    fn from_iter<I: IntoIterator<Item = (VertexId, VertexId)>>(iter: I) -> Self {
        let mut edges: Vec<_> = iter.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        CycleEdgeSet { edges }
    }
}

/// A topological order of a graph minus its cycle edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopoOrder {
    order: Vec<VertexId>,
    rank: Vec<usize>,
}

impl TopoOrder {
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    /// Position of `v` in the order, or `None` if `v` is not part of it.
    pub fn rank(&self, v: VertexId) -> Option<usize> {
        match self.rank.get(v.index()) {
            Some(&r) if r != usize::MAX => Some(r),
            _ => None,
        }
    }
}

/// True iff every vertex is reachable from the source.
pub fn check_flow_reachability(g: &FlowGraph) -> bool {
    unreachable_count(g) == 0
}

pub(crate) fn unreachable_count(g: &FlowGraph) -> usize {
    let mut seen = vec![false; g.id_bound()];
    let mut stack = vec![g.source()];
    seen[g.source().index()] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in g.successors(v) {
            if !seen[w.index()] {
                seen[w.index()] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    g.vertex_count() - reached
}

/// Cycle edges of the depth-first search from the source that visits children
/// in ascending name order. Vertices the source does not reach are swept by
/// further searches in ascending name order, so the graph minus the result is
/// always acyclic.
pub fn detect_cycle_edges(g: &FlowGraph) -> CycleEdgeSet {
    let mut examined = 0;
    cycle_edges_counted(g, &mut examined)
}

/// Like [`detect_cycle_edges`], but `child_order` decides the order in which
/// the out-neighbors of each vertex are visited. It receives the vertex and
/// its successors (ascending) and must return a permutation of them.
pub fn detect_cycle_edges_with<F>(g: &FlowGraph, child_order: F) -> CycleEdgeSet
where
    F: Fn(VertexId, &[VertexId]) -> Vec<VertexId>,
{
    let mut examined = 0;
    dfs_cycle_edges(g, |v| Cow::Owned(child_order(v, g.successors(v))), &mut examined)
}

pub(crate) fn cycle_edges_counted(g: &FlowGraph, examined: &mut u64) -> CycleEdgeSet {
    dfs_cycle_edges(g, |v| Cow::Borrowed(g.successors(v)), examined)
}

fn dfs_cycle_edges<'g, F>(g: &'g FlowGraph, children: F, examined: &mut u64) -> CycleEdgeSet
where
    F: Fn(VertexId) -> Cow<'g, [VertexId]>,
{
    const NEW: u8 = 0;
    const ON_STACK: u8 = 1;
    const DONE: u8 = 2;

    let mut state = vec![NEW; g.id_bound()];
    let mut cycle = Vec::new();
    let mut stack: Vec<(VertexId, Cow<'g, [VertexId]>, usize)> = Vec::new();
    let roots = std::iter::once(g.source()).chain(g.vertices());
    for root in roots {
        if state[root.index()] != NEW {
            continue;
        }
        state[root.index()] = ON_STACK;
        stack.push((root, children(root), 0));
        while let Some((v, kids, next)) = stack.last_mut() {
            let v = *v;
            let Some(&w) = kids.get(*next) else {
                state[v.index()] = DONE;
                stack.pop();
                continue;
            };
            *next += 1;
            *examined += 1;
            match state[w.index()] {
                NEW => {
                    state[w.index()] = ON_STACK;
                    stack.push((w, children(w), 0));
                }
                ON_STACK => cycle.push((v, w)),
                _ => {}
            }
        }
    }
    cycle.into_iter().collect()
}

/// Topological order of `g` minus `ec`, breaking ties by ascending name.
pub fn topo_sort(g: &FlowGraph, ec: &CycleEdgeSet) -> Result<TopoOrder, GraphError> {
    let mut examined = 0;
    topo_sort_counted(g, ec, &mut examined)
}

pub(crate) fn topo_sort_counted(g: &FlowGraph, ec: &CycleEdgeSet, examined: &mut u64) -> Result<TopoOrder, GraphError> {
    let mut indeg = vec![0usize; g.id_bound()];
    for (u, w) in g.edges() {
        *examined += 1;
        if !ec.contains(u, w) {
            indeg[w.index()] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<VertexId>> =
        g.vertices().filter(|v| indeg[v.index()] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(g.vertex_count());
    let mut rank = vec![usize::MAX; g.id_bound()];
    while let Some(Reverse(v)) = ready.pop() {
        rank[v.index()] = order.len();
        order.push(v);
        for &w in g.successors(v) {
            *examined += 1;
            if ec.contains(v, w) {
                continue;
            }
            indeg[w.index()] -= 1;
            if indeg[w.index()] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() != g.vertex_count() {
        return Err(GraphError::CycleRemains);
    }
    Ok(TopoOrder { order, rank })
}
