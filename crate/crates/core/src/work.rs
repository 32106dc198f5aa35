use std::sync::Arc;

use crate::graph::{CycleEdgeSet, FlowGraph, VertexId};
use crate::primes::{PrimeMatch, StatementKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct OutEdge {
    to: VertexId,
    cycle: bool,
}

/// Mutable copy of a flow graph used while contracting primes.
///
/// Only out-lists are stored. In-neighborhoods are tracked as counts, which is
/// all the prime patterns need because every non-source member has its whole
/// in-neighborhood pinned down by the pattern. Contraction moves the sink's
/// out-list to the source without touching the targets, so its cost is the
/// number of edges inside the prime.
#[derive(Debug, Clone)]
pub(crate) struct WorkGraph {
    names: Arc<[String]>,
    out: Vec<Vec<OutEdge>>,
    indeg: Vec<u32>,
    cycle_in: Vec<u32>,
    present: Vec<bool>,
    source: VertexId,
    n: usize,
    m: usize,
    pub(crate) examined: u64,
}

impl WorkGraph {
    pub(crate) fn new(g: &FlowGraph, ec: &CycleEdgeSet) -> Self {
        let bound = g.id_bound();
        let mut out = vec![Vec::new(); bound];
        let mut indeg = vec![0u32; bound];
        let mut cycle_in = vec![0u32; bound];
        let mut present = vec![false; bound];
        for v in g.vertices() {
            present[v.index()] = true;
            out[v.index()] = g
                .successors(v)
                .iter()
                .map(|&w| {
                    let cycle = ec.contains(v, w);
                    indeg[w.index()] += 1;
                    if cycle {
                        cycle_in[w.index()] += 1;
                    }
                    OutEdge { to: w, cycle }
                })
                .collect();
        }
        WorkGraph {
            names: g.names().clone(),
            out,
            indeg,
            cycle_in,
            present,
            source: g.source(),
            n: g.vertex_count(),
            m: g.edge_count(),
            examined: g.edge_count() as u64,
        }
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.n
    }

    pub(crate) fn edge_count(&self) -> usize {
        self.m
    }

    pub(crate) fn source(&self) -> VertexId {
        self.source
    }

    pub(crate) fn contains(&self, v: VertexId) -> bool {
        self.present.get(v.index()).copied().unwrap_or(false)
    }

    fn outs(&mut self, v: VertexId) -> &[OutEdge] {
        let list = &self.out[v.index()];
        self.examined += list.len() as u64;
        list
    }

    fn indeg(&self, v: VertexId) -> u32 {
        self.indeg[v.index()]
    }

    fn points_to(&mut self, from: VertexId, to: VertexId) -> bool {
        self.outs(from).iter().any(|e| e.to == to)
    }

    /// The single out-edge of `v`, if it has exactly one.
    fn only_out(&mut self, v: VertexId) -> Option<OutEdge> {
        match *self.outs(v) {
            [e] => Some(e),
            _ => None,
        }
    }

    /// Finds the non-trivial prime whose source is `v`, if any.
    pub(crate) fn match_at(&mut self, v: VertexId) -> Option<PrimeMatch> {
        if !self.contains(v) {
            return None;
        }
        let source = self.source;
        self.match_shape(v)
            .filter(|pm| pm.source() == source || !pm.contains(source))
    }

    /// Pattern and closedness checks, without the rule that the graph source
    /// may only enter a prime as the prime's own source.
    fn match_shape(&mut self, v: VertexId) -> Option<PrimeMatch> {
        let outs = self.outs(v);
        match outs.len() {
            0 => None,
            1 => {
                let w = outs[0].to;
                self.match_single(v, w)
            }
            2 => {
                let (a, b) = (outs[0].to, outs[1].to);
                match self.cycle_in[v.index()] {
                    0 => self
                        .match_if_then(v, a, b)
                        .or_else(|| self.match_branches(v, vec![a, b])),
                    1 => self.match_while(v, a, b),
                    _ => None,
                }
            }
            _ => {
                if self.cycle_in[v.index()] != 0 {
                    return None;
                }
                let branches: Vec<VertexId> = self.out[v.index()].iter().map(|e| e.to).collect();
                self.match_branches(v, branches)
            }
        }
    }

    /// Sequence or repeat: the source has exactly one out-neighbor `w`.
    fn match_single(&mut self, v: VertexId, w: VertexId) -> Option<PrimeMatch> {
        if self.indeg(w) != 1 {
            return None;
        }
        let wouts: Vec<OutEdge> = self.outs(w).to_vec();
        match wouts.iter().position(|e| e.to == v) {
            None => {
                if self.cycle_in[v.index()] != 0 {
                    return None;
                }
                Some(PrimeMatch::new(StatementKind::Sequence, v, w, vec![w]))
            }
            Some(back) => {
                if !wouts[back].cycle || wouts.len() != 2 || self.cycle_in[v.index()] != 1 {
                    return None;
                }
                let t = wouts[1 - back].to;
                if self.indeg(t) != 1 || self.points_to(t, v) {
                    return None;
                }
                Some(PrimeMatch::new(StatementKind::Repeat, v, t, vec![w]))
            }
        }
    }

    fn match_while(&mut self, v: VertexId, a: VertexId, b: VertexId) -> Option<PrimeMatch> {
        for (w, t) in [(a, b), (b, a)] {
            if self.indeg(w) != 1 || self.indeg(t) != 1 {
                continue;
            }
            let Some(back) = self.only_out(w) else { continue };
            if back.to == v && back.cycle && !self.points_to(t, v) {
                return Some(PrimeMatch::new(StatementKind::While, v, t, vec![a, b]));
            }
        }
        None
    }

    fn match_if_then(&mut self, v: VertexId, a: VertexId, b: VertexId) -> Option<PrimeMatch> {
        for (w, t) in [(a, b), (b, a)] {
            if self.indeg(w) != 1 || self.indeg(t) != 2 {
                continue;
            }
            let Some(e) = self.only_out(w) else { continue };
            if e.to == t && !self.points_to(t, v) {
                return Some(PrimeMatch::new(StatementKind::IfThen, v, t, vec![a, b]));
            }
        }
        None
    }

    /// If-then-else (two branches) or p-case (p >= 3 branches).
    fn match_branches(&mut self, v: VertexId, branches: Vec<VertexId>) -> Option<PrimeMatch> {
        let mut sink = None;
        for &b in &branches {
            if self.indeg(b) != 1 {
                return None;
            }
            let e = self.only_out(b)?;
            match sink {
                None => sink = Some(e.to),
                Some(t) if t == e.to => {}
                Some(_) => return None,
            }
        }
        let t = sink?;
        if t == v || self.indeg(t) as usize != branches.len() || self.points_to(t, v) {
            return None;
        }
        let kind = StatementKind::branching(branches.len() as u32);
        Some(PrimeMatch::new(kind, v, t, branches))
    }

    /// Coalesces the members of `pm` into its source. `pm` must have been
    /// produced by [`WorkGraph::match_at`] on the current state.
    pub(crate) fn contract(&mut self, pm: &PrimeMatch) {
        let v = pm.source();
        let t = pm.sink();
        for &x in pm.members() {
            if x == v {
                continue;
            }
            if x != t {
                let list = std::mem::take(&mut self.out[x.index()]);
                self.examined += list.len() as u64;
                self.m -= list.len();
                for e in list {
                    if e.to == v {
                        self.indeg[v.index()] -= 1;
                        if e.cycle {
                            self.cycle_in[v.index()] -= 1;
                        }
                    }
                }
            }
            self.present[x.index()] = false;
            if x == self.source {
                self.source = v;
            }
        }
        let internal = self.out[v.index()].len();
        self.examined += internal as u64;
        self.m -= internal;
        self.out[v.index()] = std::mem::take(&mut self.out[t.index()]);
        self.n -= pm.members().len() - 1;
    }

    pub(crate) fn to_flow_graph(&self) -> (FlowGraph, CycleEdgeSet) {
        let succ = self
            .out
            .iter()
            .map(|list| list.iter().map(|e| e.to).collect())
            .collect();
        let cycle = self
            .out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(|e| e.cycle).map(move |e| (VertexId::new(u), e.to)))
            .collect();
        let g = FlowGraph::from_parts(self.names.clone(), self.present.clone(), succ, self.source);
        (g, cycle)
    }
}
