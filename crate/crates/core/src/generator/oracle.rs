//! Exhaustive contraction search.
//!
//! Independent of the recognizer: primes are found by brute-force matching of
//! statement-graph templates against induced subgraphs and by checking the
//! closedness conditions literally, cycle edges are recomputed by a fresh
//! depth-first search in every state, and contraction follows the textbook
//! coalesce-then-simplify definition. States are small bitmask graphs keyed by
//! their exact adjacency.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::FlowGraph;

const MASK_BITS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_states: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_vertices: 12,
            max_states: 500_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOutcome {
    /// Every maximal contraction sequence ends at a single vertex.
    pub reducible: bool,
    /// Length shared by all maximal contraction sequences.
    pub contractions: usize,
    /// Distinct graphs visited.
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("maximal contraction sequences disagree (lengths {first} and {second}, same end graph: {same_end})")]
    ConfluenceViolation {
        first: usize,
        second: usize,
        same_end: bool,
    },
}

/// Searches every contraction order of `g` with the default limits and
/// returns whether the graph reduces to a single vertex and the common length
/// of the maximal sequences.
pub fn oracle_reduce(g: &FlowGraph) -> Result<(bool, usize), OracleError> {
    oracle_reduce_with(g, OracleLimits::default()).map(|o| (o.reducible, o.contractions))
}

pub fn oracle_reduce_with(g: &FlowGraph, limits: OracleLimits) -> Result<OracleOutcome, OracleError> {
    let n = g.vertex_count();
    if n > limits.max_vertices.min(MASK_BITS) {
        return Err(OracleError::SearchBudgetExceeded(format!(
            "{n} vertices exceeds the limit of {}",
            limits.max_vertices.min(MASK_BITS)
        )));
    }
    let start = State::from_graph(g);
    let mut search = Search {
        memo: HashMap::new(),
        limits,
    };
    let (end, k) = search.explore(&start)?;
    Ok(OracleOutcome {
        reducible: end.present.count_ones() == 1,
        contractions: k,
        states: search.memo.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct State {
    source: usize,
    present: u32,
    succ: Vec<u32>,
}

fn bit(v: usize) -> u32 {
    1 << v
}

fn ones(mask: u32) -> impl Iterator<Item = usize> {
    (0..MASK_BITS).filter(move |&i| mask & bit(i) != 0)
}

struct Template {
    size: usize,
    edges: Vec<(usize, usize)>,
    /// The one template edge that must be a cycle edge of the host graph;
    /// every other template edge must not be.
    back: Option<(usize, usize)>,
    sink: usize,
    /// Template vertices `1..=arms` are interchangeable arms.
    arms: usize,
}

fn templates(size: usize) -> Vec<Template> {
    let plain = |edges: Vec<(usize, usize)>, back, sink| Template {
        size,
        edges,
        back,
        sink,
        arms: 0,
    };
    match size {
        2 => vec![plain(vec![(0, 1)], None, 1)],
        3 => vec![
            // if-then
            plain(vec![(0, 1), (1, 2), (0, 2)], None, 2),
            // while: the exit leaves the header
            plain(vec![(0, 1), (1, 0), (0, 2)], Some((1, 0)), 2),
            // repeat: the exit leaves the body
            plain(vec![(0, 1), (1, 0), (1, 2)], Some((1, 0)), 2),
        ],
        s if s >= 4 => {
            let arms = s - 2;
            let sink = s - 1;
            let edges = (1..=arms).flat_map(|a| [(0, a), (a, sink)]).collect();
            vec![Template {
                size,
                edges,
                back: None,
                sink,
                arms,
            }]
        }
        _ => vec![],
    }
}

impl State {
    fn from_graph(g: &FlowGraph) -> Self {
        let mut index = vec![usize::MAX; g.id_bound()];
        for (i, v) in g.vertices().enumerate() {
            index[v.index()] = i;
        }
        let n = g.vertex_count();
        let mut succ = vec![0u32; n];
        for (u, w) in g.edges() {
            succ[index[u.index()]] |= bit(index[w.index()]);
        }
        State {
            source: index[g.source().index()],
            present: if n == MASK_BITS { u32::MAX } else { bit(n) - 1 },
            succ,
        }
    }

    fn has_edge(&self, u: usize, w: usize) -> bool {
        self.succ[u] & bit(w) != 0
    }

    fn preds(&self, v: usize) -> u32 {
        ones(self.present)
            .filter(|&u| self.has_edge(u, v))
            .fold(0, |m, u| m | bit(u))
    }

    /// Cycle edges of the DFS from the source visiting lower indices first,
    /// as per-vertex target masks.
    fn cycle_edges(&self) -> Vec<u32> {
        fn visit(s: &State, v: usize, on_stack: &mut u32, seen: &mut u32, cycle: &mut [u32]) {
            *seen |= bit(v);
            *on_stack |= bit(v);
            for w in ones(s.succ[v]) {
                if *on_stack & bit(w) != 0 {
                    cycle[v] |= bit(w);
                } else if *seen & bit(w) == 0 {
                    visit(s, w, on_stack, seen, cycle);
                }
            }
            *on_stack &= !bit(v);
        }
        let mut cycle = vec![0u32; self.succ.len()];
        let (mut on_stack, mut seen) = (0, 0);
        visit(self, self.source, &mut on_stack, &mut seen, &mut cycle);
        for v in ones(self.present) {
            if seen & bit(v) == 0 {
                visit(self, v, &mut on_stack, &mut seen, &mut cycle);
            }
        }
        cycle
    }

    /// All primes as `(source, members)`.
    fn primes(&self) -> Vec<(usize, u32)> {
        let cycle = self.cycle_edges();
        let mut found = Vec::new();
        for v in ones(self.present) {
            let near = self.succ[v] | bit(v);
            let second = ones(self.succ[v]).fold(0, |m, x| m | self.succ[x]) & !near;
            let candidates = std::iter::once(near).chain(ones(second).map(|t| near | bit(t)));
            for members in candidates {
                if self.is_prime(v, members, &cycle) && !found.contains(&(v, members)) {
                    found.push((v, members));
                }
            }
        }
        found
    }

    fn is_prime(&self, v: usize, members: u32, cycle: &[u32]) -> bool {
        let list: Vec<usize> = ones(members).collect();
        templates(list.len()).iter().any(|t| {
            let mut map = vec![usize::MAX; t.size];
            map[0] = v;
            self.embed(t, &list, &mut map, 1, cycle) && self.is_closed(v, map[t.sink], members, cycle)
        })
    }

    /// Backtracking bijection from template vertices onto `members` with the
    /// induced edges matching exactly.
    fn embed(&self, t: &Template, members: &[usize], map: &mut [usize], next: usize, cycle: &[u32]) -> bool {
        if next == t.size {
            return t.edges.iter().all(|&(a, b)| {
                let is_cycle = cycle[map[a]] & bit(map[b]) != 0;
                is_cycle == (t.back == Some((a, b)))
            });
        }
        for &x in members {
            if map[..next].contains(&x) {
                continue;
            }
            if next >= 2 && next <= t.arms && x < map[next - 1] {
                continue;
            }
            map[next] = x;
            let consistent = (0..=next).all(|i| {
                let fwd = t.edges.contains(&(i, next)) == self.has_edge(map[i], x);
                let bwd = i == next || t.edges.contains(&(next, i)) == self.has_edge(x, map[i]);
                fwd && bwd
            });
            if consistent && self.embed(t, members, map, next + 1, cycle) {
                return true;
            }
        }
        map[next] = usize::MAX;
        false
    }

    fn is_closed(&self, source: usize, sink: usize, members: u32, cycle: &[u32]) -> bool {
        let inner_in = ones(members)
            .filter(|&x| x != source)
            .all(|x| self.preds(x) & !members == 0);
        let inner_out = ones(members)
            .filter(|&x| x != sink)
            .all(|x| self.succ[x] & !members == 0);
        let entering = ones(self.present)
            .filter(|&u| cycle[u] & bit(source) != 0)
            .all(|u| self.has_edge(source, u));
        inner_in && inner_out && entering
    }

    /// Coalesces `members` into `v`, then drops loops (parallel edges cannot
    /// exist in the mask representation).
    fn contract(&self, v: usize, members: u32) -> State {
        let image = |x: usize| if members & bit(x) != 0 { v } else { x };
        let mut succ = vec![0u32; self.succ.len()];
        for u in ones(self.present) {
            for w in ones(self.succ[u]) {
                let (a, b) = (image(u), image(w));
                if a != b {
                    succ[a] |= bit(b);
                }
            }
        }
        State {
            source: image(self.source),
            present: (self.present & !members) | bit(v),
            succ,
        }
    }
}

struct Search {
    memo: HashMap<State, (State, usize)>,
    limits: OracleLimits,
}

impl Search {
    fn explore(&mut self, state: &State) -> Result<(State, usize), OracleError> {
        if let Some(done) = self.memo.get(state) {
            return Ok(done.clone());
        }
        if self.memo.len() >= self.limits.max_states {
            return Err(OracleError::SearchBudgetExceeded(format!(
                "more than {} states",
                self.limits.max_states
            )));
        }
        let mut result: Option<(State, usize)> = None;
        for (v, members) in state.primes() {
            let (end, k) = self.explore(&state.contract(v, members))?;
            match &result {
                None => result = Some((end, k + 1)),
                Some((first_end, first_k)) => {
                    if *first_k != k + 1 || *first_end != end {
                        return Err(OracleError::ConfluenceViolation {
                            first: *first_k,
                            second: k + 1,
                            same_end: *first_end == end,
                        });
                    }
                }
            }
        }
        let result = result.unwrap_or_else(|| (state.clone(), 0));
        self.memo.insert(state.clone(), result.clone());
        Ok(result)
    }
}
