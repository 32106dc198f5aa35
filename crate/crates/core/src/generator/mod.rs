//! Construction side: random Dijkstra graphs grown by expanding labelled
//! vertices, structural perturbations for negative corpora, and an exhaustive
//! contraction oracle.
//!
//! Generation starts from a single vertex labelled `X`. Each step picks an
//! `X` vertex uniformly at random and expands it into a statement graph; the
//! statement's source keeps the vertex id and becomes `R`, every other new
//! vertex is `X`.

mod oracle;

use std::collections::HashSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{detect_cycle_edges, FlowGraph, VertexId};
use crate::primes::{expand, PrimeError, StatementKind};

pub use oracle::{oracle_reduce, oracle_reduce_with, OracleError, OracleLimits, OracleOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Expansible.
    X,
    /// Regular: already the source of an expansion.
    R,
}

/// One entry of the kind distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KindChoice {
    Kind(StatementKind),
    /// A case statement whose arity is drawn from the configured range.
    AnyCase,
}

impl FromStr for KindChoice {
    type Err = crate::primes::ParseKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "case" {
            Ok(KindChoice::AnyCase)
        } else {
            s.parse().map(KindChoice::Kind)
        }
    }
}

impl fmt::Display for KindChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KindChoice::Kind(k) => k.fmt(f),
            KindChoice::AnyCase => f.write_str("case"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Weighted statement kinds to draw from. Trivial entries are ignored.
    pub choices: Vec<(KindChoice, f64)>,
    /// Arity range for [`KindChoice::AnyCase`].
    pub case_arms: RangeInclusive<u32>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::uniform(&[
            KindChoice::Kind(StatementKind::Sequence),
            KindChoice::Kind(StatementKind::IfThen),
            KindChoice::Kind(StatementKind::IfThenElse),
            KindChoice::AnyCase,
            KindChoice::Kind(StatementKind::While),
            KindChoice::Kind(StatementKind::Repeat),
        ])
    }
}

impl GeneratorConfig {
    /// Equal weights over `choices`.
    pub fn uniform(choices: &[KindChoice]) -> Self {
        GeneratorConfig {
            choices: choices.iter().map(|&c| (c, 1.0)).collect(),
            case_arms: 3..=5,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> StatementKind {
        let usable: Vec<&(KindChoice, f64)> = self
            .choices
            .iter()
            .filter(|(c, w)| *w > 0.0 && *c != KindChoice::Kind(StatementKind::Trivial))
            .collect();
        assert!(!usable.is_empty(), "generator needs at least one non-trivial kind");
        let total: f64 = usable.iter().map(|(_, w)| w).sum();
        let mut pick = rng.gen_range(0.0..total);
        let mut choice = usable[usable.len() - 1].0;
        for (c, w) in &usable {
            if pick < *w {
                choice = *c;
                break;
            }
            pick -= w;
        }
        match choice {
            KindChoice::Kind(k) => k,
            KindChoice::AnyCase => StatementKind::Case(rng.gen_range(self.case_arms.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionStep {
    /// The `X` vertex that was expanded; it becomes the statement's source.
    pub target: String,
    pub kind: StatementKind,
    /// Names of the new vertices, in the order [`expand`] expects.
    pub fresh: Vec<String>,
}

/// The expansion sequence that produced a generated graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionScript {
    pub seed: u64,
    pub root: String,
    pub steps: Vec<ExpansionStep>,
    /// Final label of every vertex.
    pub labels: Vec<(String, Label)>,
}

impl ExpansionScript {
    /// Rebuilds the graph by expanding step by step from the trivial graph.
    /// Quadratic; meant for checking small scripts.
    pub fn replay(&self) -> Result<FlowGraph, PrimeError> {
        let mut g = FlowGraph::build([self.root.as_str()], Vec::<(&str, &str)>::new(), &self.root)
            .map_err(|_| PrimeError::NameCollision(self.root.clone()))?;
        for step in &self.steps {
            let v = g
                .vertex(&step.target)
                .ok_or_else(|| PrimeError::NameCollision(step.target.clone()))?;
            g = expand(&g, v, step.kind, &step.fresh)?;
        }
        Ok(g)
    }

    /// Compact one-line form: `target:kind` pairs separated by spaces.
    pub fn summary(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}:{}", s.target, s.kind))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Growing graph as out-lists over dense indices.
struct Builder {
    out: Vec<Vec<u32>>,
    labels: Vec<Label>,
    expandable: Vec<u32>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            out: vec![Vec::new()],
            labels: vec![Label::X],
            expandable: vec![0],
        }
    }

    fn len(&self) -> usize {
        self.out.len()
    }

    fn add_vertex(&mut self) -> u32 {
        let id = self.out.len() as u32;
        self.out.push(Vec::new());
        self.labels.push(Label::X);
        self.expandable.push(id);
        id
    }

    /// Expands `v` into `kind`; returns the fresh vertex ids, sink last.
    fn expand(&mut self, v: u32, kind: StatementKind) -> Vec<u32> {
        let fresh: Vec<u32> = (0..kind.fresh_vertex_count()).map(|_| self.add_vertex()).collect();
        let sink = *fresh.last().expect("non-trivial kind");
        self.out[sink as usize] = std::mem::take(&mut self.out[v as usize]);
        let local: Vec<u32> = std::iter::once(v).chain(fresh.iter().copied()).collect();
        for (a, b) in kind.local_edges() {
            self.out[local[a] as usize].push(local[b]);
        }
        self.labels[v as usize] = Label::R;
        fresh
    }
}

fn vertex_name(i: u32) -> String {
    format!("v{i}")
}

/// Builds the graph straight from builder indices (vertex 0 is the source),
/// relabelling them into name order.
fn assemble(names: Vec<String>, out: &[Vec<u32>]) -> FlowGraph {
    let mut order: Vec<u32> = (0..names.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| names[a as usize].cmp(&names[b as usize]));
    let mut rank = vec![0u32; names.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i as usize] = r as u32;
    }
    let mut succ = vec![Vec::new(); names.len()];
    for (a, list) in out.iter().enumerate() {
        succ[rank[a] as usize] = list.iter().map(|&x| VertexId::new(rank[x as usize] as usize)).collect();
    }
    let mut sorted = names;
    sorted.sort_unstable();
    let present = vec![true; sorted.len()];
    FlowGraph::from_parts(sorted.into(), present, succ, VertexId::new(rank[0] as usize))
}

/// Generates a random Dijkstra graph with at least `target_n` vertices (or a
/// single vertex when `target_n <= 1`) using the default kind distribution.
pub fn generate_dg(seed: u64, target_n: usize) -> (FlowGraph, ExpansionScript) {
    generate_dg_with(seed, target_n, &GeneratorConfig::default())
}

pub fn generate_dg_with(seed: u64, target_n: usize, config: &GeneratorConfig) -> (FlowGraph, ExpansionScript) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    let mut steps = Vec::new();
    while b.len() < target_n && !b.expandable.is_empty() {
        let slot = rng.gen_range(0..b.expandable.len());
        let v = b.expandable.swap_remove(slot);
        let kind = config.draw(&mut rng);
        let fresh = b.expand(v, kind);
        steps.push(ExpansionStep {
            target: vertex_name(v),
            kind,
            fresh: fresh.into_iter().map(vertex_name).collect(),
        });
    }
    let names: Vec<String> = (0..b.len() as u32).map(vertex_name).collect();
    let labels = names.iter().cloned().zip(b.labels.iter().copied()).collect();
    let g = assemble(names, &b.out);
    let script = ExpansionScript {
        seed,
        root: vertex_name(0),
        steps,
        labels,
    };
    (g, script)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbMode {
    AddEdge,
    DeleteEdge,
    RedirectEdge,
    /// Adds an edge from outside a loop into its body, bypassing the header.
    AddCrossEntry,
}

impl PerturbMode {
    pub const ALL: [PerturbMode; 4] = [
        PerturbMode::AddEdge,
        PerturbMode::DeleteEdge,
        PerturbMode::RedirectEdge,
        PerturbMode::AddCrossEntry,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no applicable {0:?} perturbation")]
    NoApplicablePerturbation(PerturbMode),
}

/// Applies one random structural change that keeps the graph simple and its
/// source in place. The result may or may not still be a Dijkstra graph.
pub fn perturb(g: &FlowGraph, seed: u64, mode: PerturbMode) -> Result<FlowGraph, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let none = GenError::NoApplicablePerturbation(mode);
    if g.vertex_count() < 2 {
        return Err(none);
    }
    let vertices: Vec<VertexId> = g.vertices().collect();
    let mut edges: Vec<(VertexId, VertexId)> = g.edges().collect();
    match mode {
        PerturbMode::AddEdge => {
            let (u, w) = pick_missing_edge(g, &vertices, &mut rng, |_, _| true).ok_or(none)?;
            edges.push((u, w));
        }
        PerturbMode::DeleteEdge => {
            if edges.is_empty() {
                return Err(none);
            }
            let i = rng.gen_range(0..edges.len());
            edges.swap_remove(i);
        }
        PerturbMode::RedirectEdge => {
            let mut order: Vec<usize> = (0..edges.len()).collect();
            order.shuffle(&mut rng);
            let redirect = order.into_iter().find_map(|i| {
                let (u, w) = edges[i];
                let targets: Vec<VertexId> = vertices
                    .iter()
                    .copied()
                    .filter(|&x| x != u && x != w && !g.has_edge(u, x))
                    .collect();
                targets.choose(&mut rng).map(|&x| (i, (u, x)))
            });
            let (i, edge) = redirect.ok_or(none)?;
            edges[i] = edge;
        }
        PerturbMode::AddCrossEntry => {
            let (u, b) = cross_entry(g, &mut rng).ok_or(none)?;
            edges.push((u, b));
        }
    }
    let names = vertices.iter().map(|&v| g.name(v));
    let named = edges.iter().map(|&(a, b)| (g.name(a), g.name(b)));
    Ok(FlowGraph::build(names, named, g.name(g.source())).expect("perturbation keeps the graph simple"))
}

fn pick_missing_edge<F>(
    g: &FlowGraph,
    vertices: &[VertexId],
    rng: &mut impl Rng,
    allowed: F,
) -> Option<(VertexId, VertexId)>
where
    F: Fn(VertexId, VertexId) -> bool,
{
    let ok = |u: VertexId, w: VertexId| u != w && !g.has_edge(u, w) && allowed(u, w);
    if vertices.len() <= 512 {
        let candidates: Vec<(VertexId, VertexId)> = vertices
            .iter()
            .flat_map(|&u| vertices.iter().map(move |&w| (u, w)))
            .filter(|&(u, w)| ok(u, w))
            .collect();
        return candidates.choose(rng).copied();
    }
    (0..100_000).find_map(|_| {
        let u = *vertices.choose(rng)?;
        let w = *vertices.choose(rng)?;
        ok(u, w).then_some((u, w))
    })
}

/// Picks a cycle edge `w -> h`, a body vertex `b != h` of its natural loop,
/// and a vertex `u` that `h` does not reach; the edge `u -> b` then enters the
/// loop without passing through `h`.
fn cross_entry(g: &FlowGraph, rng: &mut impl Rng) -> Option<(VertexId, VertexId)> {
    let mut back: Vec<(VertexId, VertexId)> = detect_cycle_edges(g).iter().collect();
    back.shuffle(rng);
    for (w, h) in back {
        let from_header = reachable_from(g, h);
        let outside: Vec<VertexId> = g.vertices().filter(|v| !from_header.contains(v)).collect();
        if outside.is_empty() {
            continue;
        }
        // natural loop of w -> h: vertices reaching w without passing h
        let mut body = HashSet::from([h, w]);
        let mut stack = vec![w];
        while let Some(x) = stack.pop() {
            for &p in g.predecessors(x) {
                if body.insert(p) {
                    stack.push(p);
                }
            }
        }
        let mut candidates: Vec<(VertexId, VertexId)> = outside
            .iter()
            .flat_map(|&u| body.iter().map(move |&b| (u, b)))
            .filter(|&(u, b)| b != h && u != b && !g.has_edge(u, b))
            .collect();
        candidates.sort_unstable();
        if let Some(&pick) = candidates.choose(rng) {
            return Some(pick);
        }
    }
    None
}

fn reachable_from(g: &FlowGraph, from: VertexId) -> HashSet<VertexId> {
    let mut seen = HashSet::from([from]);
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &w in g.successors(v) {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}
