//! Recognition of Dijkstra graphs by a single bottom-up contraction pass.
//!
//! The pass computes one set of cycle edges and one topological order of the
//! remaining acyclic graph, then visits the vertices from last to first and
//! contracts the prime rooted at each surviving vertex, if there is one. The
//! input is a Dijkstra graph exactly when the pass ends at a single vertex.

use std::fmt;

use thiserror::Error;

use crate::graph::{cycle_edges_counted, detect_cycle_edges, topo_sort_counted, unreachable_count, FlowGraph};
use crate::primes::PrimeMatch;
use crate::work::WorkGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Dijkstra,
    NotDijkstra,
    NotFlowGraph,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Dijkstra => "DIJKSTRA",
            Status::NotDijkstra => "NOT-DIJKSTRA",
            Status::NotFlowGraph => "NOT-FLOW-GRAPH",
        })
    }
}

/// Why a graph was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Reason {
    /// `m >= 2n - 1`; no Dijkstra graph has that many edges.
    EdgeBoundExceeded { vertices: usize, edges: usize },
    /// The pass ended with a graph that has no prime left.
    StuckResidue { vertices: usize, edges: usize },
    /// Some vertices are not reachable from the source.
    Unreachable { count: usize },
    /// The input could not be turned into a simple graph.
    MalformedInput(String),
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::EdgeBoundExceeded { vertices, edges } => {
                write!(f, "edge bound exceeded: m={edges} >= 2n-1={}", 2 * vertices - 1)
            }
            Reason::StuckResidue { vertices, edges } => {
                write!(f, "no prime left: residue has {vertices} vertices and {edges} edges")
            }
            Reason::Unreachable { count } => {
                write!(f, "{count} vertices unreachable from the source")
            }
            Reason::MalformedInput(msg) => write!(f, "malformed input: {msg}"),
        }
    }
}

/// The primes contracted by one pass, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContractionTrace {
    steps: Vec<PrimeMatch>,
}

impl ContractionTrace {
    pub fn new(steps: Vec<PrimeMatch>) -> Self {
        ContractionTrace { steps }
    }

    pub fn steps(&self) -> &[PrimeMatch] {
        &self.steps
    }

    /// Number of contractions (k).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub reason: Option<Reason>,
    /// Complete for a Dijkstra graph; the contractions performed before
    /// getting stuck otherwise.
    pub trace: ContractionTrace,
}

impl Verdict {
    pub fn is_dijkstra(&self) -> bool {
        self.status == Status::Dijkstra
    }

    fn rejected(status: Status, reason: Reason) -> Self {
        Verdict {
            status,
            reason: Some(reason),
            trace: ContractionTrace::default(),
        }
    }

    /// Verdict for input that never became a graph (self-loops, parallel edges).
    pub fn malformed(message: impl Into<String>) -> Self {
        Verdict::rejected(Status::NotDijkstra, Reason::MalformedInput(message.into()))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.status, &self.reason) {
            (Status::Dijkstra, _) => write!(f, "DIJKSTRA (k={})", self.trace.len()),
            (status, Some(reason)) => write!(f, "{status} ({reason})"),
            (status, None) => write!(f, "{status}"),
        }
    }
}

/// Work counters of one recognition pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PassStats {
    /// Adjacency entries read, summed over traversal, sorting, matching and
    /// contraction.
    pub edge_examinations: u64,
}

/// Decides whether `g` is a Dijkstra graph.
pub fn recognize(g: &FlowGraph) -> Verdict {
    recognize_instrumented(g).0
}

/// [`recognize`] together with its work counters.
pub fn recognize_instrumented(g: &FlowGraph) -> (Verdict, PassStats) {
    let mut stats = PassStats::default();
    let verdict = match run_pass(g, &mut stats, |_, _| {}) {
        Ok(pass) => pass.verdict(),
        Err(rejected) => rejected,
    };
    (verdict, stats)
}

pub(crate) struct Pass {
    pub(crate) work: WorkGraph,
    pub(crate) steps: Vec<PrimeMatch>,
}

impl Pass {
    pub(crate) fn verdict(self) -> Verdict {
        let trace = ContractionTrace::new(self.steps);
        if self.work.vertex_count() == 1 {
            Verdict {
                status: Status::Dijkstra,
                reason: None,
                trace,
            }
        } else {
            Verdict {
                status: Status::NotDijkstra,
                reason: Some(Reason::StuckResidue {
                    vertices: self.work.vertex_count(),
                    edges: self.work.edge_count(),
                }),
                trace,
            }
        }
    }
}

/// Runs the contraction pass, calling `on_prime` with the working graph just
/// before each contraction. Returns the rejecting verdict when the input fails
/// one of the up-front gates.
pub(crate) fn run_pass<F>(g: &FlowGraph, stats: &mut PassStats, mut on_prime: F) -> Result<Pass, Verdict>
where
    F: FnMut(&WorkGraph, &PrimeMatch),
{
    let (n, m) = (g.vertex_count(), g.edge_count());
    if m + 1 >= 2 * n {
        return Err(Verdict::rejected(
            Status::NotDijkstra,
            Reason::EdgeBoundExceeded { vertices: n, edges: m },
        ));
    }
    stats.edge_examinations += m as u64;
    let unreachable = unreachable_count(g);
    if unreachable > 0 {
        return Err(Verdict::rejected(
            Status::NotFlowGraph,
            Reason::Unreachable { count: unreachable },
        ));
    }

    let mut examined = 0;
    let ec = cycle_edges_counted(g, &mut examined);
    let topo = topo_sort_counted(g, &ec, &mut examined).expect("DFS cycle edges leave an acyclic graph");
    let mut work = WorkGraph::new(g, &ec);
    let mut steps = Vec::new();
    for &v in topo.order().iter().rev() {
        if work.vertex_count() == 1 {
            break;
        }
        if let Some(pm) = work.match_at(v) {
            on_prime(&work, &pm);
            work.contract(&pm);
            steps.push(pm);
        }
    }
    stats.edge_examinations += examined + work.examined;
    Ok(Pass { work, steps })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("trace step {0} does not match a prime of the current graph")]
    InvalidStep(usize),
}

/// Applies the contractions of `trace` to `g` in order, re-validating each
/// recorded prime against the evolving graph, and returns the final graph.
pub fn replay(g: &FlowGraph, trace: &ContractionTrace) -> Result<FlowGraph, ReplayError> {
    let ec = detect_cycle_edges(g);
    let mut work = WorkGraph::new(g, &ec);
    for (i, step) in trace.steps().iter().enumerate() {
        if work.match_at(step.source()).as_ref() != Some(step) {
            return Err(ReplayError::InvalidStep(i));
        }
        work.contract(step);
    }
    Ok(work.to_flow_graph().0)
}
