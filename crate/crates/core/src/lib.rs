//! Recognition and isomorphism of Dijkstra graphs: the control-flow graphs of
//! classically structured programs built from sequence, selection and loop
//! statements.
//!
//! The entry points are [`recognize`], which contracts a graph prime by prime
//! and reports whether it reduces to a single vertex, [`canonical_code`],
//! which turns the same pass into an integer-token code that is equal for two
//! graphs exactly when they are isomorphic, and [`is_isomorphic`].
//!
//! ```
//! use dg_core::{canonical_code, is_isomorphic, recognize, FlowGraph};
//!
//! // while (v) { w }; t
//! let g = FlowGraph::build(["v", "w", "t"], [("v", "w"), ("w", "v"), ("v", "t")], "v").unwrap();
//! assert_eq!(recognize(&g).to_string(), "DIJKSTRA (k=1)");
//! assert_eq!(canonical_code(&g).unwrap().to_string(), "1 4 1 1");
//!
//! let h = FlowGraph::build(["head", "body", "exit"], [("head", "body"), ("body", "head"), ("head", "exit")], "head").unwrap();
//! let mapping = is_isomorphic(&g, &h).unwrap().expect("same shape");
//! assert_eq!(h.name(mapping.image(g.vertex("w").unwrap()).unwrap()), "body");
//! ```

pub mod canonical;
pub mod generator;
pub mod graph;
pub mod io;
pub mod primes;
pub mod recognizer;
pub mod report;
mod work;

pub use canonical::{canonical_code, is_isomorphic, CanonError, CanonicalCode, CodeLine, IsoMapping};
pub use generator::{
    generate_dg, generate_dg_with, oracle_reduce, perturb, ExpansionScript, GenError, GeneratorConfig, KindChoice,
    PerturbMode,
};
pub use graph::{
    check_flow_reachability, detect_cycle_edges, detect_cycle_edges_with, topo_sort, CycleEdgeSet, FlowGraph,
    GraphError, TopoOrder, VertexId,
};
pub use io::{parse_graph, Format, GraphDocument, IoError};
pub use primes::{contract, expand, match_prime_at, PrimeError, PrimeMatch, StatementKind};
pub use recognizer::{recognize, replay, ContractionTrace, Reason, ReplayError, Status, Verdict};
pub use report::{similarity_report, BatchItem, SimilarityReport};
