mod common;

use common::*;
use dg_core::generator::{generate_dg, perturb, Label, PerturbMode};
use dg_core::{
    canonical_code, contract, detect_cycle_edges, expand, match_prime_at, parse_graph, recognize, topo_sort, FlowGraph,
    Format, GraphDocument, StatementKind, VertexId,
};
use proptest::prelude::*;

fn dg() -> impl Strategy<Value = FlowGraph> {
    (any::<u64>(), 1usize..80).prop_map(|(seed, n)| generate_dg(seed, n).0)
}

fn flow_graph() -> impl Strategy<Value = FlowGraph> {
    (any::<u64>(), 2usize..10, 0usize..8).prop_map(|(seed, n, extra)| random_flow_graph(n, extra, seed))
}

fn any_graph() -> impl Strategy<Value = FlowGraph> {
    prop_oneof![dg(), flow_graph()]
}

fn kind() -> impl Strategy<Value = StatementKind> {
    prop_oneof![
        Just(StatementKind::Sequence),
        Just(StatementKind::IfThen),
        Just(StatementKind::IfThenElse),
        Just(StatementKind::While),
        Just(StatementKind::Repeat),
        (3u32..7).prop_map(StatementKind::Case),
    ]
}

/// Kahn's algorithm on the graph without `removed`; true if every vertex is
/// output.
fn acyclic_without(g: &FlowGraph, removed: &dg_core::CycleEdgeSet) -> bool {
    let mut indeg = vec![0usize; g.id_bound()];
    for (u, w) in g.edges() {
        if !removed.contains(u, w) {
            indeg[w.index()] += 1;
        }
    }
    let mut ready: Vec<VertexId> = g.vertices().filter(|v| indeg[v.index()] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &w in g.successors(v) {
            if !removed.contains(v, w) {
                indeg[w.index()] -= 1;
                if indeg[w.index()] == 0 {
                    ready.push(w);
                }
            }
        }
    }
    seen == g.vertex_count()
}

fn edge_delta(kind: StatementKind) -> usize {
    match kind {
        StatementKind::Trivial => 0,
        StatementKind::Sequence => 1,
        StatementKind::IfThen | StatementKind::While | StatementKind::Repeat => 3,
        StatementKind::IfThenElse => 4,
        StatementKind::Case(p) => 2 * p as usize,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn removing_cycle_edges_leaves_a_dag(g in any_graph()) {
        let ec = detect_cycle_edges(&g);
        prop_assert!(ec.iter().all(|(u, w)| g.has_edge(u, w)));
        prop_assert!(acyclic_without(&g, &ec));
        let topo = topo_sort(&g, &ec).unwrap();
        prop_assert_eq!(topo.order().len(), g.vertex_count());
        for (u, w) in g.edges() {
            if !ec.contains(u, w) {
                prop_assert!(topo.rank(u).unwrap() < topo.rank(w).unwrap());
            }
        }
    }

    #[test]
    fn analysis_is_deterministic(g in any_graph()) {
        let ec = detect_cycle_edges(&g);
        prop_assert_eq!(&ec, &detect_cycle_edges(&g.clone()));
        prop_assert_eq!(topo_sort(&g, &ec).unwrap(), topo_sort(&g, &ec).unwrap());
        prop_assert_eq!(recognize(&g), recognize(&g));
        prop_assert_eq!(canonical_code(&g), canonical_code(&g));
    }

    #[test]
    fn generated_sizes_follow_the_script(seed in any::<u64>(), n in 1usize..120) {
        let (g, script) = generate_dg(seed, n);
        let vertices = 1 + script.steps.iter().map(|s| s.kind.fresh_vertex_count()).sum::<usize>();
        let edges: usize = script.steps.iter().map(|s| edge_delta(s.kind)).sum();
        prop_assert_eq!(g.vertex_count(), vertices);
        prop_assert_eq!(g.edge_count(), edges);
        prop_assert!(g.vertex_count() >= n);
        prop_assert!(g.edge_count() + 2 <= 2 * g.vertex_count());
    }

    #[test]
    fn primes_are_independent(g in any_graph()) {
        let (_, primes) = all_primes(&g);
        for (i, h) in primes.iter().enumerate() {
            for h2 in &primes[i + 1..] {
                let shared: Vec<VertexId> = h.members().iter().copied().filter(|&v| h2.contains(v)).collect();
                match shared.as_slice() {
                    [] => {}
                    [x] => prop_assert!(
                        (*x == h.source() && *x == h2.sink()) || (*x == h.sink() && *x == h2.source()),
                        "shared vertex must be source of one and sink of the other"
                    ),
                    _ => prop_assert!(false, "primes share {} vertices", shared.len()),
                }
            }
        }
    }

    #[test]
    fn contraction_preserves_other_primes(g in any_graph()) {
        let (ec, primes) = all_primes(&g);
        for h in &primes {
            let (g2, ec2) = contract(&g, &ec, h).unwrap();
            prop_assert_eq!(g2.vertex_count(), g.vertex_count() - (h.members().len() - 1));
            prop_assert!(!h.interior().any(|v| g2.contains(v)) || h.interior().count() == 0);
            let image = |v: VertexId| if h.contains(v) { h.source() } else { v };
            for h2 in primes.iter().filter(|p| p.source() != h.source()) {
                let found = match_prime_at(&g2, &ec2, image(h2.source()));
                prop_assert!(found.is_some(), "image of a prime is not a prime");
                let found = found.unwrap();
                prop_assert_eq!(found.kind(), h2.kind());
                let mut members: Vec<VertexId> = h2.members().iter().map(|&v| image(v)).collect();
                members.sort();
                prop_assert_eq!(found.members(), members.as_slice());
            }
        }
    }

    #[test]
    fn contraction_commutes(g in any_graph()) {
        let (ec, primes) = all_primes(&g);
        for (i, h) in primes.iter().enumerate() {
            for h2 in &primes[i + 1..] {
                let one = |first: &dg_core::PrimeMatch, second: &dg_core::PrimeMatch| {
                    let (g1, ec1) = contract(&g, &ec, first).unwrap();
                    let image = if first.contains(second.source()) { first.source() } else { second.source() };
                    let again = match_prime_at(&g1, &ec1, image).expect("prime survives");
                    contract(&g1, &ec1, &again).unwrap()
                };
                prop_assert_eq!(one(h, h2), one(h2, h));
            }
        }
    }

    #[test]
    fn expand_then_contract_is_identity(seed in any::<u64>(), n in 1usize..60, pick in any::<prop::sample::Index>(), k in kind()) {
        let (g, script) = generate_dg(seed, n);
        let open: Vec<&str> = script.labels.iter().filter(|(_, l)| *l == Label::X).map(|(v, _)| v.as_str()).collect();
        let v = g.vertex(open[pick.index(open.len())]).unwrap();
        let fresh: Vec<String> = (0..k.fresh_vertex_count()).map(|i| format!("fresh{i}")).collect();
        let big = expand(&g, v, k, &fresh).unwrap();
        prop_assert_eq!(big.vertex_count(), g.vertex_count() + k.fresh_vertex_count());
        prop_assert_eq!(big.edge_count(), g.edge_count() + edge_delta(k));
        let ec = detect_cycle_edges(&big);
        let v_big = big.vertex(g.name(v)).unwrap();
        let pm = match_prime_at(&big, &ec, v_big);
        prop_assert!(pm.is_some());
        let pm = pm.unwrap();
        prop_assert_eq!(pm.kind(), k);
        let (small, _) = contract(&big, &ec, &pm).unwrap();
        let rebuilt = FlowGraph::build(
            small.vertices().map(|x| small.name(x)),
            small.named_edges(),
            small.name(small.source()),
        ).unwrap();
        prop_assert_eq!(rebuilt, g);
    }

    #[test]
    fn code_shape(g in dg()) {
        let verdict = recognize(&g);
        prop_assert!(verdict.is_dijkstra());
        let code = canonical_code(&g).unwrap();
        let t = code.tokens();
        prop_assert_eq!(t.len(), g.vertex_count() + verdict.trace.len());
        prop_assert!(t.len() < 2 * g.vertex_count());
        prop_assert_eq!(t.iter().filter(|&&x| x == 1).count(), g.vertex_count());
        prop_assert_eq!(t[0], 1);
        prop_assert_eq!(t[t.len() - 1], 1);
        prop_assert!(t.windows(2).all(|w| w[0] == 1 || w[1] == 1));
        let max_out = g.vertices().map(|v| g.successors(v).len()).max().unwrap_or(0) as u32;
        prop_assert!(t.iter().all(|&x| x >= 1 && x <= max_out + 4));
        let mut seen: Vec<VertexId> = code.provenance().iter().map(|&(_, v)| v).collect();
        seen.sort();
        prop_assert_eq!(seen, g.vertices().collect::<Vec<_>>());
    }

    #[test]
    fn code_ignores_names(g in dg(), seed in any::<u64>()) {
        let (renamed, _) = random_rename(&g, seed);
        prop_assert_eq!(canonical_code(&g).unwrap().tokens().to_vec(), canonical_code(&renamed).unwrap().tokens().to_vec());
    }

    #[test]
    fn files_round_trip(g in any_graph()) {
        let mut doc = GraphDocument::new("g", g);
        doc.metadata.insert("origin".into(), "proptest".into());
        for format in [Format::Json, Format::Dot] {
            let text = doc.serialize(format);
            let back = parse_graph(text.as_bytes(), format).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(back.serialize(format), text);
        }
    }

    #[test]
    fn perturbations_stay_simple(g in dg(), seed in any::<u64>(), mode in 0usize..4) {
        if let Ok(p) = perturb(&g, seed, PerturbMode::ALL[mode]) {
            prop_assert_eq!(p.vertex_count(), g.vertex_count());
            let rebuilt = FlowGraph::build(p.vertices().map(|x| p.name(x)), p.named_edges(), p.name(p.source()));
            prop_assert!(rebuilt.is_ok());
        }
    }
}
