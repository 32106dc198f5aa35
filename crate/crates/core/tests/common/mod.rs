//! Helpers shared by the integration tests. Everything here is written
//! against the public API only and avoids the code paths it is used to check.
#![allow(dead_code)]

use dg_core::{
    detect_cycle_edges, detect_cycle_edges_with, match_prime_at, CycleEdgeSet, FlowGraph, PrimeMatch, VertexId,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn graph(vertices: &[&str], edges: &[(&str, &str)], source: &str) -> FlowGraph {
    FlowGraph::build(vertices.iter().copied(), edges.iter().copied(), source).unwrap()
}

pub fn chain(n: usize) -> FlowGraph {
    let names: Vec<String> = (0..n).map(|i| format!("c{i:03}")).collect();
    let edges: Vec<(String, String)> = names.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    FlowGraph::build(names.clone(), edges, &names[0]).unwrap()
}

/// Renames every vertex through a random permutation of fresh names, so the
/// name order (and with it the internal id order) is shuffled too.
pub fn random_rename(g: &FlowGraph, seed: u64) -> (FlowGraph, Vec<(String, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..g.vertex_count()).collect();
    labels.shuffle(&mut rng);
    let old: Vec<String> = g.vertices().map(|v| g.name(v).to_string()).collect();
    let renaming: Vec<(String, String)> = old
        .iter()
        .zip(&labels)
        .map(|(o, &l)| (o.clone(), format!("r{l}")))
        .collect();
    let lookup = |name: &str| renaming.iter().find(|(o, _)| o == name).unwrap().1.clone();
    (g.renamed(lookup).unwrap(), renaming)
}

/// A random simple flow graph: a random spanning arborescence from vertex 0
/// plus `extra` random further edges.
pub fn random_flow_graph(n: usize, extra: usize, seed: u64) -> FlowGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(&mut rng);
    order.insert(0, 0);
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        edges.insert((parent, order[i]));
    }
    let mut attempts = 0;
    while edges.len() < n - 1 + extra && attempts < 20 * (n + extra) {
        attempts += 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.insert((a, b));
        }
    }
    let named: Vec<(String, String)> = edges
        .iter()
        .map(|&(a, b)| (names[a].clone(), names[b].clone()))
        .collect();
    FlowGraph::build(names.clone(), named, &names[0]).unwrap()
}

/// Exhaustive isomorphism search (source to source), for small graphs.
pub fn brute_force_isomorphic(g1: &FlowGraph, g2: &FlowGraph) -> bool {
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    let a: Vec<VertexId> = g1.vertices().collect();
    let b: Vec<VertexId> = g2.vertices().collect();
    let n = a.len();
    let adj = |g: &FlowGraph, vs: &[VertexId]| -> Vec<Vec<bool>> {
        vs.iter()
            .map(|&x| vs.iter().map(|&y| g.has_edge(x, y)).collect())
            .collect()
    };
    let (ea, eb) = (adj(g1, &a), adj(g2, &b));
    let sa = a.iter().position(|&v| v == g1.source()).unwrap();
    let sb = b.iter().position(|&v| v == g2.source()).unwrap();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[sa] = sb;
    used[sb] = true;
    let order: Vec<usize> = std::iter::once(sa).chain((0..n).filter(|&i| i != sa)).collect();

    fn extend(
        k: usize,
        order: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ea: &[Vec<bool>],
        eb: &[Vec<bool>],
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let x = order[k];
        for y in 0..used.len() {
            if used[y] {
                continue;
            }
            let fits = order[..k]
                .iter()
                .all(|&p| ea[p][x] == eb[map[p]][y] && ea[x][p] == eb[y][map[p]]);
            if fits {
                map[x] = y;
                used[y] = true;
                if extend(k + 1, order, map, used, ea, eb) {
                    return true;
                }
                used[y] = false;
                map[x] = usize::MAX;
            }
        }
        false
    }
    extend(1, &order, &mut map, &mut used, &ea, &eb)
}

/// Every prime of `g`, one per source vertex at most.
pub fn all_primes(g: &FlowGraph) -> (CycleEdgeSet, Vec<PrimeMatch>) {
    let ec = detect_cycle_edges(g);
    let primes = g.vertices().filter_map(|v| match_prime_at(g, &ec, v)).collect();
    (ec, primes)
}

/// Calls `visit` with the cycle-edge set of every depth-first search that
/// differs in the order children are visited, stopping after `limit` orders.
/// Returns the number of orders tried.
pub fn for_each_child_order<F>(g: &FlowGraph, limit: usize, mut visit: F) -> usize
where
    F: FnMut(CycleEdgeSet),
{
    let vs: Vec<VertexId> = g.vertices().collect();
    let perms: Vec<Vec<Vec<VertexId>>> = vs.iter().map(|&v| permutations(g.successors(v))).collect();
    let mut digits = vec![0usize; vs.len()];
    let mut tried = 0;
    loop {
        let chosen = |v: VertexId, _: &[VertexId]| {
            let i = vs.binary_search(&v).unwrap();
            perms[i][digits[i]].clone()
        };
        visit(detect_cycle_edges_with(g, chosen));
        tried += 1;
        if tried >= limit {
            return tried;
        }
        let mut i = 0;
        loop {
            if i == vs.len() {
                return tried;
            }
            digits[i] += 1;
            if digits[i] < perms[i].len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

pub fn permutations(items: &[VertexId]) -> Vec<Vec<VertexId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}
