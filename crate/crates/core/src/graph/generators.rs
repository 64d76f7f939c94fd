//! Graph families used by tests, the fuzzer and the CLI fixtures.

use rand::Rng;

use super::{Graph, NodeId};

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
    Graph::from_edges(n, edges).expect("complete graph")
}

/// `0 - 1 - ... - (n-1) - 0`; needs `n >= 3`.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    Graph::from_edges(n, (0..n).map(|u| (u.min((u + 1) % n), u.max((u + 1) % n))))
        .expect("cycle graph")
}

/// `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("path graph")
}

/// Node 0 joined to `leaves` other nodes.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star graph")
}

/// `u ~ v` iff `(v - u) mod n` or `(u - v) mod n` is one of `offsets`.
pub fn circulant(n: usize, offsets: &[usize]) -> Graph {
    let mut g = Graph::new(n).expect("circulant needs nodes");
    for u in 0..n {
        for &d in offsets {
            let d = d % n;
            if d == 0 {
                continue;
            }
            let v = (u + d) % n;
            if !g.has_edge(u, v) {
                g.add_edge(u, v).expect("circulant edge");
            }
        }
    }
    g
}

/// Parts `0..a` and `a..a+b`, every cross pair joined.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
    Graph::from_edges(a + b, edges).expect("complete bipartite graph")
}

/// Outer 5-cycle `0..5`, inner pentagram `5..10`, spokes `i - i+5`.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    let edges = edges.into_iter().map(|(u, v): (NodeId, NodeId)| (u.min(v), u.max(v)));
    Graph::from_edges(10, edges).expect("petersen graph")
}

/// G(n, p): every pair joined independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::new(n).expect("erdos-renyi needs nodes");
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).expect("fresh pair");
            }
        }
    }
    g
}

/// Named structured graphs on `3..=n_max` nodes: complete graphs, cycles,
/// every connected circulant offset set, and complete bipartite graphs with both sides
/// of size at least 2. Isomorphic duplicates are kept under distinct names.
pub fn structured_families(n_max: usize) -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 3..=n_max {
        out.push((format!("complete-{n}"), complete(n)));
        out.push((format!("cycle-{n}"), cycle(n)));
        let half = n / 2;
        for mask in 1u32..(1 << half) {
            let offsets: Vec<usize> = (1..=half).filter(|d| mask & (1 << (d - 1)) != 0).collect();
            if offsets == [1] {
                continue;
            }
            let g = circulant(n, &offsets);
            if !g.is_connected() {
                continue;
            }
            let name = offsets.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
            out.push((format!("circulant-{n}[{name}]"), g));
        }
        for a in 2..=n / 2 {
            out.push((format!("bipartite-{a},{}", n - a), complete_bipartite(a, n - a)));
        }
    }
    out
}
