use std::collections::BTreeSet;

use lbcast_core::graph::{
    brute_force_min_vertex_cut, disjoint_paths_up_to, gamma, local_connectivity, minimum_vertex_cut,
    vertex_connectivity, Graph, NodeId, NodeSet,
};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in (u + 1)..n {
                    if bits[i] {
                        edges.push((u, v));
                    }
                    i += 1;
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

/// Smallest set of other nodes whose removal separates `u` from `v`, by trying
/// every subset; `u`-`v` edges cannot be cut and count as one path each.
fn separator_oracle(g: &Graph, u: NodeId, v: NodeId) -> usize {
    let n = g.node_count();
    let direct = usize::from(g.has_edge(u, v));
    let others: Vec<NodeId> = g.nodes().filter(|&x| x != u && x != v).collect();
    let mut best = others.len();
    for mask in 0u32..(1 << others.len()) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let removed: NodeSet = others
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &x)| x)
            .collect();
        let mut seen = vec![false; n];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            for &y in g.neighbors(x) {
                if seen[y] || removed.contains(&y) || (x == u && y == v) {
                    continue;
                }
                seen[y] = true;
                stack.push(y);
            }
        }
        if !seen[v] {
            best = size;
        }
    }
    best + direct
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn connectivity_matches_exhaustive_cut(g in graph_strategy(8)) {
        prop_assert_eq!(vertex_connectivity(&g).unwrap(), brute_force_min_vertex_cut(&g).unwrap());
    }

    #[test]
    fn minimum_cut_has_connectivity_size_and_disconnects(g in graph_strategy(8)) {
        let k = vertex_connectivity(&g).unwrap();
        match minimum_vertex_cut(&g).unwrap() {
            Some(cut) => {
                prop_assert_eq!(cut.len(), k);
                prop_assert!(!g.is_connected_without(&cut));
            }
            None => prop_assert!(g.is_complete()),
        }
    }

    #[test]
    fn local_connectivity_matches_separator_oracle(g in graph_strategy(7), a in 0usize..7, b in 0usize..7) {
        let n = g.node_count();
        let (u, v) = (a % n, b % n);
        prop_assume!(u != v);
        prop_assert_eq!(local_connectivity(&g, u, v).unwrap(), separator_oracle(&g, u, v));
    }

    #[test]
    fn disjoint_paths_are_menger_sized_and_disjoint(g in graph_strategy(8), a in 0usize..8, b in 0usize..8, k in 0usize..8) {
        let n = g.node_count();
        let (u, v) = (a % n, b % n);
        prop_assume!(u != v);
        let paths = disjoint_paths_up_to(&g, u, v, k).unwrap();
        prop_assert_eq!(paths.len(), k.min(local_connectivity(&g, u, v).unwrap()));
        let mut interior_seen = BTreeSet::new();
        for (i, p) in paths.iter().enumerate() {
            prop_assert_eq!(p.index, i);
            prop_assert_eq!(p.hops.first(), Some(&u));
            prop_assert_eq!(p.hops.last(), Some(&v));
            for w in p.hops.windows(2) {
                prop_assert!(g.has_edge(w[0], w[1]));
            }
            let distinct: BTreeSet<_> = p.hops.iter().collect();
            prop_assert_eq!(distinct.len(), p.hops.len());
            for &x in p.interior() {
                prop_assert!(interior_seen.insert(x), "node {} on two paths", x);
            }
        }
        if g.has_edge(u, v) && k > 0 {
            prop_assert_eq!(&paths[0].hops, &vec![u, v]);
        }
        for w in paths.windows(2).skip(usize::from(g.has_edge(u, v))) {
            prop_assert!((w[0].hops.len(), &w[0].hops) <= (w[1].hops.len(), &w[1].hops));
        }
    }

    #[test]
    fn paths_do_not_depend_on_edge_insertion_order(g in graph_strategy(7), a in 0usize..7, b in 0usize..7) {
        let n = g.node_count();
        let (u, v) = (a % n, b % n);
        prop_assume!(u != v);
        let mut reversed: Vec<_> = g.edges().collect();
        reversed.reverse();
        let h = Graph::from_edges(n, reversed).unwrap();
        prop_assert_eq!(disjoint_paths_up_to(&g, u, v, 4).unwrap(), disjoint_paths_up_to(&h, u, v, 4).unwrap());
    }

    #[test]
    fn gamma_is_the_outer_boundary(g in graph_strategy(8), mask in any::<u8>()) {
        let s: NodeSet = g.nodes().filter(|&u| mask & (1 << u) != 0).collect();
        let boundary = gamma(&g, &s).unwrap();
        prop_assert!(boundary.is_disjoint(&s));
        for u in g.nodes().filter(|u| !s.contains(u)) {
            let touches = g.neighbors(u).iter().any(|v| s.contains(v));
            prop_assert_eq!(boundary.contains(&u), touches);
        }
    }

    #[test]
    fn text_format_round_trips(g in graph_strategy(8)) {
        prop_assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }
}
