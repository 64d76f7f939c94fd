//! Unit-capacity max-flow on the vertex-split network.
//!
//! Every node `v` becomes `in(v) -> out(v)` with capacity one, every undirected
//! edge `{a, b}` becomes `out(a) -> in(b)` and `out(b) -> in(a)` with unbounded
//! capacity, so minimum cuts only ever cross node edges. Augmenting
//! paths are found by breadth-first search over edge lists sorted by target
//! node id, so the resulting flow only depends on the graph and the endpoints.

use super::{Graph, GraphError, NodeId, NodeSet};

const UNBOUNDED: u32 = u32::MAX / 2;

pub(super) struct SplitNetwork {
    adjacency: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
    initial: Vec<u32>,
    source: usize,
    sink: usize,
}

#[inline]
fn entry(v: NodeId) -> usize {
    2 * v
}

#[inline]
fn exit(v: NodeId) -> usize {
    2 * v + 1
}

impl SplitNetwork {
    /// Network for flows from `s` to `t`. When `skip_direct` is set the edge
    /// `{s, t}` is left out.
    pub(super) fn new(g: &Graph, s: NodeId, t: NodeId, skip_direct: bool) -> Self {
        let n = g.node_count();
        let mut net = Self {
            adjacency: vec![Vec::new(); 2 * n],
            to: Vec::new(),
            cap: Vec::new(),
            initial: Vec::new(),
            source: exit(s),
            sink: entry(t),
        };
        for v in g.nodes() {
            let cap = if v == s || v == t { UNBOUNDED } else { 1 };
            net.push(entry(v), exit(v), cap);
        }
        for (a, b) in g.edges() {
            if skip_direct && ((a == s && b == t) || (a == t && b == s)) {
                continue;
            }
            net.push(exit(a), entry(b), UNBOUNDED);
            net.push(exit(b), entry(a), UNBOUNDED);
        }
        let to = &net.to;
        for list in &mut net.adjacency {
            list.sort_by_key(|&e| (to[e] / 2, to[e] % 2, e));
        }
        net
    }

    fn push(&mut self, from: usize, to: usize, cap: u32) {
        let id = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.initial.push(cap);
        self.adjacency[from].push(id);
        self.to.push(from);
        self.cap.push(0);
        self.initial.push(0);
        self.adjacency[to].push(id + 1);
    }

    /// Augments one unit at a time until no path remains or `limit` units flow.
    pub(super) fn max_flow(&mut self, limit: usize) -> usize {
        let mut flow = 0;
        while flow < limit && self.augment() {
            flow += 1;
        }
        flow
    }

    fn augment(&mut self) -> bool {
        let mut parent_edge = vec![usize::MAX; self.adjacency.len()];
        let mut visited = vec![false; self.adjacency.len()];
        let mut queue = std::collections::VecDeque::new();
        visited[self.source] = true;
        queue.push_back(self.source);
        while let Some(x) = queue.pop_front() {
            if x == self.sink {
                break;
            }
            for &e in &self.adjacency[x] {
                let y = self.to[e];
                if self.cap[e] > 0 && !visited[y] {
                    visited[y] = true;
                    parent_edge[y] = e;
                    queue.push_back(y);
                }
            }
        }
        if !visited[self.sink] {
            return false;
        }
        let mut x = self.sink;
        while x != self.source {
            let e = parent_edge[x];
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            x = self.to[e ^ 1];
        }
        true
    }

    /// Graph nodes whose split edge crosses the residual cut after `max_flow`.
    fn residual_cut(&self) -> NodeSet {
        let mut visited = vec![false; self.adjacency.len()];
        let mut stack = vec![self.source];
        visited[self.source] = true;
        while let Some(x) = stack.pop() {
            for &e in &self.adjacency[x] {
                let y = self.to[e];
                if self.cap[e] > 0 && !visited[y] {
                    visited[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.adjacency.len() / 2)
            .filter(|&v| visited[entry(v)] && !visited[exit(v)])
            .collect()
    }

    /// Splits the current flow into node sequences from source to sink. At
    /// every branch the smallest next node id is taken.
    pub(super) fn decompose(&self, s: NodeId, t: NodeId) -> Vec<Vec<NodeId>> {
        let carries = |e: usize| e % 2 == 0 && self.initial[e] > self.cap[e];
        let mut consumed = vec![false; self.to.len()];
        let mut paths = Vec::new();
        loop {
            let mut hops = vec![s];
            let mut at = exit(s);
            loop {
                let next = self.adjacency[at]
                    .iter()
                    .copied()
                    .find(|&e| carries(e) && !consumed[e] && self.to[e] % 2 == 0);
                let Some(e) = next else {
                    hops.clear();
                    break;
                };
                consumed[e] = true;
                let v = self.to[e] / 2;
                hops.push(v);
                if v == t {
                    break;
                }
                at = exit(v);
            }
            if hops.is_empty() {
                return paths;
            }
            paths.push(hops);
        }
    }
}

/// Maximum number of internally node-disjoint `u`-`v` paths. Counts the direct
/// edge when `u` and `v` are adjacent.
pub fn local_connectivity(g: &Graph, u: NodeId, v: NodeId) -> Result<usize, GraphError> {
    g.check_node(u)?;
    g.check_node(v)?;
    if u == v {
        return Err(GraphError::SelfLoop(u));
    }
    let direct = g.has_edge(u, v);
    let mut net = SplitNetwork::new(g, u, v, direct);
    Ok(net.max_flow(usize::MAX) + usize::from(direct))
}

/// Size of a minimum vertex cut; `n - 1` for complete graphs and `0` when the
/// graph is already disconnected.
pub fn vertex_connectivity(g: &Graph) -> Result<usize, GraphError> {
    Ok(min_cut_search(g)?.0)
}

/// A minimum vertex cut, or `None` for complete graphs where no cut exists.
pub fn minimum_vertex_cut(g: &Graph) -> Result<Option<NodeSet>, GraphError> {
    Ok(min_cut_search(g)?.1)
}

fn min_cut_search(g: &Graph) -> Result<(usize, Option<NodeSet>), GraphError> {
    let n = g.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes { needed: 2, n });
    }
    if g.is_complete() {
        return Ok((n - 1, None));
    }
    let mut best: Option<(usize, NodeSet)> = None;
    for u in g.nodes() {
        for v in (u + 1)..n {
            if g.has_edge(u, v) {
                continue;
            }
            let bound = best.as_ref().map_or(usize::MAX, |(k, _)| *k);
            let mut net = SplitNetwork::new(g, u, v, false);
            let flow = net.max_flow(bound);
            if flow < bound {
                best = Some((flow, net.residual_cut()));
                if flow == 0 {
                    break;
                }
            }
        }
    }
    let (k, cut) = best.expect("non-complete graph has a non-adjacent pair");
    Ok((k, Some(cut)))
}

#[cfg(test)]
mod tests {
    use super::super::generators::*;
    use super::super::Graph;
    use super::*;

    #[test]
    fn connectivity_examples() {
        assert_eq!(vertex_connectivity(&complete(5)).unwrap(), 4);
        assert_eq!(vertex_connectivity(&cycle(5)).unwrap(), 2);
        assert_eq!(vertex_connectivity(&petersen()).unwrap(), 3);
        assert_eq!(vertex_connectivity(&path(3)).unwrap(), 1);
        assert_eq!(vertex_connectivity(&complete(2)).unwrap(), 1);
        assert!(matches!(
            vertex_connectivity(&complete(1)),
            Err(GraphError::TooFewNodes { needed: 2, n: 1 })
        ));
    }

    #[test]
    fn disconnected_graph_has_empty_cut() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(vertex_connectivity(&g).unwrap(), 0);
        assert_eq!(minimum_vertex_cut(&g).unwrap(), Some(NodeSet::new()));
    }

    #[test]
    fn minimum_cut_disconnects() {
        for g in [cycle(6), petersen(), circulant(8, &[1, 2]), complete_bipartite(2, 4)] {
            let k = vertex_connectivity(&g).unwrap();
            let cut = minimum_vertex_cut(&g).unwrap().unwrap();
            assert_eq!(cut.len(), k, "{g}");
            assert!(!g.is_connected_without(&cut), "{g}");
        }
        assert_eq!(minimum_vertex_cut(&complete(4)).unwrap(), None);
    }

    #[test]
    fn local_connectivity_counts_direct_edge() {
        assert_eq!(local_connectivity(&complete(5), 0, 1).unwrap(), 4);
        assert_eq!(local_connectivity(&cycle(4), 0, 2).unwrap(), 2);
        assert_eq!(local_connectivity(&cycle(4), 0, 1).unwrap(), 2);
        assert_eq!(local_connectivity(&path(3), 0, 2).unwrap(), 1);
    }
}
