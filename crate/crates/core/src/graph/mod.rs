//! Undirected simple graphs and the connectivity machinery the protocol relies on.
//!
//! Node ids are dense indices in `[0, n)`. Adjacency lists are kept sorted so
//! every traversal visits neighbours in ascending id order, which is what makes
//! [`canonical_disjoint_paths`] reproducible on every simulated node.

mod flow;
pub mod generators;
mod paths;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use flow::{local_connectivity, minimum_vertex_cut, vertex_connectivity};
pub use paths::{canonical_disjoint_paths, disjoint_paths_up_to, Path, PathError};

pub type NodeId = usize;
pub type NodeSet = BTreeSet<NodeId>;

/// Largest graph accepted by the exhaustive cut oracle.
pub const BRUTE_FORCE_CUT_MAX_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("operation needs at least {needed} nodes, graph has {n}")]
    TooFewNodes { needed: usize, n: usize },
    #[error("graph has {n} nodes, exhaustive search is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing node count")]
    MissingNodeCount,
    #[error("invalid node count {0:?}")]
    BadNodeCount(String),
    #[error("expected `u v`, got {0:?}")]
    BadEdgeLine(String),
    #[error("edge endpoints must satisfy u < v, got {0} {1}")]
    Unordered(NodeId, NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The communication network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        Ok(Self {
            adjacency: vec![Vec::new(); n],
        })
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new(n)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let pos = match self.adjacency[u].binary_search(&v) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u.min(v), u.max(v))),
            Err(pos) => pos,
        };
        self.adjacency[u].insert(pos, v);
        let pos = self.adjacency[v].binary_search(&u).unwrap_err();
        self.adjacency[v].insert(pos, u);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    /// Neighbours of `u` in ascending order.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.node_count();
        self.adjacency.iter().all(|nbrs| nbrs.len() == n - 1)
    }

    pub fn check_node(&self, u: NodeId) -> Result<(), GraphError> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node: u,
                n: self.node_count(),
            })
        }
    }

    /// True if the nodes outside `removed` form a single connected piece.
    /// An empty or single-node remainder counts as connected.
    pub fn is_connected_without(&self, removed: &NodeSet) -> bool {
        let n = self.node_count();
        let Some(start) = (0..n).find(|u| !removed.contains(u)) else {
            return true;
        };
        let mut seen = vec![false; n];
        for &r in removed {
            if r < n {
                seen[r] = true;
            }
        }
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_without(&NodeSet::new())
    }

    /// Parses the line-oriented graph format: `#` comments, a node count line,
    /// then one `u v` line per edge with `u < v`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |kind| ParseError {
                line: line_no,
                kind,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match graph.as_mut() {
                None => {
                    let n: usize = line
                        .parse()
                        .map_err(|_| err(ParseErrorKind::BadNodeCount(line.to_string())))?;
                    graph = Some(Graph::new(n).map_err(|e| err(e.into()))?);
                }
                Some(g) => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    let parsed = match fields.as_slice() {
                        [a, b] => a.parse::<NodeId>().ok().zip(b.parse::<NodeId>().ok()),
                        _ => None,
                    };
                    let (u, v) =
                        parsed.ok_or_else(|| err(ParseErrorKind::BadEdgeLine(line.to_string())))?;
                    g.check_node(u).map_err(|e| err(e.into()))?;
                    g.check_node(v).map_err(|e| err(e.into()))?;
                    if u >= v {
                        return Err(err(ParseErrorKind::Unordered(u, v)));
                    }
                    g.add_edge(u, v).map_err(|e| err(e.into()))?;
                }
            }
        }
        graph.ok_or(ParseError {
            line: text.lines().count(),
            kind: ParseErrorKind::MissingNodeCount,
        })
    }

    /// Renders the graph in the format accepted by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.node_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} edges=", self.node_count())?;
        let edges: Vec<String> = self.edges().map(|(u, v)| format!("{u}-{v}")).collect();
        write!(f, "{}", edges.join(","))
    }
}

/// Nodes outside `s` adjacent to at least one node of `s`.
pub fn gamma(g: &Graph, s: &NodeSet) -> Result<NodeSet, GraphError> {
    for &u in s {
        g.check_node(u)?;
    }
    Ok(s
        .iter()
        .flat_map(|&u| g.neighbors(u).iter().copied())
        .filter(|v| !s.contains(v))
        .collect())
}

pub fn min_degree(g: &Graph) -> usize {
    g.nodes().map(|u| g.degree(u)).min().unwrap_or(0)
}

/// Smallest `|S|` such that removing `S` leaves a disconnected graph, found by
/// trying every subset in order of size. Returns `n - 1` when no such set exists.
pub fn brute_force_min_vertex_cut(g: &Graph) -> Result<usize, GraphError> {
    let n = g.node_count();
    if n > BRUTE_FORCE_CUT_MAX_NODES {
        return Err(GraphError::TooLarge {
            n,
            cap: BRUTE_FORCE_CUT_MAX_NODES,
        });
    }
    let masks: Vec<u32> = g
        .nodes()
        .map(|u| g.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for size in 0..n.saturating_sub(1) {
        for removed in 0..=full {
            if removed.count_ones() as usize != size {
                continue;
            }
            let rest = full & !removed;
            if !mask_connected(&masks, rest) {
                return Ok(size);
            }
        }
    }
    Ok(n.saturating_sub(1))
}

fn mask_connected(masks: &[u32], nodes: u32) -> bool {
    if nodes == 0 {
        return true;
    }
    let start = nodes.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let u = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = masks[u] & nodes & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen == nodes
}

#[cfg(test)]
mod tests {
    use super::generators::*;
    use super::*;

    fn set(items: &[NodeId]) -> NodeSet {
        items.iter().copied().collect()
    }

    #[test]
    fn gamma_examples() {
        let k3 = complete(3);
        assert_eq!(gamma(&k3, &set(&[0])).unwrap(), set(&[1, 2]));
        let all: NodeSet = k3.nodes().collect();
        assert!(gamma(&k3, &all).unwrap().is_empty());
        let c4 = cycle(4);
        assert_eq!(gamma(&c4, &set(&[0, 1])).unwrap(), set(&[2, 3]));
        assert!(matches!(
            gamma(&c4, &set(&[7])),
            Err(GraphError::NodeOutOfRange { node: 7, n: 4 })
        ));
    }

    #[test]
    fn min_degree_examples() {
        assert_eq!(min_degree(&complete(4)), 3);
        assert_eq!(min_degree(&star(4)), 1);
        assert_eq!(min_degree(&cycle(6)), 2);
    }

    #[test]
    fn brute_force_cut_examples() {
        assert_eq!(brute_force_min_vertex_cut(&complete(4)).unwrap(), 3);
        assert_eq!(brute_force_min_vertex_cut(&path(3)).unwrap(), 1);
        let bowtie = Graph::from_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
        assert_eq!(brute_force_min_vertex_cut(&bowtie).unwrap(), 1);
        assert!(matches!(
            brute_force_min_vertex_cut(&complete(13)),
            Err(GraphError::TooLarge { n: 13, .. })
        ));
    }

    #[test]
    fn disconnected_graph_has_zero_cut() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(brute_force_min_vertex_cut(&g).unwrap(), 0);
        assert!(!g.is_connected());
    }

    #[test]
    fn construction_rejects_bad_edges() {
        let mut g = Graph::new(3).unwrap();
        assert_eq!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1)));
        g.add_edge(0, 2).unwrap();
        assert_eq!(g.add_edge(2, 0), Err(GraphError::DuplicateEdge(0, 2)));
        assert!(matches!(g.add_edge(0, 3), Err(GraphError::NodeOutOfRange { .. })));
        assert_eq!(Graph::new(0), Err(GraphError::Empty));
        assert!(g.has_edge(2, 0));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn parse_accepts_comments_and_blank_lines() {
        let text = "# a triangle\n3\n\n0 1 # first\n0 2\n1 2\n";
        let g = Graph::parse(text).unwrap();
        assert_eq!(g, complete(3));
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        let dup = Graph::parse("3\n0 1\n0 1\n").unwrap_err();
        assert_eq!(dup.line, 3);
        assert!(matches!(dup.kind, ParseErrorKind::Graph(GraphError::DuplicateEdge(0, 1))));

        let range = Graph::parse("3\n0 3\n").unwrap_err();
        assert!(matches!(
            range.kind,
            ParseErrorKind::Graph(GraphError::NodeOutOfRange { node: 3, .. })
        ));

        let order = Graph::parse("3\n2 1\n").unwrap_err();
        assert_eq!(order.kind, ParseErrorKind::Unordered(2, 1));

        let empty = Graph::parse("# nothing\n").unwrap_err();
        assert_eq!(empty.kind, ParseErrorKind::MissingNodeCount);

        assert!(matches!(
            Graph::parse("x\n").unwrap_err().kind,
            ParseErrorKind::BadNodeCount(_)
        ));
        assert!(matches!(
            Graph::parse("3\n0 1 2\n").unwrap_err().kind,
            ParseErrorKind::BadEdgeLine(_)
        ));
    }
}
