use std::collections::BTreeMap;
use std::ops::Range;

use super::PathId;
use crate::graph::{disjoint_paths_up_to, Graph, NodeId, Path};

/// The fixed `2f` disjoint paths for every ordered pair of non-adjacent nodes.
/// Adjacent pairs talk directly and have no entry. Every node derives the same
/// table from the shared graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTable {
    width: usize,
    paths: Vec<Path>,
    by_pair: BTreeMap<(NodeId, NodeId), Range<usize>>,
    from: Vec<Vec<usize>>,
    through: Vec<Vec<(usize, usize)>>,
    short_pairs: Vec<(NodeId, NodeId)>,
}

impl PathTable {
    pub fn build(g: &Graph, f: usize) -> Self {
        let width = 2 * f;
        let n = g.node_count();
        let mut table = Self {
            width,
            paths: Vec::new(),
            by_pair: BTreeMap::new(),
            from: vec![Vec::new(); n],
            through: vec![Vec::new(); n],
            short_pairs: Vec::new(),
        };
        for u in g.nodes() {
            for v in g.nodes() {
                if u == v || g.has_edge(u, v) {
                    continue;
                }
                let found = disjoint_paths_up_to(g, u, v, width).expect("valid endpoints");
                if found.len() < width {
                    table.short_pairs.push((u, v));
                }
                let start = table.paths.len();
                for p in found {
                    let idx = table.paths.len();
                    table.from[u].push(idx);
                    for (pos, &hop) in p.hops.iter().enumerate().take(p.hops.len() - 1).skip(1) {
                        table.through[hop].push((idx, pos));
                    }
                    table.paths.push(p);
                }
                table.by_pair.insert((u, v), start..table.paths.len());
            }
        }
        table
    }

    /// Paths per pair the table aims for (`2f`).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Pairs that got fewer than `2f` paths (the graph is not `2f`-connected).
    pub fn short_pairs(&self) -> &[(NodeId, NodeId)] {
        &self.short_pairs
    }

    pub fn all(&self) -> &[Path] {
        &self.paths
    }

    pub fn get(&self, id: PathId) -> Option<&Path> {
        let range = self.by_pair.get(&(id.origin, id.destination))?;
        self.paths[range.clone()].get(id.index)
    }

    pub fn between(&self, origin: NodeId, destination: NodeId) -> &[Path] {
        match self.by_pair.get(&(origin, destination)) {
            Some(range) => &self.paths[range.clone()],
            None => &[],
        }
    }

    /// Every path that starts at `origin`.
    pub fn from(&self, origin: NodeId) -> impl Iterator<Item = &Path> {
        self.from
            .get(origin)
            .into_iter()
            .flatten()
            .map(move |&i| &self.paths[i])
    }

    /// `(path, position)` for every path where `node` is an interior hop.
    pub fn through(&self, node: NodeId) -> impl Iterator<Item = (&Path, usize)> {
        self.through
            .get(node)
            .into_iter()
            .flatten()
            .map(move |&(i, pos)| (&self.paths[i], pos))
    }
}
