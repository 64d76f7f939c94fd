use std::fmt;

use thiserror::Error;

use super::flow::SplitNetwork;
use super::{Graph, GraphError, NodeId};

/// One of the fixed node-disjoint routes between an ordered pair of nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub origin: NodeId,
    pub destination: NodeId,
    pub index: usize,
    /// Node sequence from `origin` to `destination`, both included.
    pub hops: Vec<NodeId>,
}

impl Path {
    /// Nodes strictly between the endpoints.
    pub fn interior(&self) -> &[NodeId] {
        &self.hops[1..self.hops.len() - 1]
    }

    pub fn position_of(&self, node: NodeId) -> Option<usize> {
        self.hops.iter().position(|&h| h == node)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hops: Vec<String> = self.hops.iter().map(ToString::to_string).collect();
        write!(f, "{}", hops.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("paths need distinct endpoints, got {0} twice")]
    SameEndpoints(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("only {available} disjoint paths exist, {requested} requested")]
    Insufficient {
        requested: usize,
        available: usize,
        paths: Vec<Path>,
    },
}

/// Up to `k` internally node-disjoint `u`-`v` paths, fewer when the graph
/// does not contain `k`. Output is a pure function of `(g, u, v, k)`: the direct
/// edge (if any) comes first, the rest are ordered by length then node ids.
pub fn disjoint_paths_up_to(
    g: &Graph,
    u: NodeId,
    v: NodeId,
    k: usize,
) -> Result<Vec<Path>, PathError> {
    g.check_node(u)?;
    g.check_node(v)?;
    if u == v {
        return Err(PathError::SameEndpoints(u));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let direct = g.has_edge(u, v);
    let mut routes = Vec::with_capacity(k);
    if direct {
        routes.push(vec![u, v]);
    }
    let wanted = k - routes.len();
    if wanted > 0 {
        let mut net = SplitNetwork::new(g, u, v, direct);
        net.max_flow(wanted);
        let mut found = net.decompose(u, v);
        found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        routes.extend(found);
    }
    Ok(routes
        .into_iter()
        .enumerate()
        .map(|(index, hops)| Path {
            origin: u,
            destination: v,
            index,
            hops,
        })
        .collect())
}

/// Exactly `k` disjoint `u`-`v` paths, or [`PathError::Insufficient`] carrying
/// the achievable maximum.
pub fn canonical_disjoint_paths(
    g: &Graph,
    u: NodeId,
    v: NodeId,
    k: usize,
) -> Result<Vec<Path>, PathError> {
    let paths = disjoint_paths_up_to(g, u, v, k)?;
    if paths.len() < k {
        return Err(PathError::Insufficient {
            requested: k,
            available: paths.len(),
            paths,
        });
    }
    Ok(paths)
}
