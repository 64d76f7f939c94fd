//! Graph conditions for Byzantine consensus under local broadcast.
//!
//! * necessary: minimum degree at least `2f` and connectivity at least
//!   `floor(3f/2) + 1`;
//! * sufficient: connectivity at least `2f`;
//! * f-good: the F-partition property, checked exhaustively and through its
//!   closed form (which coincides with the necessary condition).

use std::fmt;

use thiserror::Error;

use crate::graph::{gamma, min_degree, minimum_vertex_cut, vertex_connectivity, Graph, NodeId, NodeSet};

/// Largest graph accepted by [`is_f_good_bruteforce`].
pub const F_GOOD_MAX_NODES: usize = 10;
/// Largest fault budget accepted by [`is_f_good_bruteforce`].
pub const F_GOOD_MAX_F: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("sets overlap on node {0}")]
    Overlap(NodeId),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("exhaustive f-good check is capped at n <= {F_GOOD_MAX_NODES}, f <= {F_GOOD_MAX_F} (got n = {n}, f = {f})")]
    TooLarge { n: usize, f: usize },
}

/// Connectivity a graph must exceed for consensus to be possible: `floor(3f/2)`.
pub fn necessary_connectivity_bound(f: usize) -> usize {
    3 * f / 2
}

/// `floor(3f/2) + 1`.
pub fn necessary_connectivity(f: usize) -> usize {
    necessary_connectivity_bound(f) + 1
}

/// `2f`, both the degree floor and the sufficient connectivity.
pub fn sufficient_connectivity(f: usize) -> usize {
    2 * f
}

/// `T ->k S`: at least `k` nodes of `t` are adjacent to `s`.
pub fn connects_k(g: &Graph, t: &NodeSet, s: &NodeSet, k: usize) -> Result<bool, ConditionError> {
    for &u in t.iter().chain(s) {
        if u >= g.node_count() {
            return Err(ConditionError::NodeOutOfRange {
                node: u,
                n: g.node_count(),
            });
        }
    }
    if let Some(&shared) = t.intersection(s).next() {
        return Err(ConditionError::Overlap(shared));
    }
    let boundary = gamma(g, s).expect("nodes checked above");
    Ok(boundary.intersection(t).count() >= k)
}

/// `(F, L, C, R)` with `(L, C, R)` a partition of the node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FPartition {
    pub faulty: NodeSet,
    pub left: NodeSet,
    pub center: NodeSet,
    pub right: NodeSet,
}

impl FPartition {
    /// Partition of `V`, `|F| <= f`, and both `L - F` and `R - F` nonempty.
    pub fn is_valid(&self, g: &Graph, f: usize) -> bool {
        let n = g.node_count();
        let total = self.left.len() + self.center.len() + self.right.len();
        let union: NodeSet = self
            .left
            .iter()
            .chain(&self.center)
            .chain(&self.right)
            .copied()
            .collect();
        total == n
            && union.len() == n
            && union.iter().all(|&u| u < n)
            && self.faulty.iter().all(|&u| u < n)
            && self.faulty.len() <= f
            && !self.left_honest().is_empty()
            && !self.right_honest().is_empty()
    }

    pub fn left_honest(&self) -> NodeSet {
        self.left.difference(&self.faulty).copied().collect()
    }

    pub fn right_honest(&self) -> NodeSet {
        self.right.difference(&self.faulty).copied().collect()
    }

    /// Whether this partition breaks f-goodness: valid, and neither
    /// `R ∪ C ->(f+1) L - F` nor `L ∪ C ->(f+1) R - F` holds.
    pub fn violates(&self, g: &Graph, f: usize) -> bool {
        if !self.is_valid(g, f) {
            return false;
        }
        let right_side: NodeSet = self.right.union(&self.center).copied().collect();
        let left_side: NodeSet = self.left.union(&self.center).copied().collect();
        let into_left = connects_k(g, &right_side, &self.left_honest(), f + 1).expect("disjoint");
        let into_right = connects_k(g, &left_side, &self.right_honest(), f + 1).expect("disjoint");
        !into_left && !into_right
    }
}

impl fmt::Display for FPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F={} L={} C={} R={}",
            fmt_set(&self.faulty),
            fmt_set(&self.left),
            fmt_set(&self.center),
            fmt_set(&self.right)
        )
    }
}

pub fn fmt_set(s: &NodeSet) -> String {
    let items: Vec<String> = s.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FGoodVerdict {
    pub good: bool,
    pub witness: Option<FPartition>,
}

/// Exhaustive f-good check. Enumerates every `F` with `|F| <= f` (by size, then
/// lexicographically) and every assignment of nodes to `(L, C, R)`; the first
/// violating F-partition is returned as the witness.
pub fn is_f_good_bruteforce(g: &Graph, f: usize) -> Result<FGoodVerdict, ConditionError> {
    let n = g.node_count();
    if n > F_GOOD_MAX_NODES || f > F_GOOD_MAX_F {
        return Err(ConditionError::TooLarge { n, f });
    }
    let adjacency: Vec<u32> = g
        .nodes()
        .map(|u| g.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v)))
        .collect();
    let boundary = |s: u32| -> u32 {
        let mut acc = 0u32;
        let mut rest = s;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            acc |= adjacency[u];
        }
        acc & !s
    };
    let full: u32 = (1u32 << n) - 1;
    let assignments = 3usize.pow(n as u32);
    let threshold = (f + 1) as u32;

    let mut fault_sets: Vec<u32> = (0..=full).filter(|m| m.count_ones() as usize <= f).collect();
    fault_sets.sort_by_key(|m| (m.count_ones(), subset_key(*m)));

    for &faulty in &fault_sets {
        for code in 0..assignments {
            let (mut left, mut center, mut right) = (0u32, 0u32, 0u32);
            let mut c = code;
            for u in 0..n {
                match c % 3 {
                    0 => left |= 1 << u,
                    1 => center |= 1 << u,
                    _ => right |= 1 << u,
                }
                c /= 3;
            }
            let left_honest = left & !faulty;
            let right_honest = right & !faulty;
            if left_honest == 0 || right_honest == 0 {
                continue;
            }
            let into_left = (boundary(left_honest) & (right | center)).count_ones() >= threshold;
            if into_left {
                continue;
            }
            let into_right = (boundary(right_honest) & (left | center)).count_ones() >= threshold;
            if !into_right {
                return Ok(FGoodVerdict {
                    good: false,
                    witness: Some(FPartition {
                        faulty: mask_to_set(faulty),
                        left: mask_to_set(left),
                        center: mask_to_set(center),
                        right: mask_to_set(right),
                    }),
                });
            }
        }
    }
    Ok(FGoodVerdict {
        good: true,
        witness: None,
    })
}

/// Lexicographic order on the sorted member list.
fn subset_key(mask: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut rest = mask;
    while rest != 0 {
        out.push(rest.trailing_zeros());
        rest &= rest - 1;
    }
    out
}

fn mask_to_set(mask: u32) -> NodeSet {
    subset_key(mask).into_iter().map(|u| u as NodeId).collect()
}

fn connectivity_or_zero(g: &Graph) -> usize {
    // single-node graphs have no pair to separate
    vertex_connectivity(g).unwrap_or(0)
}

/// Closed form: connectivity at least `floor(3f/2) + 1` and every degree at least `2f`.
pub fn is_f_good_characterized(g: &Graph, f: usize) -> bool {
    min_degree(g) >= sufficient_connectivity(f) && connectivity_or_zero(g) >= necessary_connectivity(f)
}

/// False when consensus is ruled out: a degree below `2f` or connectivity at
/// most `floor(3f/2)`.
pub fn check_necessary(g: &Graph, f: usize) -> bool {
    is_f_good_characterized(g, f)
}

/// Connectivity at least `2f`.
pub fn check_sufficient(g: &Graph, f: usize) -> bool {
    connectivity_or_zero(g) >= sufficient_connectivity(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    Impossible,
    Achievable,
    OpenGap,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Impossible => "impossible",
            Classification::Achievable => "achievable",
            Classification::OpenGap => "open-gap",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evidence attached to a report that is not `achievable`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A node whose degree is below `2f`.
    LowDegree { node: NodeId, degree: usize },
    /// A minimum vertex cut (smaller than the threshold that failed).
    Cut(NodeSet),
    /// A violating F-partition.
    Partition(FPartition),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::LowDegree { node, degree } => write!(f, "node {node} has degree {degree}"),
            Witness::Cut(cut) => write!(f, "vertex cut {}", fmt_set(cut)),
            Witness::Partition(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub f: usize,
    pub min_degree: usize,
    pub connectivity: usize,
    pub necessary_holds: bool,
    pub sufficient_holds: bool,
    pub classification: Classification,
    pub witness: Option<Witness>,
}

pub fn classify(g: &Graph, f: usize) -> ConditionReport {
    let degree = min_degree(g);
    let connectivity = connectivity_or_zero(g);
    let necessary_holds = check_necessary(g, f);
    let sufficient_holds = check_sufficient(g, f);
    let classification = if !necessary_holds {
        Classification::Impossible
    } else if sufficient_holds {
        Classification::Achievable
    } else {
        Classification::OpenGap
    };
    let witness = match classification {
        Classification::Achievable => None,
        Classification::Impossible if degree < sufficient_connectivity(f) => {
            let node = g.nodes().find(|&u| g.degree(u) == degree).expect("nonempty graph");
            Some(Witness::LowDegree { node, degree })
        }
        _ => minimum_vertex_cut(g).ok().flatten().map(Witness::Cut),
    };
    ConditionReport {
        f,
        min_degree: degree,
        connectivity,
        necessary_holds,
        sufficient_holds,
        classification,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;

    fn set(items: &[NodeId]) -> NodeSet {
        items.iter().copied().collect()
    }

    #[test]
    fn connects_k_examples() {
        let k4 = complete(4);
        assert!(connects_k(&k4, &set(&[1, 2, 3]), &set(&[0]), 3).unwrap());
        assert!(!connects_k(&k4, &NodeSet::new(), &set(&[0]), 1).unwrap());
        assert!(!connects_k(&cycle(4), &set(&[2]), &set(&[0]), 1).unwrap());
        assert_eq!(
            connects_k(&k4, &set(&[0, 1]), &set(&[1]), 1),
            Err(ConditionError::Overlap(1))
        );
    }

    #[test]
    fn f_good_bruteforce_examples() {
        let k3 = is_f_good_bruteforce(&complete(3), 1).unwrap();
        assert!(k3.good);
        assert!(k3.witness.is_none());

        let p3 = path(3);
        let verdict = is_f_good_bruteforce(&p3, 1).unwrap();
        assert!(!verdict.good);
        assert!(verdict.witness.unwrap().violates(&p3, 1));
        let stated = FPartition {
            faulty: set(&[1]),
            left: set(&[0, 1]),
            center: NodeSet::new(),
            right: set(&[2]),
        };
        assert!(stated.violates(&p3, 1));
    }

    #[test]
    fn small_graphs_are_never_f_good() {
        for f in 1..=3 {
            for n in 2..=2 * f {
                assert!(!is_f_good_bruteforce(&complete(n), f).unwrap().good, "K{n} f={f}");
            }
        }
    }

    #[test]
    fn f_good_bruteforce_rejects_oversize() {
        assert_eq!(
            is_f_good_bruteforce(&complete(11), 1),
            Err(ConditionError::TooLarge { n: 11, f: 1 })
        );
        assert_eq!(
            is_f_good_bruteforce(&complete(5), 4),
            Err(ConditionError::TooLarge { n: 5, f: 4 })
        );
    }

    #[test]
    fn characterized_examples() {
        assert!(is_f_good_characterized(&complete(3), 1));
        assert!(!is_f_good_characterized(&cycle(5), 2));
        assert!(!is_f_good_characterized(&petersen(), 2));
        assert!(!is_f_good_characterized(&complete(1), 1));
    }

    #[test]
    fn necessary_and_sufficient_examples() {
        assert!(!check_necessary(&cycle(5), 2));
        assert!(check_necessary(&complete(5), 2));
        assert!(check_necessary(&complete(3), 1));
        assert!(check_sufficient(&complete(5), 2));
        assert!(check_sufficient(&cycle(4), 1));
        assert!(!check_sufficient(&path(3), 1));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&complete(5), 2).classification, Classification::Achievable);
        let c5 = classify(&cycle(5), 2);
        assert_eq!(c5.classification, Classification::Impossible);
        assert_eq!(c5.witness, Some(Witness::LowDegree { node: 0, degree: 2 }));

        let g = gap_graph();
        assert_eq!(min_degree(&g), 6);
        assert_eq!(vertex_connectivity(&g).unwrap(), 5);
        let report = classify(&g, 3);
        assert_eq!(report.classification, Classification::OpenGap);
        match report.witness {
            Some(Witness::Cut(cut)) => {
                assert_eq!(cut.len(), 5);
                assert!(!g.is_connected_without(&cut));
            }
            other => panic!("expected a cut witness, got {other:?}"),
        }
    }

    /// Two copies of K7 glued along a shared K5: min degree 6, connectivity 5.
    pub(crate) fn gap_graph() -> Graph {
        // shared core 0..5, private nodes 5,6 on one side and 7,8 on the other
        let side_a = [0, 1, 2, 3, 4, 5, 6];
        let side_b = [0, 1, 2, 3, 4, 7, 8];
        let mut g = Graph::new(9).unwrap();
        for side in [side_a, side_b] {
            for (i, &u) in side.iter().enumerate() {
                for &v in &side[i + 1..] {
                    if !g.has_edge(u, v) {
                        g.add_edge(u, v).unwrap();
                    }
                }
            }
        }
        g
    }

    #[test]
    fn threshold_arithmetic() {
        for f in 1..=64 {
            assert!(sufficient_connectivity(f) >= necessary_connectivity(f), "f={f}");
        }
        assert_eq!(necessary_connectivity(3), 5);
        assert_eq!(necessary_connectivity(2), 4);
    }
}
