use std::collections::BTreeMap;
use std::fmt;

use super::engine::{Outcome, Transcript};
use super::scenario::Scenario;
use crate::graph::NodeId;
use crate::protocol::{Bit, NodeType, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Agreement,
    Validity,
    Termination,
    /// Every faulty node's round-1 value reaches every non-faulty node.
    Lemma1,
    /// A node that got a value some other node missed knows all `f` faults.
    Lemma2,
    /// Type-B nodes hold identical reliable inputs.
    Lemma3,
    /// Every non-faulty node holds at least `2f` other inputs.
    Lemma4,
    Soundness,
    QuorumUniqueness,
    TypeACoherence,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::Agreement,
        Property::Validity,
        Property::Termination,
        Property::Lemma1,
        Property::Lemma2,
        Property::Lemma3,
        Property::Lemma4,
        Property::Soundness,
        Property::QuorumUniqueness,
        Property::TypeACoherence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Agreement => "agreement",
            Property::Validity => "validity",
            Property::Termination => "termination",
            Property::Lemma1 => "lemma1",
            Property::Lemma2 => "lemma2",
            Property::Lemma3 => "lemma3",
            Property::Lemma4 => "lemma4",
            Property::Soundness => "soundness",
            Property::QuorumUniqueness => "quorum-uniqueness",
            Property::TypeACoherence => "type-a-coherence",
        }
    }

    /// The three consensus conditions, as opposed to the intermediate lemmas.
    pub fn is_consensus(self) -> bool {
        matches!(self, Property::Agreement | Property::Validity | Property::Termination)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub evidence: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.property, self.evidence)
    }
}

fn fmt_opt(b: Option<Bit>) -> String {
    b.map_or_else(|| "-".to_string(), |b| b.to_string())
}

/// Checks a finished run against the ground truth in `s`. Decisions, types and
/// fault sets are read from `o`; reliable inputs from the final states in `t`.
pub fn verify_outcome(s: &Scenario, t: &Transcript, o: &Outcome) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |property, evidence: String| out.push(Violation { property, evidence });
    let n = s.graph.node_count();
    let states = t.final_states();

    let decided: Vec<(NodeId, Bit)> = o.decisions.iter().filter_map(|(&u, d)| d.map(|d| (u, d))).collect();
    if let Some(&(u, d)) = decided.first() {
        if let Some(&(v, e)) = decided.iter().find(|&&(_, e)| e != d) {
            flag(Property::Agreement, format!("node {u} decided {d}, node {v} decided {e}"));
        }
    }

    for b in [Bit::Zero, Bit::One] {
        if s.honest_inputs_all(b) {
            if let Some((u, d)) = o.decisions.iter().find(|(_, d)| **d != Some(b)) {
                flag(
                    Property::Validity,
                    format!("all non-faulty inputs are {b} but node {u} decided {}", fmt_opt(*d)),
                );
            }
        }
    }

    if t.step_count() != 4 * n {
        flag(Property::Termination, format!("run took {} steps, expected {}", t.step_count(), 4 * n));
    }
    for u in s.honest_nodes() {
        if o.decisions.get(&u).copied().flatten().is_none() {
            let why = o.errors.get(&u).map_or_else(String::new, |e| format!(" ({e})"));
            flag(Property::Termination, format!("node {u} did not decide{why}"));
        }
    }

    for &z in &s.faulty {
        let flooded = t.broadcast(0, z).announced(Phase::Input).unwrap_or(Bit::Zero);
        for (&v, st) in states {
            let got = st.reliable_inputs().get(&z).map(|rv| rv.value);
            if got != Some(flooded) {
                flag(
                    Property::Lemma1,
                    format!("faulty node {z} flooded {flooded}, node {v} holds {}", fmt_opt(got)),
                );
            }
        }
    }

    for u in s.graph.nodes() {
        let missing: Vec<NodeId> = states
            .iter()
            .filter(|(_, st)| !st.reliable_inputs().contains_key(&u))
            .map(|(&w, _)| w)
            .collect();
        let Some(&w) = missing.first() else { continue };
        for (&v, st) in states {
            if st.reliable_inputs().contains_key(&u) && o.fault_sets.get(&v).map_or(0, |fs| fs.len()) != s.f {
                flag(
                    Property::Lemma2,
                    format!("node {v} holds the input of {u}, node {w} does not, yet node {v} knows fewer than {} faults", s.f),
                );
            }
        }
    }

    let type_b: Vec<NodeId> = o
        .node_types
        .iter()
        .filter(|(_, &ty)| ty == NodeType::B)
        .map(|(&u, _)| u)
        .collect();
    let inputs_of = |u: NodeId| -> BTreeMap<NodeId, Bit> {
        states
            .get(&u)
            .map(|st| st.reliable_inputs().iter().map(|(&o, rv)| (o, rv.value)).collect())
            .unwrap_or_default()
    };
    if let Some(&first) = type_b.first() {
        let reference = inputs_of(first);
        for &v in &type_b[1..] {
            if inputs_of(v) != reference {
                flag(Property::Lemma3, format!("type-B nodes {first} and {v} hold different reliable inputs"));
            }
        }
    }

    for (&v, st) in states {
        let others = st.reliable_inputs().keys().filter(|&&u| u != v).count();
        if others < 2 * s.f {
            flag(Property::Lemma4, format!("node {v} holds only {others} other inputs"));
        }
        if !st.quorum_conflicts().is_empty() {
            flag(
                Property::QuorumUniqueness,
                format!("node {v} saw two quorums for {:?}", st.quorum_conflicts()),
            );
        }
    }

    for (&v, fs) in &o.fault_sets {
        if let Some(x) = fs.iter().find(|x| !s.faulty.contains(x)) {
            flag(Property::Soundness, format!("node {v} accused non-faulty node {x}"));
        }
    }

    let type_a: Vec<NodeId> = o
        .node_types
        .iter()
        .filter(|(_, &ty)| ty == NodeType::A)
        .map(|(&u, _)| u)
        .collect();
    if s.faulty.len() < s.f {
        if let Some(&u) = type_a.first() {
            flag(Property::TypeACoherence, format!("node {u} is type A with fewer than f faulty nodes"));
        }
    } else if let Some(&first) = type_a.first() {
        for &v in &type_a[1..] {
            if o.fault_sets.get(&v) != o.fault_sets.get(&first) {
                flag(Property::TypeACoherence, format!("type-A nodes {first} and {v} hold different fault sets"));
            }
        }
    }

    out
}
