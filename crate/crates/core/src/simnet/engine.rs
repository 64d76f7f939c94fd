use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::adversary::{build_strategy, Emission, Strategy, View};
use super::scenario::{Scenario, ScenarioError};
use super::verify::{verify_outcome, Violation};
use crate::conditions::sufficient_connectivity;
use crate::graph::{vertex_connectivity, NodeId, NodeSet};
use crate::protocol::{Bit, Broadcast, Message, NodeState, NodeType, PathTable, ProtocolError, Round};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid scenario")]
    Scenario(#[from] ScenarioError),
    #[error("node {node} sent different content to different neighbours at step {step}")]
    Equivocation { node: NodeId, step: usize },
}

/// Everything broadcast during a run plus the final state of every non-faulty node.
#[derive(Debug, Clone)]
pub struct Transcript {
    n: usize,
    steps: Vec<Vec<Arc<Broadcast>>>,
    final_states: BTreeMap<NodeId, NodeState>,
}

impl Transcript {
    pub fn from_parts(n: usize, steps: Vec<Vec<Arc<Broadcast>>>, final_states: BTreeMap<NodeId, NodeState>) -> Self {
        Self { n, steps, final_states }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Broadcasts of every node at a global step.
    pub fn step(&self, step: usize) -> &[Arc<Broadcast>] {
        &self.steps[step]
    }

    pub fn broadcast(&self, step: usize, node: NodeId) -> &Broadcast {
        &self.steps[step][node]
    }

    pub fn final_states(&self) -> &BTreeMap<NodeId, NodeState> {
        &self.final_states
    }

    /// Window and in-window step of a global step.
    pub fn locate(&self, step: usize) -> (Round, usize) {
        (Round::ALL[step / self.n], step % self.n)
    }

    /// One line per (step, node, message), in that order.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (step, row) in self.steps.iter().enumerate() {
            let (round, local) = self.locate(step);
            for (node, b) in row.iter().enumerate() {
                for m in b.messages() {
                    out.push_str(&format!("{step} {round}:{local} node={node} {m}\n"));
                }
            }
        }
        out
    }
}

/// Per-node results of a run and the properties it violated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub decisions: BTreeMap<NodeId, Option<Bit>>,
    pub node_types: BTreeMap<NodeId, NodeType>,
    pub fault_sets: BTreeMap<NodeId, NodeSet>,
    pub errors: BTreeMap<NodeId, ProtocolError>,
    /// The graph is below the connectivity the guarantees need.
    pub advisory: bool,
    pub violations: Vec<Violation>,
}

impl Outcome {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run_scenario(s: &Scenario) -> Result<(Transcript, Outcome), SimError> {
    s.validate()?;
    let mut strategy = build_strategy(&s.adversary, s);
    run_with_strategy(s, strategy.as_mut())
}

/// Runs all four windows of `n` steps with a caller-supplied strategy.
pub fn run_with_strategy(s: &Scenario, strategy: &mut dyn Strategy) -> Result<(Transcript, Outcome), SimError> {
    s.validate()?;
    let n = s.graph.node_count();
    let graph = Arc::new(s.graph.clone());
    let table = Arc::new(PathTable::build(&graph, s.f));
    let make = |u: NodeId| NodeState::new(u, s.inputs[u], s.f, Arc::clone(&graph), Arc::clone(&table));
    let mut honest: BTreeMap<NodeId, NodeState> = s.honest_nodes().map(|u| (u, make(u))).collect();
    let mut shadows: BTreeMap<NodeId, NodeState> = s.faulty.iter().map(|&u| (u, make(u))).collect();
    let mut steps: Vec<Vec<Arc<Broadcast>>> = Vec::with_capacity(4 * n);
    let mut errors = BTreeMap::new();

    for round in Round::ALL {
        for step in 0..n {
            let global = steps.len();
            let mut row: Vec<Arc<Broadcast>> = vec![Arc::new(Broadcast::empty()); n];
            for (&u, state) in honest.iter_mut() {
                row[u] = state.emit(round, step);
            }
            let wanted: BTreeMap<NodeId, Arc<Broadcast>> =
                shadows.iter_mut().map(|(&u, st)| (u, st.emit(round, step))).collect();
            for (&u, wanted) in &wanted {
                let view = View {
                    scenario: s,
                    table: &table,
                    honest: &honest,
                    shadows: &shadows,
                    history: &steps,
                    round,
                    step,
                };
                row[u] = Arc::new(deliverable(strategy.act(&view, u, wanted), u, global, &graph)?);
            }
            for (&v, state) in honest.iter_mut().chain(shadows.iter_mut()) {
                for &u in graph.neighbors(v) {
                    state.receive(round, step, u, &row[u]);
                }
            }
            steps.push(row);
        }
        for (&u, state) in honest.iter_mut() {
            if let Err(e) = state.finish_round(round) {
                errors.entry(u).or_insert(e);
            }
        }
        for state in shadows.values_mut() {
            let _ = state.finish_round(round);
        }
    }

    let outcome = Outcome {
        decisions: honest.iter().map(|(&u, st)| (u, st.decision())).collect(),
        node_types: honest.iter().map(|(&u, st)| (u, st.node_type())).collect(),
        fault_sets: honest.iter().map(|(&u, st)| (u, st.fault_set().clone())).collect(),
        errors,
        advisory: n > 1 && vertex_connectivity(&graph).map_or(true, |k| k < sufficient_connectivity(s.f)),
        violations: Vec::new(),
    };
    let transcript = Transcript::from_parts(n, steps, honest);
    let violations = verify_outcome(s, &transcript, &outcome);
    Ok((transcript, Outcome { violations, ..outcome }))
}

/// The single broadcast a faulty node delivers, or an equivocation error.
fn deliverable(emission: Emission, node: NodeId, step: usize, graph: &crate::graph::Graph) -> Result<Broadcast, SimError> {
    match emission {
        Emission::Uniform(b) => Ok(b),
        Emission::PerNeighbor(mut per) => {
            let mut contents = graph.neighbors(node).iter().map(|v| per.remove(v).unwrap_or_default());
            let first = contents.next().unwrap_or_default();
            if contents.all(|b| b == first) && per.is_empty() {
                Ok(first)
            } else {
                Err(SimError::Equivocation { node, step })
            }
        }
    }
}

/// Number of messages of each kind in a transcript, keyed by `announce` / `relay`.
pub fn message_counts(t: &Transcript) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    for step in 0..t.step_count() {
        for b in t.step(step) {
            for m in b.messages() {
                let key = match m {
                    Message::Announce { .. } => "announce",
                    Message::Relay(_) => "relay",
                };
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }
    counts
}
