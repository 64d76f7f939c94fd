//! Byzantine strategies.
//!
//! Every faulty node runs a shadow honest [`NodeState`] fed with the real
//! traffic. A strategy sees the whole run so far plus the broadcast the shadow
//! would send, and returns what the node actually sends.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{AdversarySpec, Move, Scenario, SCRIPT_WINDOWS};
use crate::graph::{NodeId, NodeSet};
use crate::protocol::{
    Bit, Broadcast, Message, NodeState, Observed, PathId, PathTable, Payload, Phase, ReportPayload, Round,
    RoutedMessage,
};

/// Full-knowledge view handed to a strategy at one step.
pub struct View<'a> {
    pub scenario: &'a Scenario,
    pub table: &'a PathTable,
    /// States of the non-faulty nodes.
    pub honest: &'a BTreeMap<NodeId, NodeState>,
    /// Shadow states of the faulty nodes.
    pub shadows: &'a BTreeMap<NodeId, NodeState>,
    /// Broadcasts of all earlier steps, indexed by step then node.
    pub history: &'a [Vec<Arc<Broadcast>>],
    pub round: Round,
    pub step: usize,
}

/// What a strategy asks the engine to deliver for one faulty node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emission {
    Uniform(Broadcast),
    /// Per-recipient content. The engine accepts it only if every neighbour
    /// would receive the same broadcast.
    PerNeighbor(BTreeMap<NodeId, Broadcast>),
}

pub trait Strategy {
    /// Called once per step for every faulty node, in ascending node order.
    fn act(&mut self, view: &View<'_>, node: NodeId, honest: &Broadcast) -> Emission;
}

pub fn build_strategy(spec: &AdversarySpec, scenario: &Scenario) -> Box<dyn Strategy> {
    match spec {
        AdversarySpec::Honest => Box::new(HonestStrategy),
        AdversarySpec::Silent => Box::new(SilentStrategy),
        AdversarySpec::Tamper { paths } => Box::new(TamperStrategy {
            paths: paths.as_ref().map(|p| p.iter().copied().collect()),
        }),
        AdversarySpec::Frame { targets } => Box::new(FrameStrategy {
            targets: match targets {
                Some(t) => t.iter().copied().collect(),
                None => scenario.honest_nodes().collect(),
            },
        }),
        AdversarySpec::Random => Box::new(RandomStrategy::new(scenario)),
        AdversarySpec::WorstCase { script } => Box::new(ScriptedStrategy::new(scenario, script)),
    }
}

pub struct HonestStrategy;

impl Strategy for HonestStrategy {
    fn act(&mut self, _: &View<'_>, _: NodeId, honest: &Broadcast) -> Emission {
        Emission::Uniform(honest.clone())
    }
}

pub struct SilentStrategy;

impl Strategy for SilentStrategy {
    fn act(&mut self, _: &View<'_>, _: NodeId, _: &Broadcast) -> Emission {
        Emission::Uniform(Broadcast::empty())
    }
}

fn flip_payload(payload: &Payload) -> Payload {
    match payload {
        Payload::Value(b) => Payload::Value(b.flip()),
        Payload::Report(rep) => Payload::Report(forge_report(rep)),
    }
}

/// Every value in a broadcast flipped, reports included.
fn flip_all(b: &Broadcast) -> Broadcast {
    Broadcast::new(b.messages().iter().map(flip_message).collect())
}

fn flip_message(m: &Message) -> Message {
    match m {
        Message::Announce { phase, value } => Message::Announce {
            phase: *phase,
            value: value.flip(),
        },
        Message::Relay(r) => Message::Relay(RoutedMessage {
            payload: flip_payload(&r.payload),
            ..r.clone()
        }),
    }
}

/// The report with the subject's transcript rewritten to show every value flipped.
fn forge_report(rep: &ReportPayload) -> ReportPayload {
    ReportPayload {
        observed: Arc::new(Observed {
            steps: rep.observed.steps.iter().map(|b| Arc::new(flip_all(b))).collect(),
        }),
        ..rep.clone()
    }
}

pub struct TamperStrategy {
    paths: Option<BTreeSet<PathId>>,
}

impl Strategy for TamperStrategy {
    fn act(&mut self, _: &View<'_>, _: NodeId, honest: &Broadcast) -> Emission {
        let messages = honest
            .messages()
            .iter()
            .map(|m| match m {
                Message::Relay(r)
                    if r.phase != Phase::Report && self.paths.as_ref().map_or(true, |p| p.contains(&r.path)) =>
                {
                    flip_message(m)
                }
                _ => m.clone(),
            })
            .collect();
        Emission::Uniform(Broadcast::new(messages))
    }
}

pub struct FrameStrategy {
    targets: NodeSet,
}

impl Strategy for FrameStrategy {
    fn act(&mut self, _: &View<'_>, _: NodeId, honest: &Broadcast) -> Emission {
        let messages = honest
            .messages()
            .iter()
            .map(|m| match m {
                Message::Relay(RoutedMessage {
                    payload: Payload::Report(rep),
                    ..
                }) if self.targets.contains(&rep.subject) => flip_message(m),
                _ => m.clone(),
            })
            .collect();
        Emission::Uniform(Broadcast::new(messages))
    }
}

/// Seeded arbitrary behaviour: each step is honest, silent, or a mutation that
/// drops, flips and injects well-formed messages.
pub struct RandomStrategy {
    rngs: BTreeMap<NodeId, ChaCha8Rng>,
}

impl RandomStrategy {
    pub fn new(scenario: &Scenario) -> Self {
        let rngs = scenario
            .faulty
            .iter()
            .map(|&x| {
                let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
                rng.set_stream(x as u64);
                (x, rng)
            })
            .collect();
        Self { rngs }
    }
}

impl Strategy for RandomStrategy {
    fn act(&mut self, view: &View<'_>, node: NodeId, honest: &Broadcast) -> Emission {
        let rng = self.rngs.get_mut(&node).expect("faulty node has a stream");
        match rng.gen_range(0..10) {
            0..=2 => return Emission::Uniform(honest.clone()),
            3..=4 => return Emission::Uniform(Broadcast::empty()),
            _ => {}
        }
        let mut messages = Vec::new();
        for m in honest.messages() {
            if rng.gen_bool(0.2) {
                continue;
            }
            messages.push(if rng.gen_bool(0.3) { flip_message(m) } else { m.clone() });
        }
        if let Some(phase) = view.round.phase() {
            if view.step == 0 && phase != Phase::Report && rng.gen_bool(0.3) {
                messages.push(Message::Announce {
                    phase,
                    value: Bit::from(rng.gen_bool(0.5)),
                });
            }
            let candidates: Vec<_> = view
                .table
                .through(node)
                .filter(|&(_, pos)| pos >= phase.first_position() && phase.slot(pos) == view.step)
                .collect();
            if !candidates.is_empty() && rng.gen_bool(0.3) {
                let (path, pos) = candidates[rng.gen_range(0..candidates.len())];
                let payload = match phase {
                    Phase::Report => Payload::Report(forge_report(&ReportPayload {
                        reporter: path.hops[1],
                        subject: path.origin,
                        observed: Arc::new(Observed {
                            steps: view.history[..view.scenario.graph.node_count()]
                                .iter()
                                .map(|step| Arc::clone(&step[path.origin]))
                                .collect(),
                        }),
                    })),
                    _ => Payload::Value(Bit::from(rng.gen_bool(0.5))),
                };
                messages.push(Message::Relay(RoutedMessage {
                    phase,
                    path: PathId::of(path),
                    hop_trace: path.hops[..=pos].to_vec(),
                    payload,
                }));
            }
        }
        Emission::Uniform(Broadcast::new(messages))
    }
}

/// Fixed per-window moves, used for exhaustive search over small strategy spaces.
pub struct ScriptedStrategy {
    moves: BTreeMap<NodeId, [Move; SCRIPT_WINDOWS]>,
}

impl ScriptedStrategy {
    pub fn new(scenario: &Scenario, script: &[Move]) -> Self {
        let moves = scenario
            .faulty
            .iter()
            .zip(script.chunks(SCRIPT_WINDOWS))
            .map(|(&x, chunk)| (x, chunk.try_into().expect("validated script length")))
            .collect();
        Self { moves }
    }
}

impl Strategy for ScriptedStrategy {
    fn act(&mut self, view: &View<'_>, node: NodeId, honest: &Broadcast) -> Emission {
        let chosen = self.moves.get(&node).map_or(Move::Honest, |m| m[view.round.index()]);
        Emission::Uniform(match chosen {
            Move::Honest => honest.clone(),
            Move::Silent => Broadcast::empty(),
            Move::FlipAll => flip_all(honest),
        })
    }
}
