use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::message::transmitted;
use super::{
    majority, Bit, Broadcast, Message, NodeType, Observed, Payload, PathId, PathTable, Phase,
    ProtocolError, ReportPayload, Round, RoutedMessage,
};
use crate::graph::{Graph, NodeId, NodeSet, Path};

/// How a value came to be reliably received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    Own,
    /// Heard directly from the origin's broadcast.
    Neighbor,
    /// Indices (within the origin→receiver paths) that delivered the value.
    PathQuorum(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliableValue {
    pub origin: NodeId,
    pub value: Bit,
    pub evidence: Evidence,
}

/// What a node is believed to have transmitted in one slot of round 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Belief {
    Sent(Bit),
    /// Known to have transmitted nothing in that slot.
    Nothing,
    Unknown,
}

impl Belief {
    fn known(value: Option<Bit>) -> Self {
        value.map_or(Belief::Nothing, Belief::Sent)
    }
}

/// One non-faulty node's view of a run.
///
/// Driven step by step: [`NodeState::emit`] produces the node's broadcast,
/// [`NodeState::receive`] consumes each neighbour's broadcast of the same step,
/// and [`NodeState::finish_round`] runs the end-of-window logic.
#[derive(Debug, Clone)]
pub struct NodeState {
    id: NodeId,
    input: Bit,
    f: usize,
    graph: Arc<Graph>,
    table: Arc<PathTable>,
    /// Own broadcasts in the flood and report windows, by step.
    sent: [Vec<Arc<Broadcast>>; 2],
    overheard: BTreeMap<NodeId, [Vec<Arc<Broadcast>>; 2]>,
    heard_inputs: BTreeMap<NodeId, Bit>,
    round1_view: BTreeMap<PathId, Bit>,
    report_view: BTreeMap<PathId, ReportPayload>,
    direct_decisions: BTreeMap<NodeId, Bit>,
    path_decisions: Vec<(usize, PathId, Bit)>,
    pending: Vec<Message>,
    seen: BTreeSet<(Phase, PathId)>,
    reliable_inputs: BTreeMap<NodeId, ReliableValue>,
    quorum_conflicts: NodeSet,
    fault_set: NodeSet,
    node_type: NodeType,
    decision: Option<Bit>,
    dropped: usize,
}

fn window_slot(round: Round) -> Option<usize> {
    match round {
        Round::Flood => Some(0),
        Round::Report => Some(1),
        _ => None,
    }
}

impl NodeState {
    pub fn new(id: NodeId, input: Bit, f: usize, graph: Arc<Graph>, table: Arc<PathTable>) -> Self {
        Self {
            id,
            input,
            f,
            graph,
            table,
            sent: Default::default(),
            overheard: BTreeMap::new(),
            heard_inputs: BTreeMap::new(),
            round1_view: BTreeMap::new(),
            report_view: BTreeMap::new(),
            direct_decisions: BTreeMap::new(),
            path_decisions: Vec::new(),
            pending: Vec::new(),
            seen: BTreeSet::new(),
            reliable_inputs: BTreeMap::new(),
            quorum_conflicts: NodeSet::new(),
            fault_set: NodeSet::new(),
            node_type: NodeType::B,
            decision: None,
            dropped: 0,
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn input(&self) -> Bit {
        self.input
    }

    pub fn fault_set(&self) -> &NodeSet {
        &self.fault_set
    }

    pub fn node_type(&self) -> NodeType {
        self.node_type
    }

    pub fn decision(&self) -> Option<Bit> {
        self.decision
    }

    pub fn reliable_inputs(&self) -> &BTreeMap<NodeId, ReliableValue> {
        &self.reliable_inputs
    }

    /// Origins for which two different values reached a path quorum.
    pub fn quorum_conflicts(&self) -> &NodeSet {
        &self.quorum_conflicts
    }

    /// Value delivered on each path ending here during round 1.
    pub fn round1_view(&self) -> &BTreeMap<PathId, Bit> {
        &self.round1_view
    }

    pub fn report_view(&self) -> &BTreeMap<PathId, ReportPayload> {
        &self.report_view
    }

    /// Malformed messages addressed to this node that were discarded.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Broadcasts this node heard from `neighbor` during `round` (flood or report).
    pub fn overheard(&self, neighbor: NodeId, round: Round) -> &[Arc<Broadcast>] {
        match (window_slot(round), self.overheard.get(&neighbor)) {
            (Some(w), Some(heard)) => &heard[w],
            _ => &[],
        }
    }

    pub fn emit(&mut self, round: Round, step: usize) -> Arc<Broadcast> {
        let mut messages = std::mem::take(&mut self.pending);
        if step == 0 {
            messages.clear();
            match round {
                Round::Flood => messages.push(Message::Announce {
                    phase: Phase::Input,
                    value: self.input,
                }),
                Round::Report => {
                    let reports = self.first_hop_reports();
                    messages.extend(reports);
                }
                Round::Decide => {
                    if let (NodeType::B, Some(value)) = (self.node_type, self.decision) {
                        messages.push(Message::Announce {
                            phase: Phase::Decision,
                            value,
                        });
                    }
                }
                Round::Adopt => {}
            }
        }
        let broadcast = Arc::new(Broadcast::new(messages));
        if let Some(w) = window_slot(round) {
            self.sent[w].push(Arc::clone(&broadcast));
        }
        broadcast
    }

    pub fn receive(&mut self, round: Round, step: usize, sender: NodeId, broadcast: &Arc<Broadcast>) {
        debug_assert!(self.graph.has_edge(self.id, sender));
        if let Some(w) = window_slot(round) {
            self.overheard.entry(sender).or_default()[w].push(Arc::clone(broadcast));
        }
        let Some(phase) = round.phase() else {
            return;
        };
        if step == 0 {
            let announced = match phase {
                Phase::Input => Some(broadcast.announced(Phase::Input).unwrap_or(Bit::Zero)),
                Phase::Decision => broadcast.announced(Phase::Decision),
                Phase::Report => None,
            };
            if let Some(value) = announced {
                self.accept_origin(phase, sender, value);
            }
        }
        for message in broadcast.messages() {
            if let Message::Relay(r) = message {
                if r.phase == phase {
                    self.relay_step(step, sender, r);
                }
            }
        }
    }

    fn accept_origin(&mut self, phase: Phase, origin: NodeId, value: Bit) {
        match phase {
            Phase::Input => {
                self.heard_inputs.entry(origin).or_insert(value);
            }
            Phase::Decision => {
                self.direct_decisions.entry(origin).or_insert(value);
            }
            Phase::Report => return,
        }
        let table = Arc::clone(&self.table);
        for path in table.from(origin).filter(|p| p.hops[1] == self.id) {
            let id = PathId::of(path);
            if self.seen.insert((phase, id)) {
                self.pending.push(Message::Relay(RoutedMessage {
                    phase,
                    path: id,
                    hop_trace: vec![origin, self.id],
                    payload: Payload::Value(value),
                }));
            }
        }
    }

    /// Handles one routed message heard from `sender` at `step`. Returns the
    /// message as this node will rebroadcast it next step, or `None` when it
    /// is not ours to relay (wrong path, wrong sender, off schedule, duplicate,
    /// malformed) or when this node is the destination.
    pub fn relay_step(&mut self, step: usize, sender: NodeId, incoming: &RoutedMessage) -> Option<RoutedMessage> {
        let Some(path) = self.table.get(incoming.path) else {
            self.dropped += 1;
            return None;
        };
        let pos = path.position_of(self.id)?;
        if pos == 0 || path.hops[pos - 1] != sender || pos - 1 < incoming.phase.first_position() {
            return None;
        }
        if incoming.phase.slot(pos - 1) != step {
            return None;
        }
        if !incoming.is_well_formed(path, pos - 1) {
            self.dropped += 1;
            return None;
        }
        if !self.seen.insert((incoming.phase, incoming.path)) {
            return None;
        }
        if pos + 1 == path.hops.len() {
            match &incoming.payload {
                Payload::Value(v) if incoming.phase == Phase::Input => {
                    self.round1_view.insert(incoming.path, *v);
                }
                Payload::Value(v) => self.path_decisions.push((step, incoming.path, *v)),
                Payload::Report(rep) => {
                    self.report_view.insert(incoming.path, rep.clone());
                }
            }
            return None;
        }
        let mut out = incoming.clone();
        out.hop_trace.push(self.id);
        self.pending.push(Message::Relay(out.clone()));
        Some(out)
    }

    /// One report per neighbour: everything that neighbour broadcast in round 1.
    pub fn build_reports(&self) -> Vec<ReportPayload> {
        self.graph
            .neighbors(self.id)
            .iter()
            .map(|&x| ReportPayload {
                reporter: self.id,
                subject: x,
                observed: Arc::new(Observed {
                    steps: self.overheard(x, Round::Flood).to_vec(),
                }),
            })
            .collect()
    }

    /// Reports this node injects as first hop of each neighbour's paths.
    fn first_hop_reports(&mut self) -> Vec<Message> {
        let table = Arc::clone(&self.table);
        let mut out = Vec::new();
        for report in self.build_reports() {
            for path in table.from(report.subject).filter(|p| p.hops[1] == self.id) {
                let id = PathId::of(path);
                self.seen.insert((Phase::Report, id));
                out.push(Message::Relay(RoutedMessage {
                    phase: Phase::Report,
                    path: id,
                    hop_trace: vec![report.subject, self.id],
                    payload: Payload::Report(report.clone()),
                }));
            }
        }
        out
    }

    /// Runs the end-of-window logic: reliable inputs after the flood, fault
    /// identification and type-B decisions after the reports, type-A
    /// decisions after the adoption window.
    pub fn finish_round(&mut self, round: Round) -> Result<(), ProtocolError> {
        self.pending.clear();
        match round {
            Round::Flood => {
                for origin in self.graph.nodes() {
                    match self.reliable_receive(origin) {
                        Ok(Some(rv)) => {
                            self.reliable_inputs.insert(origin, rv);
                        }
                        Ok(None) => {}
                        Err(_) => {
                            self.quorum_conflicts.insert(origin);
                        }
                    }
                }
                Ok(())
            }
            Round::Report => {
                self.identify_faults();
                if self.node_type == NodeType::B {
                    self.decide()?;
                }
                Ok(())
            }
            Round::Decide => Ok(()),
            Round::Adopt => {
                if self.node_type == NodeType::A {
                    self.decide()?;
                }
                Ok(())
            }
        }
    }

    /// The value this node accepts as `origin`'s round-1 input: its own input,
    /// a neighbour's announcement, or a value delivered identically on at
    /// least `f + 1` of the fixed paths.
    pub fn reliable_receive(&self, origin: NodeId) -> Result<Option<ReliableValue>, ProtocolError> {
        if origin == self.id {
            return Ok(Some(ReliableValue {
                origin,
                value: self.input,
                evidence: Evidence::Own,
            }));
        }
        if self.graph.has_edge(self.id, origin) {
            return Ok(self.heard_inputs.get(&origin).map(|&value| ReliableValue {
                origin,
                value,
                evidence: Evidence::Neighbor,
            }));
        }
        let mut by_value: BTreeMap<Bit, Vec<usize>> = BTreeMap::new();
        for path in self.table.between(origin, self.id) {
            if let Some(&v) = self.round1_view.get(&PathId::of(path)) {
                by_value.entry(v).or_default().push(path.index);
            }
        }
        let mut quorums = by_value.into_iter().filter(|(_, paths)| paths.len() > self.f);
        match (quorums.next(), quorums.next()) {
            (Some(_), Some(_)) => Err(ProtocolError::QuorumConflict { origin }),
            (Some((value, paths)), None) => Ok(Some(ReliableValue {
                origin,
                value,
                evidence: Evidence::PathQuorum(paths),
            })),
            _ => Ok(None),
        }
    }

    /// What `x`, at `position` on the round-1 `path`, transmitted in its slot.
    /// Known directly for this node and its neighbours; otherwise at least
    /// `f + 1` reports about `x`, arriving on `x`'s paths to this node, must
    /// agree.
    pub fn believed_transmission(&self, x: NodeId, path: &Path, position: usize) -> Belief {
        let slot = Phase::Input.slot(position);
        let read = |b: &Broadcast| transmitted(b, Phase::Input, path, position).and_then(|p| p.value());
        if x == self.id {
            return self.sent[0].get(slot).map_or(Belief::Unknown, |b| Belief::known(read(b)));
        }
        if self.graph.has_edge(self.id, x) {
            return self
                .overheard(x, Round::Flood)
                .get(slot)
                .map_or(Belief::Unknown, |b| Belief::known(read(b)));
        }
        let mut tally: BTreeMap<Option<Bit>, usize> = BTreeMap::new();
        for route in self.table.between(x, self.id) {
            if let Some(rep) = self.report_view.get(&PathId::of(route)) {
                let seen = rep.observed.steps.get(slot).and_then(|b| read(b));
                *tally.entry(seen).or_default() += 1;
            }
        }
        let mut quorums = tally.into_iter().filter(|&(_, count)| count > self.f);
        match (quorums.next(), quorums.next()) {
            (Some((value, _)), None) => Belief::known(value),
            _ => Belief::Unknown,
        }
    }

    /// Convicts nodes from round-1 and round-2 evidence and sets the node type.
    ///
    /// Direct: a successor on one of our paths that did not relay exactly what
    /// we transmitted. Path scan: for every origin with a reliable value `b`,
    /// walk each of its paths and accuse the first hop known to have
    /// transmitted anything other than `b`; hops of unknown behaviour are
    /// skipped.
    pub fn identify_faults(&mut self) -> &NodeSet {
        let mut accused = NodeSet::new();
        let table = Arc::clone(&self.table);

        for (w, phase) in [(0usize, Phase::Input), (1, Phase::Report)] {
            let own = table.from(self.id).map(|p| (p, 0)).chain(table.through(self.id));
            for (path, pos) in own {
                if pos < phase.first_position() || pos + 2 >= path.hops.len() {
                    continue;
                }
                let Some(mine) = self.sent[w]
                    .get(phase.slot(pos))
                    .and_then(|b| transmitted(b, phase, path, pos))
                else {
                    continue;
                };
                let next = path.hops[pos + 1];
                let theirs = self.overheard.get(&next).and_then(|heard| {
                    heard[w]
                        .get(phase.slot(pos + 1))
                        .and_then(|b| transmitted(b, phase, path, pos + 1))
                });
                if theirs.as_ref() != Some(&mine) {
                    accused.insert(next);
                }
            }
        }

        for rv in self.reliable_inputs.values() {
            for path in table.from(rv.origin) {
                for pos in 1..path.hops.len() - 1 {
                    match self.believed_transmission(path.hops[pos], path, pos) {
                        Belief::Sent(v) if v == rv.value => {}
                        Belief::Unknown => {}
                        Belief::Sent(_) | Belief::Nothing => {
                            accused.insert(path.hops[pos]);
                            break;
                        }
                    }
                }
            }
        }

        self.node_type = if accused.len() == self.f {
            NodeType::A
        } else {
            NodeType::B
        };
        self.fault_set = accused;
        &self.fault_set
    }

    /// Type B: majority over the reliably received inputs. Type A: the first
    /// decision from a node outside the fault set over a fault-free route, or
    /// failing that the majority over the inputs of all nodes outside the fault
    /// set. A decision, once made, is final.
    pub fn decide(&mut self) -> Result<Bit, ProtocolError> {
        if let Some(d) = self.decision {
            return Ok(d);
        }
        let value = match self.node_type {
            NodeType::B => majority(self.reliable_inputs.values().map(|rv| rv.value))?,
            NodeType::A => match self.adopted_decision() {
                Some(v) => v,
                None => self.clean_majority()?,
            },
        };
        self.decision = Some(value);
        Ok(value)
    }

    fn is_clean(&self, path: &Path) -> bool {
        path.interior().iter().all(|h| !self.fault_set.contains(h))
    }

    fn adopted_decision(&self) -> Option<Bit> {
        let direct = self
            .direct_decisions
            .iter()
            .filter(|(origin, _)| !self.fault_set.contains(origin))
            .map(|(&origin, &v)| (0, origin, 0, v));
        let routed = self
            .path_decisions
            .iter()
            .filter(|(_, id, _)| {
                !self.fault_set.contains(&id.origin)
                    && self.table.get(*id).is_some_and(|p| self.is_clean(p))
            })
            .map(|&(step, id, v)| (step, id.origin, id.index, v));
        direct.chain(routed).min().map(|(.., v)| v)
    }

    fn clean_majority(&self) -> Result<Bit, ProtocolError> {
        let mut values = Vec::new();
        for origin in self.graph.nodes().filter(|u| !self.fault_set.contains(u)) {
            let value = if origin == self.id {
                Some(self.input)
            } else if self.graph.has_edge(self.id, origin) {
                self.heard_inputs.get(&origin).copied()
            } else {
                self.table
                    .between(origin, self.id)
                    .iter()
                    .filter(|p| self.is_clean(p))
                    .find_map(|p| self.round1_view.get(&PathId::of(p)).copied())
            };
            values.push(value.ok_or(ProtocolError::NoCleanPath { origin })?);
        }
        majority(values)
    }
}
