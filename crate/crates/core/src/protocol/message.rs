//! Wire-level content exchanged in the simulator.
//!
//! A node emits exactly one [`Broadcast`] per step; every neighbour receives
//! the same value. Messages inside a broadcast are kept sorted so that "the
//! first message for a path" has one meaning for every observer.

use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{Bit, Phase};
use crate::graph::{NodeId, Path};

/// Names one of the fixed paths: `index` among the paths from `origin` to `destination`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathId {
    pub origin: NodeId,
    pub destination: NodeId,
    pub index: usize,
}

impl PathId {
    pub fn of(path: &Path) -> Self {
        Self {
            origin: path.origin,
            destination: path.destination,
            index: path.index,
        }
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}#{}", self.origin, self.destination, self.index)
    }
}

/// A subject's round-1 broadcasts, one entry per step, as heard by a neighbour.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Observed {
    pub steps: Vec<Arc<Broadcast>>,
}

impl Observed {
    /// Short stable digest of the canonical encoding, used in transcript dumps.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (step, b) in self.steps.iter().enumerate() {
            hasher.update(format!("{step}:{b}\n").as_bytes());
        }
        hasher.finalize()[..8]
            .iter()
            .map(|byte| format!("{byte:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReportPayload {
    pub reporter: NodeId,
    pub subject: NodeId,
    pub observed: Arc<Observed>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    Value(Bit),
    Report(ReportPayload),
}

impl Payload {
    pub fn value(&self) -> Option<Bit> {
        match self {
            Payload::Value(b) => Some(*b),
            Payload::Report(_) => None,
        }
    }
}

/// A flood message travelling one fixed path. `hop_trace` lists the nodes the
/// message has visited, ending with the node that broadcast it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoutedMessage {
    pub phase: Phase,
    pub path: PathId,
    pub hop_trace: Vec<NodeId>,
    pub payload: Payload,
}

impl RoutedMessage {
    pub fn origin(&self) -> NodeId {
        self.path.origin
    }

    /// Sent from `position` on `path`: the trace is the path prefix ending
    /// there and the payload matches the phase. Report payloads must name the
    /// path's origin as subject and its first hop as reporter.
    pub fn is_well_formed(&self, path: &Path, position: usize) -> bool {
        if self.hop_trace.as_slice() != &path.hops[..=position] {
            return false;
        }
        match (&self.phase, &self.payload) {
            (Phase::Report, Payload::Report(rep)) => {
                rep.subject == path.origin && rep.reporter == path.hops[1]
            }
            (Phase::Input | Phase::Decision, Payload::Value(_)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Message {
    /// An origin's own value for an input or decision flood. One announcement
    /// feeds every path starting at the sender.
    Announce { phase: Phase, value: Bit },
    Relay(RoutedMessage),
}

/// Everything one node transmits in one step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Broadcast {
    messages: Vec<Message>,
}

impl Broadcast {
    pub fn new(mut messages: Vec<Message>) -> Self {
        messages.sort();
        messages.dedup();
        Self { messages }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn into_messages(self) -> Vec<Message> {
        self.messages
    }

    /// First announcement for `phase`.
    pub fn announced(&self, phase: Phase) -> Option<Bit> {
        self.messages.iter().find_map(|m| match m {
            Message::Announce { phase: p, value } if *p == phase => Some(*value),
            _ => None,
        })
    }

    /// Relays for `(phase, path)` in canonical order.
    pub fn relays_for(&self, phase: Phase, path: PathId) -> impl Iterator<Item = &RoutedMessage> {
        let key = (phase, path);
        let start = self.messages.partition_point(|m| match m {
            Message::Announce { .. } => true,
            Message::Relay(r) => (r.phase, r.path) < key,
        });
        self.messages[start..].iter().map_while(move |m| match m {
            Message::Relay(r) if (r.phase, r.path) == key => Some(r),
            _ => None,
        })
    }

    /// First well-formed relay for `path` sent from `position`.
    pub fn relayed(&self, phase: Phase, path: &Path, position: usize) -> Option<&RoutedMessage> {
        self.relays_for(phase, PathId::of(path))
            .find(|r| r.is_well_formed(path, position))
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Announce { phase, value } => write!(f, "announce {phase} {value}"),
            Message::Relay(r) => {
                let trace: Vec<String> = r.hop_trace.iter().map(ToString::to_string).collect();
                write!(f, "relay {} {} trace={} ", r.phase, r.path, trace.join(","))?;
                match &r.payload {
                    Payload::Value(b) => write!(f, "value={b}"),
                    Payload::Report(rep) => write!(
                        f,
                        "reporter={} subject={} observed={}",
                        rep.reporter,
                        rep.subject,
                        rep.observed.digest()
                    ),
                }
            }
        }
    }
}

impl fmt::Display for Broadcast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.messages.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

/// What the node at `position` on `path` transmitted for a `phase` flood, read
/// from its broadcast at the matching step. Position 0 is the origin's
/// announcement; a missing input announcement counts as `0`.
pub fn transmitted(b: &Broadcast, phase: Phase, path: &Path, position: usize) -> Option<Payload> {
    if position == 0 {
        return match phase {
            Phase::Input => Some(Payload::Value(b.announced(Phase::Input).unwrap_or(Bit::Zero))),
            Phase::Decision => b.announced(Phase::Decision).map(Payload::Value),
            Phase::Report => None,
        };
    }
    b.relayed(phase, path, position).map(|r| r.payload.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(hops: &[NodeId]) -> Path {
        Path {
            origin: hops[0],
            destination: *hops.last().unwrap(),
            index: 0,
            hops: hops.to_vec(),
        }
    }

    fn relay(p: &Path, upto: usize, value: Bit) -> Message {
        Message::Relay(RoutedMessage {
            phase: Phase::Input,
            path: PathId::of(p),
            hop_trace: p.hops[..=upto].to_vec(),
            payload: Payload::Value(value),
        })
    }

    #[test]
    fn broadcast_is_canonical() {
        let p = path(&[0, 1, 2]);
        let a = Broadcast::new(vec![relay(&p, 1, Bit::One), Message::Announce {
            phase: Phase::Input,
            value: Bit::Zero,
        }]);
        let b = Broadcast::new(vec![
            Message::Announce {
                phase: Phase::Input,
                value: Bit::Zero,
            },
            relay(&p, 1, Bit::One),
            relay(&p, 1, Bit::One),
        ]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn first_well_formed_relay_wins() {
        let p = path(&[0, 1, 2, 3]);
        let bad_trace = Message::Relay(RoutedMessage {
            phase: Phase::Input,
            path: PathId::of(&p),
            hop_trace: vec![0, 2],
            payload: Payload::Value(Bit::Zero),
        });
        let b = Broadcast::new(vec![bad_trace, relay(&p, 1, Bit::One), relay(&p, 1, Bit::Zero)]);
        assert_eq!(transmitted(&b, Phase::Input, &p, 1), Some(Payload::Value(Bit::Zero)));
        assert_eq!(transmitted(&b, Phase::Input, &p, 2), None);
        assert_eq!(transmitted(&b, Phase::Decision, &p, 1), None);
    }

    #[test]
    fn silent_origin_counts_as_zero() {
        let p = path(&[0, 1, 2]);
        let silent = Broadcast::empty();
        assert_eq!(transmitted(&silent, Phase::Input, &p, 0), Some(Payload::Value(Bit::Zero)));
        assert_eq!(transmitted(&silent, Phase::Decision, &p, 0), None);
    }

    #[test]
    fn digest_is_stable() {
        let p = path(&[0, 1, 2]);
        let obs = Observed {
            steps: vec![Arc::new(Broadcast::new(vec![relay(&p, 1, Bit::One)]))],
        };
        assert_eq!(obs.digest(), obs.clone().digest());
        assert_eq!(obs.digest().len(), 16);
        assert_ne!(obs.digest(), Observed::default().digest());
    }
}
