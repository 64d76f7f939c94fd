//! The three-round consensus algorithm for `2f`-connected graphs.
//!
//! Round 1 floods every input along the fixed disjoint paths; round 2 has each
//! neighbour of `x` report `x`'s round-1 broadcasts along `x`'s own paths, which
//! lets every node convict relays that tampered; round 3 lets nodes that do not
//! know all `f` faulty nodes (type B) decide by majority and flood the result,
//! which nodes that do (type A) adopt over fault-free paths.

mod message;
mod node;
mod table;

use std::fmt;

use thiserror::Error;

use crate::graph::NodeId;

pub use message::{transmitted, Broadcast, Message, Observed, Payload, PathId, ReportPayload, RoutedMessage};
pub use node::{Belief, Evidence, NodeState, ReliableValue};
pub use table::PathTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Option<Vec<Bit>> {
    s.chars().map(Bit::from_char).collect()
}

pub fn format_bits(bits: &[Bit]) -> String {
    bits.iter().map(|b| b.as_char()).collect()
}

/// The four `n`-step windows of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Round {
    Flood,
    Report,
    Decide,
    Adopt,
}

impl Round {
    pub const ALL: [Round; 4] = [Round::Flood, Round::Report, Round::Decide, Round::Adopt];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Flood kind carried in this window, if any.
    pub fn phase(self) -> Option<Phase> {
        match self {
            Round::Flood => Some(Phase::Input),
            Round::Report => Some(Phase::Report),
            Round::Decide => Some(Phase::Decision),
            Round::Adopt => None,
        }
    }
}

impl fmt::Display for Round {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Round::Flood => "flood",
            Round::Report => "report",
            Round::Decide => "decide",
            Round::Adopt => "adopt",
        })
    }
}

/// Kind of flood a routed message belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Input,
    Report,
    Decision,
}

impl Phase {
    /// Path position that transmits first. Reports start at the subject's
    /// neighbour, everything else at the origin.
    pub fn first_position(self) -> usize {
        match self {
            Phase::Report => 1,
            Phase::Input | Phase::Decision => 0,
        }
    }

    /// Step (within the window) at which the node at `position` transmits.
    pub fn slot(self, position: usize) -> usize {
        position - self.first_position()
    }

    pub fn round(self) -> Round {
        match self {
            Phase::Input => Round::Flood,
            Phase::Report => Round::Report,
            Phase::Decision => Round::Decide,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Input => "input",
            Phase::Report => "report",
            Phase::Decision => "decision",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeType {
    /// Knows all `f` faulty nodes.
    A,
    B,
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeType::A => "A",
            NodeType::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("majority of an empty multiset")]
    EmptyMajority,
    #[error("two values from origin {origin} each reached a path quorum")]
    QuorumConflict { origin: NodeId },
    #[error("no fault-free path delivered the input of node {origin}")]
    NoCleanPath { origin: NodeId },
}

/// The strictly more frequent bit; ties go to `0`.
pub fn majority<I>(values: I) -> Result<Bit, ProtocolError>
where
    I: IntoIterator<Item = Bit>,
{
    let (mut zeros, mut ones) = (0usize, 0usize);
    for v in values {
        match v {
            Bit::Zero => zeros += 1,
            Bit::One => ones += 1,
        }
    }
    match (zeros, ones) {
        (0, 0) => Err(ProtocolError::EmptyMajority),
        (z, o) if o > z => Ok(Bit::One),
        _ => Ok(Bit::Zero),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Bit::{One, Zero};

    #[test]
    fn majority_examples() {
        assert_eq!(majority([One, One, Zero]), Ok(One));
        assert_eq!(majority([One, Zero]), Ok(Zero));
        assert_eq!(majority([One; 5]), Ok(One));
        assert_eq!(majority([Zero; 3]), Ok(Zero));
        assert_eq!(majority([]), Err(ProtocolError::EmptyMajority));
    }

    #[test]
    fn bits_round_trip() {
        let bits = parse_bits("10110").unwrap();
        assert_eq!(format_bits(&bits), "10110");
        assert!(parse_bits("10x").is_none());
        assert_eq!(One.flip(), Zero);
    }

    #[test]
    fn slots_follow_positions() {
        assert_eq!(Phase::Input.slot(0), 0);
        assert_eq!(Phase::Input.slot(3), 3);
        assert_eq!(Phase::Report.slot(1), 0);
        assert_eq!(Phase::Report.slot(4), 3);
    }
}
