use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId, NodeSet};
use crate::protocol::{format_bits, parse_bits, Bit, PathId, Round};

/// Number of windows a worst-case script covers per faulty node.
pub const SCRIPT_WINDOWS: usize = Round::ALL.len();

/// What a faulty node does in one window of a worst-case script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Honest,
    Silent,
    /// Flip every value it transmits, including reported transcripts.
    FlipAll,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Honest, Move::Silent, Move::FlipAll];

    pub fn digit(self) -> char {
        match self {
            Move::Honest => '0',
            Move::Silent => '1',
            Move::FlipAll => '2',
        }
    }

    pub fn from_digit(c: char) -> Option<Self> {
        match c {
            '0' => Some(Move::Honest),
            '1' => Some(Move::Silent),
            '2' => Some(Move::FlipAll),
            _ => None,
        }
    }
}

/// Byzantine behaviour shared by all faulty nodes of a scenario.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdversarySpec {
    Honest,
    Silent,
    /// Flip relayed input and decision values. `None` tampers every path.
    Tamper { paths: Option<Vec<PathId>> },
    /// Forge round-2 reports that show the targets flipping. `None` targets
    /// every non-faulty node.
    Frame { targets: Option<Vec<NodeId>> },
    Random,
    /// One move per faulty node (ascending id) per window.
    WorstCase { script: Vec<Move> },
}

impl AdversarySpec {
    pub fn name(&self) -> &'static str {
        match self {
            AdversarySpec::Honest => "honest",
            AdversarySpec::Silent => "silent",
            AdversarySpec::Tamper { .. } => "tamper",
            AdversarySpec::Frame { .. } => "frame",
            AdversarySpec::Random => "random",
            AdversarySpec::WorstCase { .. } => "worst-case",
        }
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for AdversarySpec {
    /// `name` or `name:params`, e.g. `tamper:0>2#0,2>0#1` or `worst-case:0120`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            AdversarySpec::Tamper { paths: Some(p) } => write!(f, ":{}", join(p)),
            AdversarySpec::Frame { targets: Some(t) } => write!(f, ":{}", join(t)),
            AdversarySpec::WorstCase { script } => {
                write!(f, ":{}", script.iter().map(|m| m.digit()).collect::<String>())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad adversary `{0}`")]
pub struct AdversaryParseError(pub String);

fn parse_path_id(s: &str) -> Option<PathId> {
    let (origin, rest) = s.split_once('>')?;
    let (destination, index) = rest.split_once('#')?;
    Some(PathId {
        origin: origin.trim().parse().ok()?,
        destination: destination.trim().parse().ok()?,
        index: index.trim().parse().ok()?,
    })
}

/// Parses a comma-separated node list; the empty string is the empty list.
pub fn parse_node_list(s: &str) -> Option<Vec<NodeId>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

impl FromStr for AdversarySpec {
    type Err = AdversaryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AdversaryParseError(s.to_string());
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let spec = match (name, params) {
            ("honest", None) => AdversarySpec::Honest,
            ("silent", None) => AdversarySpec::Silent,
            ("random", None) => AdversarySpec::Random,
            ("tamper", None) => AdversarySpec::Tamper { paths: None },
            ("tamper", Some("")) => AdversarySpec::Tamper { paths: Some(Vec::new()) },
            ("tamper", Some(p)) => AdversarySpec::Tamper {
                paths: Some(p.split(',').map(parse_path_id).collect::<Option<_>>().ok_or_else(err)?),
            },
            ("frame", None) => AdversarySpec::Frame { targets: None },
            ("frame", Some(t)) => AdversarySpec::Frame {
                targets: Some(parse_node_list(t).ok_or_else(err)?),
            },
            ("worst-case", Some(code)) => AdversarySpec::WorstCase {
                script: code.chars().map(Move::from_digit).collect::<Option<_>>().ok_or_else(err)?,
            },
            _ => return Err(err()),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("fault budget must be at least 1")]
    ZeroBudget,
    #[error("{count} faulty nodes exceed the budget f={f}")]
    TooManyFaulty { count: usize, f: usize },
    #[error("faulty node {0} is out of range")]
    FaultyOutOfRange(NodeId),
    #[error("expected {expected} inputs, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("graph needs at least 2 nodes")]
    TooFewNodes,
    #[error("adversary parameter out of range: {0}")]
    AdversaryParam(String),
}

/// One fully specified run. Everything a run does follows from these fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub graph: Graph,
    pub f: usize,
    pub faulty: NodeSet,
    pub inputs: Vec<Bit>,
    pub adversary: AdversarySpec,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.graph.node_count();
        if self.f == 0 {
            return Err(ScenarioError::ZeroBudget);
        }
        if n < 2 {
            return Err(ScenarioError::TooFewNodes);
        }
        if let Some(&x) = self.faulty.iter().find(|&&x| x >= n) {
            return Err(ScenarioError::FaultyOutOfRange(x));
        }
        if self.faulty.len() > self.f {
            return Err(ScenarioError::TooManyFaulty {
                count: self.faulty.len(),
                f: self.f,
            });
        }
        if self.inputs.len() != n {
            return Err(ScenarioError::InputLength {
                expected: n,
                got: self.inputs.len(),
            });
        }
        match &self.adversary {
            AdversarySpec::Tamper { paths: Some(paths) } => {
                if let Some(p) = paths.iter().find(|p| p.origin >= n || p.destination >= n) {
                    return Err(ScenarioError::AdversaryParam(format!("path {p}")));
                }
            }
            AdversarySpec::Frame { targets: Some(t) } => {
                if let Some(x) = t.iter().find(|&&x| x >= n) {
                    return Err(ScenarioError::AdversaryParam(format!("target {x}")));
                }
            }
            AdversarySpec::WorstCase { script } => {
                let expected = SCRIPT_WINDOWS * self.faulty.len();
                if script.len() != expected {
                    return Err(ScenarioError::AdversaryParam(format!(
                        "script has {} moves, expected {expected}",
                        script.len()
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True when every non-faulty input equals `b`.
    pub fn honest_inputs_all(&self, b: Bit) -> bool {
        (0..self.inputs.len())
            .filter(|u| !self.faulty.contains(u))
            .all(|u| self.inputs[u] == b)
    }

    pub fn honest_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.nodes().filter(|u| !self.faulty.contains(u))
    }

    /// Flat `key=value` block; [`Scenario::parse`] reads it back.
    pub fn to_text(&self) -> String {
        let edges: Vec<String> = self.graph.edges().map(|(u, v)| format!("{u}-{v}")).collect();
        let faulty: Vec<NodeId> = self.faulty.iter().copied().collect();
        format!(
            "n={}\nedges={}\nf={}\nfaulty={}\ninputs={}\nadversary={}\nseed={}\n",
            self.graph.node_count(),
            edges.join(","),
            self.f,
            join(&faulty),
            format_bits(&self.inputs),
            self.adversary,
            self.seed
        )
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioParseError> {
        const KEYS: [&str; 7] = ["n", "edges", "f", "faulty", "inputs", "adversary", "seed"];
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ScenarioParseError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ScenarioParseError::UnknownKey(key.to_string()));
            }
            if fields.insert(key, value.trim()).is_some() {
                return Err(ScenarioParseError::DuplicateKey(key.to_string()));
            }
        }
        let get = |key: &'static str| fields.get(key).copied().ok_or(ScenarioParseError::MissingKey(key));
        let bad = |key: &'static str| ScenarioParseError::BadValue(key);

        let n: usize = get("n")?.parse().map_err(|_| bad("n"))?;
        let mut edges = Vec::new();
        let edge_text = get("edges")?;
        if !edge_text.is_empty() {
            for e in edge_text.split(',') {
                let (u, v) = e.split_once('-').ok_or(bad("edges"))?;
                edges.push((
                    u.trim().parse().map_err(|_| bad("edges"))?,
                    v.trim().parse().map_err(|_| bad("edges"))?,
                ));
            }
        }
        let graph = Graph::from_edges(n, edges)?;
        let scenario = Scenario {
            graph,
            f: get("f")?.parse().map_err(|_| bad("f"))?,
            faulty: parse_node_list(get("faulty")?).ok_or(bad("faulty"))?.into_iter().collect(),
            inputs: parse_bits(get("inputs")?).ok_or(bad("inputs"))?,
            adversary: get("adversary")?.parse().map_err(|_| bad("adversary"))?,
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
        };
        Ok(scenario)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioParseError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("bad value for `{0}`")]
    BadValue(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::cycle;

    fn sample() -> Scenario {
        Scenario {
            graph: cycle(4),
            f: 1,
            faulty: [1].into(),
            inputs: parse_bits("1011").unwrap(),
            adversary: AdversarySpec::Tamper {
                paths: Some(vec![PathId {
                    origin: 0,
                    destination: 2,
                    index: 0,
                }]),
            },
            seed: 42,
        }
    }

    #[test]
    fn text_round_trip() {
        let s = sample();
        let text = s.to_text();
        assert!(text.contains("adversary=tamper:0>2#0\n"));
        assert_eq!(Scenario::parse(&text).unwrap(), s);
    }

    #[test]
    fn adversary_strings_round_trip() {
        for text in ["honest", "silent", "random", "tamper", "tamper:0>2#0,3>1#1", "tamper:", "frame", "frame:2,3", "frame:", "worst-case:0120", "worst-case:"] {
            let spec: AdversarySpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("bogus".parse::<AdversarySpec>().is_err());
        assert!("worst-case:013".parse::<AdversarySpec>().is_err());
        assert!("silent:1".parse::<AdversarySpec>().is_err());
    }

    #[test]
    fn parse_rejects_unknown_and_duplicate_keys() {
        let text = sample().to_text();
        assert_eq!(
            Scenario::parse(&format!("{text}color=red\n")),
            Err(ScenarioParseError::UnknownKey("color".into()))
        );
        assert_eq!(
            Scenario::parse(&format!("{text}f=2\n")),
            Err(ScenarioParseError::DuplicateKey("f".into()))
        );
        assert_eq!(
            Scenario::parse(&text.replace("seed=42\n", "")),
            Err(ScenarioParseError::MissingKey("seed"))
        );
    }

    #[test]
    fn validation() {
        assert_eq!(sample().validate(), Ok(()));
        let mut s = sample();
        s.faulty = [1, 2].into();
        assert_eq!(s.validate(), Err(ScenarioError::TooManyFaulty { count: 2, f: 1 }));
        let mut s = sample();
        s.inputs.pop();
        assert_eq!(s.validate(), Err(ScenarioError::InputLength { expected: 4, got: 3 }));
        let mut s = sample();
        s.adversary = AdversarySpec::WorstCase { script: vec![Move::Silent] };
        assert!(matches!(s.validate(), Err(ScenarioError::AdversaryParam(_))));
        let mut s = sample();
        s.f = 0;
        assert_eq!(s.validate(), Err(ScenarioError::ZeroBudget));
    }
}
