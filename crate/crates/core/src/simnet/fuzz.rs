use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::engine::run_scenario;
use super::scenario::{AdversarySpec, Move, Scenario, SCRIPT_WINDOWS};
use super::verify::{Property, Violation};
use crate::conditions::sufficient_connectivity;
use crate::graph::generators::{erdos_renyi, structured_families};
use crate::graph::{vertex_connectivity, Graph, NodeId, NodeSet};
use crate::protocol::{Bit, PathId, PathTable};

pub const FUZZ_MAX_NODES: usize = 10;
const ER_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    pub trials: usize,
    pub n_max: usize,
    pub f_max: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzError {
    #[error("n-max {0} exceeds the limit of {FUZZ_MAX_NODES}")]
    TooLarge(usize),
    #[error("n-max {n_max} cannot host a 2f-connected graph for any f in 1..={f_max}")]
    TooSmall { n_max: usize, f_max: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub runs: usize,
    pub failures: usize,
}

impl Tally {
    fn add(&mut self, failed: bool) {
        self.runs += 1;
        self.failures += usize::from(failed);
    }
}

/// Counts from a fuzz campaign; identical configs give identical summaries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub trials: usize,
    pub failures: usize,
    pub by_strategy: BTreeMap<String, Tally>,
    pub by_family: BTreeMap<String, Tally>,
    pub by_property: BTreeMap<Property, usize>,
    /// Runs whose graph fell below `2f` connectivity. Always 0 for sampled runs.
    pub advisory: usize,
    pub first_failure: Option<(Scenario, Vec<Violation>)>,
}

impl FuzzSummary {
    /// Merges another summary that covers later trials.
    pub fn merge(&mut self, other: FuzzSummary) {
        self.trials += other.trials;
        self.failures += other.failures;
        self.advisory += other.advisory;
        for (k, t) in other.by_strategy {
            let e = self.by_strategy.entry(k).or_default();
            e.runs += t.runs;
            e.failures += t.failures;
        }
        for (k, t) in other.by_family {
            let e = self.by_family.entry(k).or_default();
            e.runs += t.runs;
            e.failures += t.failures;
        }
        for (p, c) in other.by_property {
            *self.by_property.entry(p).or_default() += c;
        }
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
    }

    pub fn record(&mut self, family: &str, scenario: &Scenario, violations: Vec<Violation>, advisory: bool) {
        let failed = !violations.is_empty();
        self.trials += 1;
        self.failures += usize::from(failed);
        self.advisory += usize::from(advisory);
        self.by_strategy
            .entry(scenario.adversary.name().to_string())
            .or_default()
            .add(failed);
        self.by_family.entry(family.to_string()).or_default().add(failed);
        let mut props: Vec<Property> = violations.iter().map(|v| v.property).collect();
        props.dedup();
        for p in props {
            *self.by_property.entry(p).or_default() += 1;
        }
        if failed && self.first_failure.is_none() {
            self.first_failure = Some((scenario.clone(), violations));
        }
    }

    /// `key=value` lines, with the failing scenario block last.
    pub fn to_porcelain(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "failures={}", self.failures);
        let _ = writeln!(out, "advisory={}", self.advisory);
        for (k, t) in &self.by_strategy {
            let _ = writeln!(out, "strategy.{k}.runs={}", t.runs);
            let _ = writeln!(out, "strategy.{k}.failures={}", t.failures);
        }
        for (k, t) in &self.by_family {
            let _ = writeln!(out, "family.{k}.runs={}", t.runs);
            let _ = writeln!(out, "family.{k}.failures={}", t.failures);
        }
        for (p, c) in &self.by_property {
            let _ = writeln!(out, "property.{p}={c}");
        }
        if let Some((s, violations)) = &self.first_failure {
            for v in violations {
                let _ = writeln!(out, "violation={v}");
            }
            out.push_str("[scenario]\n");
            out.push_str(&s.to_text());
        }
        out
    }
}

/// The family label used in summaries: the generator name without size.
fn family_kind(name: &str) -> &str {
    name.split('-').next().unwrap_or(name)
}

fn random_subset<R: Rng>(rng: &mut R, pool: impl Iterator<Item = NodeId>, size: usize) -> NodeSet {
    pool.choose_multiple(rng, size).into_iter().collect()
}

fn random_adversary<R: Rng>(rng: &mut R, graph: &Graph, f: usize, faulty: &NodeSet) -> AdversarySpec {
    match rng.gen_range(0..6) {
        0 => AdversarySpec::Honest,
        1 => AdversarySpec::Silent,
        2 => {
            if rng.gen_bool(0.5) {
                return AdversarySpec::Tamper { paths: None };
            }
            let table = PathTable::build(graph, f);
            let through: Vec<PathId> = faulty
                .iter()
                .flat_map(|&x| table.through(x).map(|(p, _)| PathId::of(p)))
                .collect();
            let k = rng.gen_range(0..=through.len());
            let mut paths: Vec<PathId> = through.choose_multiple(rng, k).copied().collect();
            paths.sort();
            AdversarySpec::Tamper { paths: Some(paths) }
        }
        3 => {
            if rng.gen_bool(0.5) {
                return AdversarySpec::Frame { targets: None };
            }
            let honest = graph.nodes().filter(|u| !faulty.contains(u));
            let k = rng.gen_range(1..=2);
            AdversarySpec::Frame {
                targets: Some(random_subset(rng, honest, k).into_iter().collect()),
            }
        }
        4 => AdversarySpec::Random,
        _ => AdversarySpec::WorstCase {
            script: (0..SCRIPT_WINDOWS * faulty.len())
                .map(|_| *Move::ALL.choose(rng).expect("moves"))
                .collect(),
        },
    }
}

/// Largest `f` for which some graph on at most `n_max` nodes is `2f`-connected.
fn f_cap(n_max: usize, f_max: usize) -> usize {
    f_max.min(n_max.saturating_sub(1) / 2)
}

/// Draws one scenario: a `2f`-connected graph (Erdős–Rényi with rejection, or a
/// structured family), a faulty set of size at most `f`, inputs, a strategy and
/// a seed. Returns the family label with it.
pub fn sample_scenario<R: Rng>(rng: &mut R, n_max: usize, f_max: usize, families: &[(String, Graph, usize)]) -> (String, Scenario) {
    let f = rng.gen_range(1..=f_cap(n_max, f_max));
    let need = sufficient_connectivity(f);
    let mut picked = None;
    if rng.gen_bool(0.7) {
        let n = rng.gen_range(need + 1..=n_max);
        for _ in 0..ER_ATTEMPTS {
            let p = rng.gen_range(0.3..1.0);
            let g = erdos_renyi(n, p, rng);
            if vertex_connectivity(&g).is_ok_and(|k| k >= need) {
                picked = Some(("erdos-renyi".to_string(), g));
                break;
            }
        }
    }
    let (family, graph) = picked.unwrap_or_else(|| {
        let (name, g, _) = families
            .iter()
            .filter(|(_, g, k)| *k >= need && g.node_count() <= n_max)
            .choose(rng)
            .expect("complete graphs qualify");
        (family_kind(name).to_string(), g.clone())
    });
    let n = graph.node_count();
    let size = rng.gen_range(0..=f);
    let faulty = random_subset(rng, 0..n, size);
    let inputs = (0..n).map(|_| Bit::from(rng.gen_bool(0.5))).collect();
    let adversary = random_adversary(rng, &graph, f, &faulty);
    let scenario = Scenario {
        graph,
        f,
        faulty,
        inputs,
        adversary,
        seed: rng.next_u64(),
    };
    (family, scenario)
}

/// Structured families with their connectivity, for sampling.
pub fn family_pool(n_max: usize) -> Vec<(String, Graph, usize)> {
    structured_families(n_max)
        .into_iter()
        .map(|(name, g)| {
            let k = vertex_connectivity(&g).expect("families have nodes");
            (name, g, k)
        })
        .collect()
}

/// Runs `trials` sampled scenarios. Trial `i` is drawn from its own stream of
/// the campaign seed, so any trial can be regenerated alone.
pub fn fuzz(cfg: FuzzConfig) -> Result<FuzzSummary, FuzzError> {
    if cfg.n_max > FUZZ_MAX_NODES {
        return Err(FuzzError::TooLarge(cfg.n_max));
    }
    if cfg.f_max == 0 || f_cap(cfg.n_max, cfg.f_max) == 0 {
        return Err(FuzzError::TooSmall {
            n_max: cfg.n_max,
            f_max: cfg.f_max,
        });
    }
    let families = family_pool(cfg.n_max);
    let mut summary = FuzzSummary::default();
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64);
        let (family, scenario) = sample_scenario(&mut rng, cfg.n_max, cfg.f_max, &families);
        let (_, outcome) = run_scenario(&scenario).expect("sampled scenarios are valid");
        summary.record(&family, &scenario, outcome.violations, outcome.advisory);
    }
    Ok(summary)
}

/// Result of trying every worst-case script on one base scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub scripts: usize,
    pub failures: usize,
    pub first_failure: Option<(Scenario, Vec<Violation>)>,
}

/// Every `3^(4|faulty|)` per-window script applied to `base`'s faulty set.
pub fn worst_case_search(base: &Scenario) -> SearchResult {
    let len = SCRIPT_WINDOWS * base.faulty.len();
    let total = 3usize.pow(len as u32);
    let mut result = SearchResult {
        scripts: total,
        failures: 0,
        first_failure: None,
    };
    for code in 0..total {
        let mut rest = code;
        let script = (0..len)
            .map(|_| {
                let m = Move::ALL[rest % 3];
                rest /= 3;
                m
            })
            .collect();
        let scenario = Scenario {
            adversary: AdversarySpec::WorstCase { script },
            ..base.clone()
        };
        let (_, outcome) = run_scenario(&scenario).expect("base scenario is valid");
        if !outcome.violations.is_empty() {
            result.failures += 1;
            if result.first_failure.is_none() {
                result.first_failure = Some((scenario, outcome.violations));
            }
        }
    }
    result
}
