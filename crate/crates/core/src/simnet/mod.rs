//! Deterministic synchronous local-broadcast simulator.
//!
//! A run has four windows of `n` steps: input flood, report flood, decision
//! flood, adoption. In each step every node emits one broadcast and every
//! neighbour receives it unchanged. Faulty nodes are driven by a [`Strategy`]
//! with full knowledge of the run; the engine rejects any attempt to show
//! different neighbours different content.

mod adversary;
mod engine;
mod fuzz;
mod scenario;
mod verify;

pub use adversary::{build_strategy, Emission, Strategy, View};
pub use engine::{message_counts, run_scenario, run_with_strategy, Outcome, SimError, Transcript};
pub use fuzz::{
    family_pool, fuzz, sample_scenario, worst_case_search, FuzzConfig, FuzzError, FuzzSummary, SearchResult, Tally,
    FUZZ_MAX_NODES,
};
pub use scenario::{
    parse_node_list, AdversaryParseError, AdversarySpec, Move, Scenario, ScenarioError, ScenarioParseError,
    SCRIPT_WINDOWS,
};
pub use verify::{verify_outcome, Property, Violation};
