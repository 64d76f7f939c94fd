use std::collections::BTreeMap;

use lbcast_core::graph::generators::{circulant, complete, cycle, structured_families};
use lbcast_core::graph::{vertex_connectivity, NodeId};
use lbcast_core::protocol::{parse_bits, Bit, Broadcast, Phase};
use lbcast_core::simnet::{
    family_pool, fuzz, run_scenario, run_with_strategy, sample_scenario, verify_outcome, worst_case_search,
    AdversarySpec, Emission, FuzzConfig, Property, Scenario, ScenarioError, SimError, Strategy, View,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario(graph: lbcast_core::graph::Graph, f: usize, faulty: &[NodeId], inputs: &str, adversary: &str) -> Scenario {
    Scenario {
        graph,
        f,
        faulty: faulty.iter().copied().collect(),
        inputs: parse_bits(inputs).unwrap(),
        adversary: adversary.parse().unwrap(),
        seed: 7,
    }
}

fn properties(o: &lbcast_core::simnet::Outcome) -> Vec<Property> {
    o.violations.iter().map(|v| v.property).collect()
}

#[test]
fn complete_five_with_a_tamperer_decides_one() {
    let (t, o) = run_scenario(&scenario(complete(5), 1, &[4], "11110", "tamper")).unwrap();
    assert_eq!(t.step_count(), 20);
    assert!(o.decisions.values().all(|&d| d == Some(Bit::One)));
    assert!(o.violations.is_empty());
}

#[test]
fn fault_free_triangle_agrees() {
    let (_, o) = run_scenario(&scenario(complete(3), 1, &[], "101", "honest")).unwrap();
    let decided: Vec<_> = o.decisions.values().collect();
    assert!(decided.windows(2).all(|w| w[0] == w[1]));
    assert!(o.violations.is_empty());
}

#[test]
fn invalid_scenarios_are_rejected() {
    let s = scenario(complete(5), 1, &[1, 2], "11110", "honest");
    assert_eq!(
        run_scenario(&s).unwrap_err(),
        SimError::Scenario(ScenarioError::TooManyFaulty { count: 2, f: 1 })
    );
}

#[test]
fn corrupted_decisions_trip_agreement_and_validity() {
    let s = scenario(complete(4), 1, &[], "1111", "honest");
    let (t, o) = run_scenario(&s).unwrap();
    assert!(o.violations.is_empty());

    let mut split = o.clone();
    split.decisions.insert(2, Some(Bit::Zero));
    let found: Vec<Property> = verify_outcome(&s, &t, &split).iter().map(|v| v.property).collect();
    assert!(found.contains(&Property::Agreement));
    assert!(found.contains(&Property::Validity));

    let mut all_zero = o.clone();
    for d in all_zero.decisions.values_mut() {
        *d = Some(Bit::Zero);
    }
    let found: Vec<Property> = verify_outcome(&s, &t, &all_zero).iter().map(|v| v.property).collect();
    assert_eq!(found, vec![Property::Validity]);

    let mut undecided = o;
    undecided.decisions.insert(0, None);
    let found: Vec<Property> = verify_outcome(&s, &t, &undecided).iter().map(|v| v.property).collect();
    assert!(found.contains(&Property::Termination));
}

#[test]
fn accusing_an_honest_node_is_unsound() {
    let s = scenario(cycle(4), 1, &[1], "1111", "tamper:0>2#0");
    let (t, mut o) = run_scenario(&s).unwrap();
    o.fault_sets.insert(2, [3].into());
    let found: Vec<Property> = verify_outcome(&s, &t, &o).iter().map(|v| v.property).collect();
    assert!(found.contains(&Property::Soundness));
}

struct TwoFaced;

impl Strategy for TwoFaced {
    fn act(&mut self, view: &View<'_>, node: NodeId, honest: &Broadcast) -> Emission {
        let neighbours = view.scenario.graph.neighbors(node);
        let per = neighbours
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, if i == 0 { honest.clone() } else { Broadcast::empty() }))
            .collect();
        Emission::PerNeighbor(per)
    }
}

struct SameToAll;

impl Strategy for SameToAll {
    fn act(&mut self, view: &View<'_>, node: NodeId, honest: &Broadcast) -> Emission {
        let neighbours = view.scenario.graph.neighbors(node);
        Emission::PerNeighbor(neighbours.iter().map(|&v| (v, honest.clone())).collect())
    }
}

#[test]
fn engine_rejects_equivocation() {
    let s = scenario(complete(4), 1, &[3], "1111", "honest");
    assert_eq!(
        run_with_strategy(&s, &mut TwoFaced).unwrap_err(),
        SimError::Equivocation { node: 3, step: 0 }
    );
    let (_, o) = run_with_strategy(&s, &mut SameToAll).unwrap();
    assert!(o.violations.is_empty());
}

#[test]
fn every_step_has_one_broadcast_per_node() {
    let s = scenario(circulant(6, &[1, 2]), 2, &[0, 3], "101101", "random");
    let (t, _) = run_scenario(&s).unwrap();
    assert_eq!(t.step_count(), 24);
    for step in 0..t.step_count() {
        assert_eq!(t.step(step).len(), 6);
    }
}

#[test]
fn silent_faults_do_not_block_decisions() {
    for (name, g) in structured_families(6) {
        let k = vertex_connectivity(&g).unwrap();
        for f in (1..=2).filter(|f| 2 * f <= k) {
            let faulty: Vec<NodeId> = (0..f).collect();
            let inputs: String = (0..g.node_count()).map(|u| if u % 2 == 0 { '1' } else { '0' }).collect();
            let (_, o) = run_scenario(&scenario(g.clone(), f, &faulty, &inputs, "silent")).unwrap();
            assert!(o.decisions.values().all(Option::is_some), "{name} f={f}");
            assert!(o.violations.is_empty(), "{name} f={f}: {:?}", o.violations);
        }
    }
}

#[test]
fn a_single_framer_never_gets_an_honest_node_accused() {
    for (name, g) in structured_families(6) {
        if vertex_connectivity(&g).unwrap() < 2 {
            continue;
        }
        let n = g.node_count();
        for x in 0..n {
            for inputs in ["0".repeat(n), "1".repeat(n), "10".repeat(n)[..n].to_string()] {
                let (_, o) = run_scenario(&scenario(g.clone(), 1, &[x], &inputs, "frame")).unwrap();
                for (v, fs) in &o.fault_sets {
                    assert!(fs.iter().all(|&y| y == x), "{name}: node {v} accused {fs:?}, framer {x}");
                }
                assert!(o.violations.is_empty(), "{name} framer {x}: {:?}", o.violations);
            }
        }
    }
}

#[test]
fn tamperer_origin_value_still_reaches_everyone() {
    for (name, g) in structured_families(7) {
        if vertex_connectivity(&g).unwrap() < 2 {
            continue;
        }
        let n = g.node_count();
        for x in 0..n {
            let inputs: String = (0..n).map(|u| if u == x { '0' } else { '1' }).collect();
            let (t, o) = run_scenario(&scenario(g.clone(), 1, &[x], &inputs, "tamper")).unwrap();
            assert!(!properties(&o).contains(&Property::Lemma1), "{name} tamperer {x}");
            let flooded = t.broadcast(0, x).announced(Phase::Input);
            assert_eq!(flooded, Some(Bit::Zero));
            for st in t.final_states().values() {
                assert_eq!(st.reliable_inputs()[&x].value, Bit::Zero, "{name} tamperer {x}");
            }
        }
    }
}

#[test]
fn worst_case_scripts_on_small_graphs() {
    let cases = [
        (cycle(4), 1, vec![1]),
        (cycle(5), 1, vec![0]),
        (circulant(6, &[1, 3]), 1, vec![2]),
        (complete(5), 2, vec![0, 1]),
    ];
    for (g, f, faulty) in cases {
        let n = g.node_count();
        for inputs in ["1".repeat(n), "10".repeat(n)[..n].to_string()] {
            let base = Scenario {
                graph: g.clone(),
                f,
                faulty: faulty.iter().copied().collect(),
                inputs: parse_bits(&inputs).unwrap(),
                adversary: AdversarySpec::Honest,
                seed: 0,
            };
            let result = worst_case_search(&base);
            assert_eq!(result.scripts, 3usize.pow(4 * faulty.len() as u32));
            assert_eq!(result.failures, 0, "{:?}", result.first_failure);
        }
    }
}

#[test]
fn transcript_export_has_one_line_per_message() {
    let s = scenario(cycle(4), 1, &[1], "1010", "tamper:0>2#0");
    let (t, _) = run_scenario(&s).unwrap();
    let export = t.export();
    let total: usize = (0..t.step_count()).flat_map(|i| t.step(i).iter().map(|b| b.len())).sum();
    assert_eq!(export.lines().count(), total);
    assert!(export.starts_with("0 flood:0 node=0 announce input 1\n"));
    assert_eq!(run_scenario(&s).unwrap().0.export(), export);
}

#[test]
fn fuzz_summaries_are_reproducible() {
    let cfg = FuzzConfig {
        trials: 40,
        n_max: 7,
        f_max: 2,
        seed: 99,
    };
    let a = fuzz(cfg).unwrap();
    assert_eq!(a, fuzz(cfg).unwrap());
    assert_eq!(a.trials, 40);
    assert_eq!(a.failures, 0, "{}", a.to_porcelain());
    assert_eq!(a.to_porcelain(), fuzz(cfg).unwrap().to_porcelain());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_pure_functions_of_the_scenario(seed in any::<u64>()) {
        let families = family_pool(7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, s) = sample_scenario(&mut rng, 7, 2, &families);
        let (t1, o1) = run_scenario(&s).unwrap();
        let (t2, o2) = run_scenario(&s).unwrap();
        prop_assert_eq!(t1.export(), t2.export());
        prop_assert_eq!(&o1, &o2);
        let states = |t: &lbcast_core::simnet::Transcript| -> BTreeMap<NodeId, String> {
            t.final_states().iter().map(|(&u, st)| (u, format!("{:?}", st.reliable_inputs()))).collect()
        };
        prop_assert_eq!(states(&t1), states(&t2));
    }

    #[test]
    fn sampled_scenarios_satisfy_every_property(seed in any::<u64>()) {
        let families = family_pool(8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, s) = sample_scenario(&mut rng, 8, 2, &families);
        let (t, o) = run_scenario(&s).unwrap();
        prop_assert!(o.violations.is_empty(), "{}\n{:?}", s, o.violations);
        prop_assert_eq!(t.step_count(), 4 * s.graph.node_count());
        prop_assert_eq!(Scenario::parse(&s.to_text()).unwrap(), s);
    }
}
