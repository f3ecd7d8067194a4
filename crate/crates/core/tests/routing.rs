use std::time::Instant;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use truthlab_core::model::{approximation_ratio, Budget, FiniteTypeDomain, MechanismOutcome, Profile, TypeEntry};
use truthlab_core::monotonicity::{check_ds_truthful, Direction};
use truthlab_core::routing::*;
use truthlab_core::{ExactScalar, Result};

fn eps() -> ExactScalar {
    ExactScalar::ratio(1, 100)
}

fn phi() -> ExactScalar {
    ExactScalar::golden_ratio()
}

#[test]
fn wmon_bounds_on_the_golden_pair() {
    let budget = Budget::default();
    let bounds = routing_wmon_bounds(&eps(), true, &budget).unwrap();
    let delta = &eps() / &phi();
    assert_eq!(bounds.worst_case.value, &phi() - &delta);
    let half = ExactScalar::ratio(1, 2);
    let rand_target = &(&(&ExactScalar::one() + &phi()) * &half) - &(&delta * &half);
    assert!(bounds.randomized.value >= rand_target, "{}", bounds.randomized.value);
    let free = routing_wmon_bounds(&eps(), false, &budget).unwrap();
    assert_eq!(free.worst_case.value, ExactScalar::one());
}

#[test]
fn golden_pair_trees_and_monotonicity() {
    let budget = Budget::default();
    let ins = golden_instance().unwrap();
    let ins3 = golden_shifted_instance(&eps()).unwrap();
    let (opt, via_ii) = optimal_workload_tree(&ins, &budget).unwrap();
    assert_eq!(opt, ExactScalar::one());
    let (opt3, via_iii) = optimal_workload_tree(&ins3, &budget).unwrap();
    assert_eq!(opt3, phi());
    let v = NodeWorkload {
        instance: ins.clone(),
        node: 0,
    };
    let v3 = NodeWorkload {
        instance: ins3.clone(),
        node: 0,
    };
    let (lhs, rhs) = truthlab_core::monotonicity::wmon_terms(0, &v, &v3, &via_ii, &via_iii).unwrap();
    assert!(lhs > rhs, "the optimal pair must violate monotonicity");
    let (lhs, rhs) = truthlab_core::monotonicity::wmon_terms(0, &v, &v3, &via_ii, &via_ii).unwrap();
    assert!(lhs <= rhs);
    let ratio = approximation_ratio(&workload(&ins3, &via_ii).unwrap(), &opt3);
    assert_eq!(ratio, &phi() - &(&eps() / &phi()));
}

#[test]
fn star_ratio_is_k_over_one_plus_eps() {
    let budget = Budget::default();
    for k in [3usize, 4, 5] {
        let inst = star_instance(k, &eps()).unwrap();
        let (tree, _) = cost_min_tree(&inst, &budget).unwrap();
        let (opt, _) = optimal_workload_tree(&inst, &budget).unwrap();
        let ratio = approximation_ratio(&workload(&inst, &tree).unwrap(), &opt);
        assert_eq!(
            ratio,
            &ExactScalar::from_integer(k as i64) / &(&ExactScalar::one() + &eps())
        );
    }
    let inst = star_single_dim_instance(&eps()).unwrap();
    assert!(inst.is_single_dimensional());
    let (tree, _) = cost_min_tree(&inst, &budget).unwrap();
    let (opt, _) = optimal_workload_tree(&inst, &budget).unwrap();
    assert_eq!(workload(&inst, &tree).unwrap(), ExactScalar::from_integer(3));
    assert_eq!(opt, &ExactScalar::one() + &eps());
}

#[test]
fn cost_min_workload_within_sources_times_optimum() {
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let sources = 1 + (rand::Rng::gen_range(&mut rng, 0..5usize));
        let inst = random_instance(&mut rng, sources, 5, 3);
        let (tree, _) = cost_min_tree(&inst, &budget).unwrap();
        let (opt, _) = optimal_workload_tree(&inst, &budget).unwrap();
        let w = workload(&inst, &tree).unwrap();
        assert!(w <= &ExactScalar::from_integer(sources as i64) * &opt, "{w} vs {opt}");
    }
}

#[test]
fn cost_min_payments_are_truthful() {
    let budget = Budget::default();
    let base = three_source_star(&eps()).unwrap();
    let d = base.dest();
    let types: Vec<Vec<TypeEntry<NodeWorkload>>> = base
        .sources()
        .map(|node| {
            [ExactScalar::zero(), ExactScalar::one(), ExactScalar::from_integer(3)]
                .into_iter()
                .enumerate()
                .map(|(t, c)| {
                    let costs: Vec<(usize, ExactScalar)> = base
                        .out_links(node)
                        .iter()
                        .map(|(to, old)| (*to, if *to == d { c.clone() } else { old.clone() }))
                        .collect();
                    let instance = base.with_link_costs(node, &costs).unwrap();
                    TypeEntry::new(format!("t{t}"), NodeWorkload { instance, node })
                })
                .collect()
        })
        .collect();
    let domain = FiniteTypeDomain::new(types).unwrap();
    let mechanism = |profile: &Profile| -> Result<MechanismOutcome<RoutingTree>> {
        let mut inst = base.clone();
        for node in inst.sources().collect::<Vec<_>>() {
            let v = domain.valuation_in(profile, node);
            inst = inst.with_link_costs(node, v.instance.out_links(node))?;
        }
        let (_, mut outcome) = cost_min_tree(&inst, &budget)?;
        outcome.payments.truncate(d);
        Ok(outcome)
    };
    let report = check_ds_truthful(&mechanism, &domain, Direction::CostMinimizing).unwrap();
    assert!(report.is_empty(), "{report:?}");
}

#[test]
fn lex_optimal_is_packet_monotone_on_small_graphs() {
    let budget = Budget::default();
    let topologies = small_topologies(3, 2);
    assert!(!topologies.is_empty());
    let grid: Vec<ExactScalar> = (0..=16).map(|q| ExactScalar::ratio(q, 4)).collect();
    let start = Instant::now();
    let failures = packet_monotonicity_sweep(&topologies, 3, &grid, &budget, |inst, trees| {
        Ok(lex_optimal_among(inst, trees))
    })
    .unwrap();
    assert!(failures.is_empty(), "{:?}", failures.first());
    eprintln!("sweep over {} topologies took {:?}", topologies.len(), start.elapsed());
}

#[test]
fn sweep_catches_a_workload_maximizer() {
    let budget = Budget::default();
    let topologies = small_topologies(2, 2);
    let grid: Vec<ExactScalar> = (0..=4).map(ExactScalar::from_integer).collect();
    let failures = packet_monotonicity_sweep(&topologies, 2, &grid, &budget, |inst, trees| {
        let mut best = trees[0].clone();
        for t in trees {
            if total_cost(inst, t)? > total_cost(inst, &best)? {
                best = t.clone();
            }
        }
        Ok(best)
    })
    .unwrap();
    assert!(!failures.is_empty());
}

#[test]
fn lex_optimal_rejects_link_dependent_costs() {
    let inst = golden_instance().unwrap();
    assert!(lex_optimal_mechanism(&inst, &Budget::default()).is_err());
    let single = star_single_dim_instance(&eps()).unwrap();
    let tree = lex_optimal_mechanism(&single, &Budget::default()).unwrap();
    let (opt, _) = optimal_workload_tree(&single, &Budget::default()).unwrap();
    assert_eq!(workload(&single, &tree).unwrap(), opt);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn workload_bounds(seed in any::<u64>(), sources in 1usize..5) {
        let budget = Budget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, sources, 4, 3);
        let (opt, _) = optimal_workload_tree(&inst, &budget).unwrap();
        for tree in enumerate_trees(&inst, &budget).unwrap() {
            let loads = node_workloads(&inst, &tree).unwrap();
            let w = workload(&inst, &tree).unwrap();
            let total = total_cost(&inst, &tree).unwrap();
            prop_assert!(w >= opt.clone());
            prop_assert!(total >= w.clone());
            prop_assert!(total <= &ExactScalar::from_integer(sources as i64) * &w);
            prop_assert!(loads.iter().all(|l| !l.is_negative()));
            let k = packets_through(&inst, &tree).unwrap();
            for i in inst.sources() {
                prop_assert!(k[i] >= inst.traffic(i).clone());
            }
        }
    }
}
