use num_rational::BigRational;
use proptest::prelude::*;
use truthlab_core::lowerbounds::deterministic_family;
use truthlab_core::model::{
    AdditiveValuation, Budget, DiscreteDistribution, FiniteTypeDomain, Profile, TabulatedRule, TypeEntry,
};
use truthlab_core::monotonicity::*;
use truthlab_core::scheduling::{instance_from_profile, nr_randomized, optimal_makespan, TaskAllocation};
use truthlab_core::ExactScalar;

fn s(v: i64) -> ExactScalar {
    ExactScalar::from_integer(v)
}

fn makespan_domain() -> FiniteTypeDomain<AdditiveValuation> {
    deterministic_family(&BigRational::new(1.into(), 100.into()))
        .unwrap()
        .domain
}

#[test]
fn optimal_makespan_rule_violates_wmon() {
    let domain = makespan_domain();
    let budget = Budget::default();
    let rule = |p: &Profile| Ok(optimal_makespan(&instance_from_profile(&domain, p)?, &budget)?.1);
    let violations = check_wmon(&rule, &domain, Direction::CostMinimizing).unwrap();
    assert!(!violations.is_empty());
    for v in &violations {
        assert!(v.lhs > v.rhs);
        assert_eq!(v.profile.differing_players(&v.deviation), vec![v.player]);
    }
    assert!(!payments_exist(&rule, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_feasible());
}

#[test]
fn smon_is_stricter_than_wmon() {
    let domain = makespan_domain();
    let constant = |_: &Profile| Ok(TaskAllocation::new(vec![0, 1, 1]));
    assert!(check_wmon(&constant, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_empty());
    assert!(check_smon(&constant, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_empty());
    // A rule that swaps outcomes on a tie is WMON but not SMON.
    let flat = AdditiveValuation(vec![s(1), s(1)]);
    let tie = FiniteTypeDomain::new(vec![
        vec![TypeEntry::new("a", flat.clone()), TypeEntry::new("b", flat)],
        vec![TypeEntry::new("c", AdditiveValuation(vec![s(2), s(2)]))],
    ])
    .unwrap();
    let swap = |p: &Profile| {
        Ok(TaskAllocation::new(if p.type_of(0) == 0 {
            vec![0, 1]
        } else {
            vec![1, 0]
        }))
    };
    assert!(check_wmon(&swap, &tie, Direction::CostMinimizing).unwrap().is_empty());
    assert_eq!(check_smon(&swap, &tie, Direction::CostMinimizing).unwrap().len(), 2);
}

#[test]
fn randomized_partition_mechanism_is_extended_monotone() {
    let domain = FiniteTypeDomain::new(vec![
        vec![
            TypeEntry::new("a", AdditiveValuation(vec![s(1), s(4)])),
            TypeEntry::new("b", AdditiveValuation(vec![s(3), s(2)])),
        ],
        vec![
            TypeEntry::new("c", AdditiveValuation(vec![s(2), s(2)])),
            TypeEntry::new("d", AdditiveValuation(vec![s(5), s(1)])),
        ],
    ])
    .unwrap();
    let budget = Budget::default();
    let rule = |p: &Profile| {
        let inst = instance_from_profile(&domain, p)?;
        let dist = nr_randomized(&inst, &budget)?.map(|(_, out)| out.alternative.clone());
        MarginalAssignment::from_distribution(&dist, inst.machines())
    };
    assert!(check_extended_wmon(&rule, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_empty());
}

#[test]
fn bayesian_two_cycle_on_a_product_prior() {
    let domain = makespan_domain();
    let prior = DiscreteDistribution::uniform(domain.profiles()).unwrap();
    let keep = |_: &Profile| Ok(TaskAllocation::new(vec![1, 1, 1]));
    assert!(bayes_2cycle_feasible(&keep, &domain, &prior, 0, 0, 1, Direction::CostMinimizing).unwrap());
    // Player 0 takes every task only under its costlier type.
    let perverse = |p: &Profile| {
        Ok(TaskAllocation::new(if p.type_of(0) == 0 {
            vec![0, 0, 0]
        } else {
            vec![1, 1, 1]
        }))
    };
    assert!(!bayes_2cycle_feasible(&perverse, &domain, &prior, 0, 0, 1, Direction::CostMinimizing).unwrap());
}

fn random_rule(choices: &[usize], profiles: &[Profile]) -> TabulatedRule<TaskAllocation> {
    TabulatedRule::new(
        profiles
            .iter()
            .zip(choices)
            .map(|(p, &c)| (p.clone(), TaskAllocation::from_index(c, 2, 2))),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // With two types per player every cycle in the type graph is a 2-cycle,
    // so payments exist exactly when weak monotonicity holds.
    #[test]
    fn two_type_payments_iff_wmon(
        costs in proptest::collection::vec(0i64..=6, 8),
        choices in proptest::collection::vec(0usize..4, 4),
        cost_side in any::<bool>(),
    ) {
        let val = |k: usize| AdditiveValuation(vec![s(costs[2 * k]), s(costs[2 * k + 1])]);
        let domain = FiniteTypeDomain::new(vec![
            vec![TypeEntry::new("a", val(0)), TypeEntry::new("b", val(1))],
            vec![TypeEntry::new("c", val(2)), TypeEntry::new("d", val(3))],
        ]).unwrap();
        let rule = random_rule(&choices, &domain.profiles());
        let dir = if cost_side { Direction::CostMinimizing } else { Direction::ValueMaximizing };
        let wmon = check_wmon(&rule, &domain, dir).unwrap().is_empty();
        let solution = payments_exist(&rule, &domain, dir).unwrap();
        prop_assert_eq!(wmon, solution.is_feasible());
        if let PaymentSolution::Feasible(payments) = solution {
            let mech = |p: &Profile| Ok(truthlab_core::model::MechanismOutcome {
                alternative: rule.apply(p),
                payments: payments[p].clone(),
            });
            let report = check_ds_truthful(&mech, &domain, dir).unwrap();
            prop_assert!(report.utility.is_empty());
        }
    }

    #[test]
    fn marginals_of_point_masses_are_indicators(index in 0usize..16) {
        let alloc = TaskAllocation::from_index(index, 2, 4);
        let marg = MarginalAssignment::from_distribution(&DiscreteDistribution::point(alloc.clone()), 2).unwrap();
        for (task, &m) in alloc.assignment.iter().enumerate() {
            prop_assert_eq!(marg.probability(m, task), &BigRational::from_integer(1.into()));
        }
    }
}
