use num_rational::BigRational;
use truthlab_core::exec::Sequential;
use truthlab_core::lowerbounds::*;
use truthlab_core::model::Budget;
use truthlab_core::scalar::rational;
use truthlab_core::scheduling::{makespan, min_work_vcg, optimal_makespan, TaskAllocation};
use truthlab_core::ExactScalar;

fn eps() -> BigRational {
    rational(1, 100)
}

fn s(r: BigRational) -> ExactScalar {
    ExactScalar::from_rational(r)
}

fn one_plus(e: &BigRational) -> BigRational {
    BigRational::from_integer(1.into()) + e
}

#[test]
fn deterministic_family_optima() {
    let family = deterministic_family(&eps()).unwrap();
    let budget = Budget::default();
    assert_eq!(
        optimal_makespan(&family.instance(0).unwrap(), &budget).unwrap().0,
        ExactScalar::from_integer(2)
    );
    assert_eq!(
        optimal_makespan(&family.instance(1).unwrap(), &budget).unwrap().0,
        s(one_plus(&eps()))
    );
    assert_eq!(family.profiles[0].differing_players(&family.profiles[1]), vec![0]);
}

#[test]
fn deterministic_family_min_worst_ratio_is_two_over_one_plus_eps() {
    let family = deterministic_family(&eps()).unwrap();
    let budget = Budget::default();
    let found = min_ratio_over_wmon_rules(&family, Objective::Worst, true, &budget).unwrap();
    let expected = s(BigRational::from_integer(2.into()) / one_plus(&eps()));
    assert_eq!(found.value, expected);
    assert!(family.link_violations(&found.rule).unwrap().is_empty());
    let ratios = family.ratios(&found.rule, &budget).unwrap();
    assert_eq!(ratios.into_iter().max().unwrap(), found.value);
    let brute = brute_force_search(&family, Objective::Worst, true, &budget, Sequential).unwrap();
    assert_eq!(brute, found);
}

#[test]
fn searches_without_monotonicity_reach_the_optimum() {
    let budget = Budget::default();
    let family = deterministic_family(&eps()).unwrap();
    let free = min_ratio_over_wmon_rules(&family, Objective::Worst, false, &budget).unwrap();
    assert_eq!(free.value, ExactScalar::one());
    let single = min_ratio_over_wmon_rules(&family.single_profile(), Objective::Worst, true, &budget).unwrap();
    assert_eq!(single.value, ExactScalar::one());
}

fn yao_closing(m: i64, e: &BigRational) -> ExactScalar {
    let m_r = BigRational::from_integer(m.into());
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    s((&m_r - &one) * (&one - e) / &m_r * &two / one_plus(e) + (&one - e) / &m_r)
}

#[test]
fn yao_family_shape() {
    let family = yao_family(3, &eps()).unwrap();
    let budget = Budget::default();
    let total: BigRational = family.weights().into_iter().sum();
    assert_eq!(total, rational(1, 1));
    for j in 0..3 {
        let inst = family.instance(j + 1).unwrap();
        let (opt, alloc) = optimal_makespan(&inst, &budget).unwrap();
        assert_eq!(opt, s(one_plus(&eps())));
        assert_eq!(alloc, diagonal_allocation(3, j));
        for i in 0..81 {
            let other = TaskAllocation::from_index(i, 3, 4);
            if other != alloc {
                assert!(makespan(&inst, &other).unwrap() >= ExactScalar::from_integer(2));
            }
        }
    }
}

#[test]
fn yao_min_expected_ratio() {
    let budget = Budget::default();
    for m in [2usize, 3] {
        let family = yao_family(m, &eps()).unwrap();
        let found = min_ratio_over_wmon_rules(&family, Objective::Expected, true, &budget).unwrap();
        assert!(found.value >= yao_closing(m as i64, &eps()), "m={m}: {}", found.value);
        assert!(family.link_violations(&found.rule).unwrap().is_empty());
    }
    let family = yao_family(2, &eps()).unwrap();
    let star = min_ratio_over_wmon_rules(&family, Objective::Expected, true, &budget).unwrap();
    let brute = brute_force_search(&family, Objective::Expected, true, &budget, Sequential).unwrap();
    assert_eq!(star, brute);
    let point = family.with_point_mass(0);
    let found = min_ratio_over_wmon_rules(&point, Objective::Expected, true, &budget).unwrap();
    assert_eq!(found.value, ExactScalar::one());
}

#[test]
fn bayes_search() {
    let budget = Budget::default();
    let family = bayes_family(&eps()).unwrap();
    let found = min_expected_ratio_over_bic_rules(&family, true, &budget).unwrap();
    let one = BigRational::from_integer(1.into());
    let delta = rational(1, 2) * (&one - &one / one_plus(&eps()));
    assert!(found.value >= s(rational(5, 4) - delta));
    let free = min_expected_ratio_over_bic_rules(&family, false, &budget).unwrap();
    assert_eq!(free.value, ExactScalar::one());
    for (name, rule) in bic_case_rules() {
        assert!(!evaluate_bic_rule(&family, &rule, &budget).unwrap().feasible, "{name}");
    }
    let t2 = vec![diagonal_allocation(2, 1); 4];
    let constant = evaluate_bic_rule(&family, &t2, &budget).unwrap();
    assert!(constant.feasible);
    let expected = s(rational(3, 4) + rational(1, 4) * BigRational::from_integer(2.into()) / one_plus(&eps()));
    assert_eq!(constant.expected_ratio, expected);
    assert_eq!(found.value, expected);
}

#[test]
fn marginal_bound_and_tight_point() {
    let budget = Budget::default();
    for m in [2usize, 3, 5] {
        for e in [rational(1, 10), rational(1, 100)] {
            let bound = max_shared_marginal(m, &e, &budget).unwrap();
            let cap = rational(1, m as i64) + &e;
            assert!(bound.value <= s(cap.clone()));
            assert_eq!(bound.value, s(cap.clone()));
            let one = BigRational::from_integer(1.into());
            assert_eq!(
                bound.point,
                vec![s(&one - &e * &e), s(rational(1, m as i64)), s(one), s(cap)]
            );
        }
    }
}

#[test]
fn smon_adversary_against_second_price() {
    let budget = Budget::default();
    for m in [2usize, 3] {
        let out = smon_adversary(|inst| Ok(min_work_vcg(inst).alternative), m, &budget).unwrap();
        assert_eq!(out.optimum, ExactScalar::one());
        assert!(out.ratio >= ExactScalar::from_integer(m as i64));
        assert!(out.witnesses.is_empty());
    }
}

#[test]
fn two_profile_family_admits_a_monotone_optimum() {
    // Dropping the mirrored profile lets an optimal rule stay monotone.
    let budget = Budget::default();
    let full = deterministic_family(&eps()).unwrap();
    let links: Vec<Link> = full
        .links
        .iter()
        .filter(|l| l.to == 1 || l.from == 1)
        .cloned()
        .collect();
    let reduced = BoundFamily::new(
        "two-profiles",
        eps(),
        full.domain.clone(),
        full.profiles[..2].to_vec(),
        None,
        links,
    )
    .unwrap();
    let found = min_ratio_over_wmon_rules(&reduced, Objective::Worst, true, &budget).unwrap();
    assert_eq!(found.value, ExactScalar::one());
}
