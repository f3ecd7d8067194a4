use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use truthlab_core::model::{AdditiveValuation, Budget, FiniteTypeDomain, Profile, TypeEntry};
use truthlab_core::monotonicity::{check_ds_truthful, check_wmon, payments_exist, Direction};
use truthlab_core::scheduling::*;
use truthlab_core::ExactScalar;

fn budget() -> Budget {
    Budget::default()
}

/// Independent optimum: recursive search over machines per task.
fn oracle_makespan(inst: &SchedulingInstance) -> ExactScalar {
    fn go(inst: &SchedulingInstance, task: usize, loads: &mut Vec<ExactScalar>) -> ExactScalar {
        if task == inst.tasks() {
            return loads.iter().max().cloned().unwrap_or_default();
        }
        let mut best: Option<ExactScalar> = None;
        for m in 0..inst.machines() {
            let before = loads[m].clone();
            loads[m] = &before + inst.cost(m, task);
            let v = go(inst, task + 1, loads);
            loads[m] = before;
            best = Some(best.map_or(v.clone(), |b| b.min(v)));
        }
        best.expect("at least one machine")
    }
    go(inst, 0, &mut vec![ExactScalar::zero(); inst.machines()])
}

#[test]
fn one_task_partition_examples() {
    let inst = SchedulingInstance::from_integers(&[&[1], &[2]]).unwrap();
    let out = nr_sub_mechanism(&inst, &"0".parse().unwrap()).unwrap();
    assert_eq!(out.alternative.assignment, vec![0]);
    assert_eq!(out.payments[0], ExactScalar::ratio(8, 3));
    // The favoured side loses: 2 > (4/3)·1, and machine 0 is paid (3/4)·2.
    let out = nr_sub_mechanism(&inst, &"1".parse().unwrap()).unwrap();
    assert_eq!(out.alternative.assignment, vec![0]);
    assert_eq!(out.payments[0], ExactScalar::ratio(3, 2));
    let vcg = min_work_vcg(&SchedulingInstance::from_integers(&[&[1], &[5]]).unwrap());
    assert_eq!(vcg.payments[0], ExactScalar::from_integer(5));
}

#[test]
fn randomized_within_seven_m_over_eight() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let m = if rng.gen_bool(0.5) { 2 } else { 4 };
        let n = rng.gen_range(1..=5);
        let inst = random_instance(&mut rng, m, n, 1, 10);
        let dist = nr_randomized(&inst, &budget()).unwrap();
        let expected = expected_makespan(&inst, &dist).unwrap();
        let (opt, _) = optimal_makespan(&inst, &budget()).unwrap();
        let bound = &ExactScalar::ratio(7 * m as i64, 8) * &opt;
        assert!(expected <= bound, "{expected} > {bound}");
    }
}

#[test]
fn collapse_decomposition_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=4);
        let a = random_instance(&mut rng, m, n, 1, 10);
        let b = collapse_to_halves(&a).unwrap();
        let m_a = expected_makespan(&a, &nr_randomized(&a, &budget()).unwrap()).unwrap();
        let m_b = expected_makespan(&b, &nr_randomized(&b, &budget()).unwrap()).unwrap();
        let (o_a, _) = optimal_makespan(&a, &budget()).unwrap();
        let (o_b, _) = optimal_makespan(&b, &budget()).unwrap();
        assert!(m_a <= m_b);
        assert!(m_b <= &ExactScalar::ratio(7, 4) * &o_b);
        assert!(&ExactScalar::ratio(7, 4) * &o_b <= &ExactScalar::ratio(7 * m as i64, 8) * &o_a);
    }
}

#[test]
fn coin_fixed_mechanisms_resist_single_entry_misreports() {
    let grid: Vec<ExactScalar> = [1, 2, 3, 5, 8, 13].map(ExactScalar::from_integer).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=3);
        let inst = random_instance(&mut rng, m, n, 1, 10);
        for i in 0..1 << n {
            let coins = CoinSequence::from_index(i, n);
            assert!(nr_task_deviations(&inst, &coins, &grid).unwrap().is_empty());
        }
    }
}

fn machine_domain(rows: &[&[&[i64]]]) -> FiniteTypeDomain<AdditiveValuation> {
    FiniteTypeDomain::new(
        rows.iter()
            .map(|types| {
                types
                    .iter()
                    .enumerate()
                    .map(|(k, row)| {
                        TypeEntry::new(
                            format!("t{k}"),
                            AdditiveValuation(row.iter().map(|&c| ExactScalar::from_integer(c)).collect()),
                        )
                    })
                    .collect()
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn coin_fixed_mechanism_is_truthful_on_a_type_grid() {
    let domain = machine_domain(&[&[&[1, 4], &[3, 2], &[6, 6]], &[&[2, 2], &[5, 1]], &[&[3, 3], &[1, 7]]]);
    for coins in ["00", "01", "10", "11"] {
        let coins: CoinSequence = coins.parse().unwrap();
        let mech = |p: &Profile| {
            let inst = instance_from_profile(&domain, p)?;
            nr_sub_mechanism(&inst, &coins)
        };
        let report = check_ds_truthful(&mech, &domain, Direction::CostMinimizing).unwrap();
        assert!(report.is_empty(), "{coins}: {report:?}");
    }
}

#[test]
fn second_price_is_truthful_and_monotone() {
    let domain = machine_domain(&[&[&[1, 4], &[3, 2]], &[&[2, 2], &[5, 1]]]);
    let mech = |p: &Profile| Ok(min_work_vcg(&instance_from_profile(&domain, p)?));
    assert!(check_ds_truthful(&mech, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_empty());
    let rule = |p: &Profile| Ok(min_work_vcg(&instance_from_profile(&domain, p)?).alternative);
    assert!(check_wmon(&rule, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_empty());
    assert!(payments_exist(&rule, &domain, Direction::CostMinimizing)
        .unwrap()
        .is_feasible());
}

fn instance_strategy() -> impl Strategy<Value = SchedulingInstance> {
    (1usize..=3, 0usize..=4)
        .prop_flat_map(|(m, n)| proptest::collection::vec(proptest::collection::vec(0i64..=9, n), m))
        .prop_map(|rows| {
            let tasks = rows[0].len();
            SchedulingInstance::with_tasks(
                rows.iter()
                    .map(|r| r.iter().map(|&c| ExactScalar::from_integer(c)).collect())
                    .collect(),
                tasks,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn optimum_matches_oracle_and_bounds(inst in instance_strategy()) {
        let (opt, alloc) = optimal_makespan(&inst, &budget()).unwrap();
        prop_assert_eq!(opt.clone(), oracle_makespan(&inst));
        prop_assert_eq!(makespan(&inst, &alloc).unwrap(), opt.clone());
        let total: ExactScalar = (0..inst.tasks())
            .map(|t| inst.column(t).into_iter().min().cloned().unwrap())
            .sum();
        // OPT lies between the average of the cheapest costs and their sum.
        prop_assert!(opt <= total);
        prop_assert!(&opt * &ExactScalar::from_integer(inst.machines() as i64) >= total);
        let vcg = min_work_vcg(&inst);
        let ratio = makespan_ratio(&inst, &vcg.alternative, &budget()).unwrap();
        prop_assert!(ratio <= ExactScalar::from_integer(inst.machines() as i64));
    }

    #[test]
    fn loads_sum_to_assigned_costs(inst in instance_strategy(), pick in any::<u64>()) {
        let count = (inst.machines() as u64).pow(inst.tasks() as u32);
        let alloc = TaskAllocation::from_index((pick % count) as usize, inst.machines(), inst.tasks());
        let loads = machine_loads(&inst, &alloc).unwrap();
        let total: ExactScalar = loads.iter().sum();
        let direct: ExactScalar = alloc.assignment.iter().enumerate().map(|(t, &m)| inst.cost(m, t).clone()).sum();
        prop_assert_eq!(total, direct);
        prop_assert_eq!(makespan(&inst, &alloc).unwrap(), loads.into_iter().max().unwrap_or_default());
    }
}
