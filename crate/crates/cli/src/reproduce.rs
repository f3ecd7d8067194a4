//! Bound reproduction: each id runs one exhaustive search or demonstrator
//! and compares its exact value against the closing expression.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use truthlab_core::fairness::{
    envy_bound_demo, max_min_impossibility_demo, min_max_value, min_max_vcg, random_additive,
};
use truthlab_core::lowerbounds::{
    bayes_family, bic_case_rules, deterministic_family, evaluate_bic_rule, max_shared_marginal,
    min_expected_ratio_over_bic_rules, min_ratio_over_wmon_rules, smon_adversary, yao_family, Objective,
};
use truthlab_core::model::{approximation_ratio, Budget};
use truthlab_core::routing::{
    cost_min_tree, optimal_workload_tree, random_instance as random_routing, routing_wmon_bounds, star_instance,
    workload, RoutingInstance, RoutingPairResult,
};
use truthlab_core::scalar::format_rational;
use truthlab_core::scheduling::{
    expected_makespan, min_work_vcg, nr_randomized, nr_task_deviations, optimal_makespan,
    random_instance as random_scheduling, CoinSequence,
};
use truthlab_core::{BigRational, ExactScalar};

use crate::report::{Relation, Report};

pub const BOUND_IDS: [&str; 12] = [
    "thm2",
    "thm3",
    "thm4",
    "thm5",
    "thm6",
    "nr-upper",
    "routing-n",
    "routing-phi",
    "routing-rand",
    "maxmin",
    "minmax-vcg",
    "envy",
];

/// Optional overrides; unset fields take per-bound defaults, which are
/// echoed in the report.
#[derive(Debug, Clone, Default)]
pub struct BoundParams {
    pub m: Option<usize>,
    pub epsilon: Option<BigRational>,
    pub c: Option<BigRational>,
    pub seed: Option<u64>,
    pub instances: Option<usize>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn scalar(r: &BigRational) -> ExactScalar {
    ExactScalar::from_rational(r.clone())
}

struct Resolved {
    m: usize,
    epsilon: BigRational,
    c: BigRational,
    seed: u64,
    instances: usize,
    echo: BTreeMap<String, String>,
}

fn resolve(id: &str, p: &BoundParams) -> Resolved {
    let default_m = match id {
        "routing-n" | "minmax-vcg" => 3,
        _ => 2,
    };
    let default_instances = match id {
        "minmax-vcg" => 500,
        _ => 200,
    };
    let r = Resolved {
        m: p.m.unwrap_or(default_m),
        epsilon: p.epsilon.clone().unwrap_or_else(|| rat(1, 100)),
        c: p.c.clone().unwrap_or_else(|| rat(10, 1)),
        seed: p.seed.unwrap_or(0),
        instances: p.instances.unwrap_or(default_instances),
        echo: BTreeMap::new(),
    };
    let mut echo = BTreeMap::new();
    let uses_m = matches!(id, "thm3" | "thm4" | "thm5" | "nr-upper" | "routing-n" | "minmax-vcg");
    let uses_eps = !matches!(id, "thm3" | "nr-upper" | "minmax-vcg");
    let suite = matches!(id, "nr-upper" | "routing-n" | "minmax-vcg");
    if uses_m {
        echo.insert("m".into(), r.m.to_string());
    }
    if uses_eps {
        echo.insert("epsilon".into(), format_rational(&r.epsilon));
    }
    if id == "maxmin" {
        echo.insert("c".into(), format_rational(&r.c));
    }
    echo.insert("seed".into(), r.seed.to_string());
    if suite {
        echo.insert("instances".into(), r.instances.to_string());
    }
    Resolved { echo, ..r }
}

/// Runs one bound; failures become `ERROR` reports.
pub fn reproduce(id: &str, params: &BoundParams, budget: &Budget) -> Report {
    let r = resolve(id, params);
    let echo = r.echo.clone();
    match run_bound(id, &r, budget) {
        Ok(report) => report,
        Err(err) => Report::failed(id, echo, format!("{err:#}")),
    }
}

/// `all` expands to every id in the fixed order.
pub fn expand(id: &str) -> Vec<&str> {
    if id == "all" {
        BOUND_IDS.to_vec()
    } else {
        vec![id]
    }
}

fn run_bound(id: &str, r: &Resolved, budget: &Budget) -> Result<Report> {
    let eps = &r.epsilon;
    let one = rat(1, 1);
    let one_plus = &one + eps;
    let two_over = scalar(&(rat(2, 1) / &one_plus));
    let echo = r.echo.clone();
    let report = match id {
        "thm2" => {
            let family = deterministic_family(eps)?;
            let found = min_ratio_over_wmon_rules(&family, Objective::Worst, true, budget)?;
            let free = min_ratio_over_wmon_rules(&family, Objective::Worst, false, budget)?;
            let cert = json!({
                "profiles": family.profiles.len(),
                "rule": found.rule,
                "ratios": found.ratios,
                "unconstrained_minimum": free.value,
            });
            Report::compared(id, echo, &found.value, Relation::AtLeast, &two_over, cert)
        }
        "thm3" => {
            let out = smon_adversary(|inst| Ok(min_work_vcg(inst).alternative), r.m, budget)?;
            let bound = ExactScalar::from_integer(r.m as i64);
            let cert = json!({
                "optimum": out.optimum,
                "makespan": out.makespan,
                "heavy_machine": out.heavy_machine,
                "allocation": out.allocation,
                "smon_witnesses": out.witnesses,
            });
            Report::compared(id, echo, &out.ratio, Relation::AtLeast, &bound, cert)
        }
        "thm4" => {
            let family = yao_family(r.m, eps)?;
            let found = min_ratio_over_wmon_rules(&family, Objective::Expected, true, budget)?;
            let m = rat(r.m as i64, 1);
            let closing = (&m - &one) * (&one - eps) / &m * rat(2, 1) / &one_plus + (&one - eps) / &m;
            let nominal = rat(2, 1) - &one / &m;
            let cert = json!({
                "nominal_bound": format_rational(&nominal),
                "delta": format_rational(&(&nominal - &closing)),
                "rule": found.rule,
                "ratios": found.ratios,
            });
            Report::compared(id, echo, &found.value, Relation::AtLeast, &scalar(&closing), cert)
        }
        "thm5" => {
            let bound = max_shared_marginal(r.m, eps, budget)?;
            let q = bound.value.clone();
            let computed = &q + &(&(&ExactScalar::one() - &q) * &two_over);
            let m = rat(r.m as i64, 1);
            let cap = &one / &m + eps;
            let closing = scalar(&cap) + (ExactScalar::one() - scalar(&cap)) * two_over.clone();
            let nominal = scalar(&(rat(2, 1) - &one / &m));
            let cert = json!({
                "max_marginal": q,
                "marginal_cap": format_rational(&cap),
                "extreme_point": bound.point,
                "nominal_bound": nominal,
                "delta": &nominal - &closing,
            });
            Report::compared(id, echo, &computed, Relation::AtLeast, &closing, cert)
        }
        "thm6" => {
            let family = bayes_family(eps)?;
            let found = min_expected_ratio_over_bic_rules(&family, true, budget)?;
            let free = min_expected_ratio_over_bic_rules(&family, false, budget)?;
            let delta = rat(1, 2) * (&one - &one / &one_plus);
            let closing = scalar(&(rat(5, 4) - &delta));
            let mut cases = serde_json::Map::new();
            for (name, rule) in bic_case_rules() {
                let eval = evaluate_bic_rule(&family, &rule, budget)?;
                cases.insert(
                    name.to_string(),
                    json!({ "feasible": eval.feasible, "terms": eval.terms }),
                );
            }
            let cert = json!({
                "rules_searched": 4096,
                "rule": found.rule,
                "ratios": found.ratios,
                "unconstrained_minimum": free.value,
                "delta": format_rational(&delta),
                "case_rules": cases,
            });
            Report::compared(id, echo, &found.value, Relation::AtLeast, &closing, cert)
        }
        "nr-upper" => nr_upper(r, budget)?,
        "routing-n" => routing_n(r, budget)?,
        "routing-phi" | "routing-rand" => {
            let bounds = routing_wmon_bounds(&scalar(eps), true, budget)?;
            let phi = ExactScalar::golden_ratio();
            let delta = &scalar(eps) / &phi;
            let half = ExactScalar::ratio(1, 2);
            let (found, closing) = if id == "routing-phi" {
                (&bounds.worst_case, &phi - &delta)
            } else {
                (
                    &bounds.randomized,
                    &(&(&ExactScalar::one() + &phi) * &half) - &(&delta * &half),
                )
            };
            let cert = routing_certificate(found)?;
            Report::compared(id, echo, &found.value, Relation::AtLeast, &closing, cert)
        }
        "maxmin" => {
            let demo = max_min_impossibility_demo(&r.c, eps, budget)?;
            let ratio = |opt: &ExactScalar, v: &ExactScalar| {
                if v.is_zero() {
                    ExactScalar::infinity()
                } else {
                    opt / v
                }
            };
            let computed = demo
                .pairs
                .iter()
                .filter(|p| p.monotone)
                .map(|p| {
                    ratio(&demo.original_optimum, &p.original_value).max(ratio(&demo.altered_optimum, &p.altered_value))
                })
                .min()
                .unwrap_or_else(ExactScalar::infinity);
            let approximating: Vec<_> = demo.approximating_pairs().collect();
            let cert = json!({
                "original_optimum": demo.original_optimum,
                "altered_optimum": demo.altered_optimum,
                "approximating_pairs": approximating,
                "every_approximating_pair_violates_wmon": demo.certifies(),
            });
            Report::compared(id, echo, &computed, Relation::Greater, &scalar(&r.c), cert)
        }
        "minmax-vcg" => minmax_vcg(r, budget)?,
        "envy" => {
            let demo = envy_bound_demo(eps, budget)?;
            let closing = &demo.altered_alpha - &scalar(eps);
            let forced: Vec<_> = demo.cases.iter().filter(|c| c.deviator.is_some()).collect();
            let cert = json!({
                "original_alpha": demo.original_alpha,
                "original_optimum": demo.original_optimum,
                "altered_alpha": demo.altered_alpha,
                "altered_optimum": demo.altered_optimum,
                "split_cases": forced,
            });
            Report::compared(id, echo, &demo.min_excess, Relation::AtLeast, &closing, cert)
        }
        other => bail!(
            "unknown bound id {other:?}; expected one of {} or all",
            BOUND_IDS.join(", ")
        ),
    };
    Ok(report)
}

fn routing_certificate(found: &RoutingPairResult) -> Result<serde_json::Value> {
    let ins = truthlab_core::routing::golden_instance()?;
    Ok(json!({
        "tree_on_first_instance": found.trees.0.to_named(&ins),
        "tree_on_second_instance": found.trees.1.to_named(&ins),
        "ratios": [found.ratios.0, found.ratios.1],
    }))
}

/// Per-task deviation grid for the coin-fixed mechanism.
pub fn deviation_grid() -> Vec<ExactScalar> {
    vec![
        ExactScalar::ratio(1, 2),
        ExactScalar::one(),
        ExactScalar::from_integer(3),
        ExactScalar::from_integer(6),
        ExactScalar::from_integer(11),
    ]
}

fn nr_upper(r: &Resolved, budget: &Budget) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let grid = deviation_grid();
    let mut worst = ExactScalar::zero();
    let mut worst_instance = None;
    let mut deviations = 0usize;
    for _ in 0..r.instances {
        let tasks = rng.gen_range(1..=6);
        let inst = random_scheduling(&mut rng, r.m, tasks, 1, 10);
        let dist = nr_randomized(&inst, budget)?;
        let expected = expected_makespan(&inst, &dist)?;
        let (opt, _) = optimal_makespan(&inst, budget)?;
        let ratio = approximation_ratio(&expected, &opt);
        // Each task's decision reads only its own coin, so the all-zero and
        // all-one sequences cover every (task, coin) pair.
        for coins in [CoinSequence(vec![false; tasks]), CoinSequence(vec![true; tasks])] {
            deviations += nr_task_deviations(&inst, &coins, &grid)?.len();
        }
        if ratio > worst {
            worst = ratio;
            worst_instance = Some(inst);
        }
    }
    let bound = ExactScalar::ratio(7 * r.m as i64, 8);
    let cert = json!({
        "worst_instance": worst_instance,
        "deviation_grid": grid,
        "profitable_deviations": deviations,
    });
    Ok(Report::compared(
        "nr-upper",
        r.echo.clone(),
        &worst,
        Relation::AtMost,
        &bound,
        cert,
    ))
}

fn routing_n(r: &Resolved, budget: &Budget) -> Result<Report> {
    let eps = scalar(&r.epsilon);
    let inst = star_instance(r.m, &eps)?;
    let (tree, _) = cost_min_tree(&inst, budget)?;
    let (opt, _) = optimal_workload_tree(&inst, budget)?;
    let ratio = approximation_ratio(&workload(&inst, &tree)?, &opt);
    let expected = &ExactScalar::from_integer(r.m as i64) / &(&ExactScalar::one() + &eps);
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut worst_fraction = ExactScalar::zero();
    let mut failures = 0usize;
    for _ in 0..r.instances {
        let sources = rng.gen_range(1..=5);
        let random: RoutingInstance = random_routing(&mut rng, sources, 5, 3);
        let (t, _) = cost_min_tree(&random, budget)?;
        let (o, _) = optimal_workload_tree(&random, budget)?;
        let w = workload(&random, &t)?;
        let limit = &ExactScalar::from_integer(sources as i64) * &o;
        if w > limit {
            failures += 1;
        }
        let fraction = approximation_ratio(&w, &limit);
        if fraction > worst_fraction && fraction.is_finite() {
            worst_fraction = fraction;
        }
    }
    let cert = json!({
        "cost_min_tree": tree.to_named(&inst),
        "optimum": opt,
        "random_instances": r.instances,
        "random_instances_above_n_times_optimum": failures,
        "largest_workload_over_n_times_optimum": worst_fraction,
    });
    Ok(Report::compared(
        "routing-n",
        r.echo.clone(),
        &ratio,
        Relation::Equal,
        &expected,
        cert,
    ))
}

fn minmax_vcg(r: &Resolved, budget: &Budget) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut worst = ExactScalar::zero();
    for _ in 0..r.instances {
        let items = rng.gen_range(1..=5);
        let inst = random_additive(&mut rng, r.m, items, 0, 10);
        let (opt, _) = min_max_value(&inst, budget)?;
        let alloc = min_max_vcg(&inst, budget)?;
        let max = inst.values(&alloc)?.into_iter().max().unwrap_or_default();
        let ratio = approximation_ratio(&max, &opt);
        if ratio > worst {
            worst = ratio;
        }
    }
    let bound = ExactScalar::from_integer(r.m as i64);
    Ok(Report::compared(
        "minmax-vcg",
        r.echo.clone(),
        &worst,
        Relation::AtMost,
        &bound,
        json!({ "instances": r.instances }),
    ))
}
