//! Single mechanism runs on an instance file. Each report compares the
//! outcome's objective with the instance optimum.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Result};
use serde_json::json;
use truthlab_core::fairness::{min_max_value, min_max_vcg};
use truthlab_core::model::Budget;
use truthlab_core::routing::{cost_min_tree, lex_optimal_mechanism, optimal_workload_tree, workload, RoutingInstance};
use truthlab_core::scheduling::{
    expected_makespan, makespan, min_work_vcg, nr_randomized, nr_sub_mechanism, optimal_makespan, CoinSequence,
    SchedulingInstance,
};
use truthlab_core::ExactScalar;

use crate::input::{load_instance, Instance};
use crate::report::{Relation, Report};

pub const MECHANISMS: [&str; 7] = [
    "nr-randomized",
    "minwork-vcg",
    "opt-lex",
    "costmin-tree",
    "lex-optimal",
    "optimal-tree",
    "minmax-vcg",
];

/// How the randomized mechanism is resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoinMode {
    Fixed(CoinSequence),
    Expected,
}

pub fn run(mechanism: &str, instance_path: &Path, coins: Option<CoinMode>, budget: &Budget) -> Report {
    let mut params = BTreeMap::new();
    params.insert("mechanism".to_string(), mechanism.to_string());
    params.insert("instance".to_string(), instance_path.display().to_string());
    match &coins {
        Some(CoinMode::Fixed(c)) => params.insert("coins".to_string(), c.to_string()),
        Some(CoinMode::Expected) => params.insert("coins".to_string(), "expected".to_string()),
        None => None,
    };
    let id = format!("run:{mechanism}");
    match load_instance(instance_path).and_then(|inst| run_instance(mechanism, &inst, coins.as_ref(), budget)) {
        Ok((computed, relation, bound, certificate)) => {
            Report::compared(&id, params, &computed, relation, &bound, certificate)
        }
        Err(err) => Report::failed(&id, params, format!("{err:#}")),
    }
}

type RunOutcome = (ExactScalar, Relation, ExactScalar, serde_json::Value);

pub fn run_instance(mechanism: &str, inst: &Instance, coins: Option<&CoinMode>, budget: &Budget) -> Result<RunOutcome> {
    match (mechanism, inst) {
        ("nr-randomized" | "minwork-vcg" | "opt-lex", Instance::Scheduling(s)) => {
            run_scheduling(mechanism, s, coins, budget)
        }
        ("costmin-tree" | "lex-optimal" | "optimal-tree", Instance::Routing(r)) => run_routing(mechanism, r, budget),
        ("minmax-vcg", Instance::Fairness(f)) => {
            let (opt, _) = min_max_value(f, budget)?;
            let alloc = min_max_vcg(f, budget)?;
            let values = f.values(&alloc)?;
            let max = values.iter().max().cloned().unwrap_or_default();
            let bound = &ExactScalar::from_integer(f.players() as i64) * &opt;
            Ok((
                max,
                Relation::AtMost,
                bound,
                json!({ "allocation": alloc, "values": values, "optimum": opt }),
            ))
        }
        (m, _) if !MECHANISMS.contains(&m) => {
            bail!("unknown mechanism {m:?}; expected one of {}", MECHANISMS.join(", "))
        }
        (m, _) => bail!("mechanism {m} does not apply to this instance type"),
    }
}

fn run_scheduling(
    mechanism: &str,
    inst: &SchedulingInstance,
    coins: Option<&CoinMode>,
    budget: &Budget,
) -> Result<RunOutcome> {
    let (opt, _) = optimal_makespan(inst, budget)?;
    let machines = inst.machines() as i64;
    match mechanism {
        "nr-randomized" => match coins {
            Some(CoinMode::Fixed(c)) => {
                let out = nr_sub_mechanism(inst, c)?;
                let value = makespan(inst, &out.alternative)?;
                Ok((
                    value,
                    Relation::AtLeast,
                    opt,
                    json!({ "allocation": out.alternative, "payments": out.payments }),
                ))
            }
            Some(CoinMode::Expected) => {
                let dist = nr_randomized(inst, budget)?;
                let value = expected_makespan(inst, &dist)?;
                let expected_payments: Vec<ExactScalar> = (0..inst.machines())
                    .map(|i| dist.expectation(|(_, out)| out.payments[i].clone()))
                    .collect();
                let bound = &ExactScalar::ratio(7 * machines, 8) * &opt;
                Ok((
                    value,
                    Relation::AtMost,
                    bound,
                    json!({ "outcomes": dist.len(), "expected_payments": expected_payments, "optimum": opt }),
                ))
            }
            None => bail!("nr-randomized needs --coins <bits> or --expected"),
        },
        "minwork-vcg" => {
            let out = min_work_vcg(inst);
            let value = makespan(inst, &out.alternative)?;
            let bound = &ExactScalar::from_integer(machines) * &opt;
            Ok((
                value,
                Relation::AtMost,
                bound,
                json!({ "allocation": out.alternative, "payments": out.payments, "optimum": opt }),
            ))
        }
        _ => {
            let (value, alloc) = optimal_makespan(inst, budget)?;
            Ok((value, Relation::Equal, opt, json!({ "allocation": alloc })))
        }
    }
}

fn run_routing(mechanism: &str, inst: &RoutingInstance, budget: &Budget) -> Result<RunOutcome> {
    let (opt, best) = optimal_workload_tree(inst, budget)?;
    match mechanism {
        "costmin-tree" => {
            let (tree, out) = cost_min_tree(inst, budget)?;
            let payments: BTreeMap<&str, &ExactScalar> =
                inst.sources().map(|i| (inst.name(i), &out.payments[i])).collect();
            let bound = &ExactScalar::from_integer(inst.source_count() as i64) * &opt;
            let value = workload(inst, &tree)?;
            Ok((
                value,
                Relation::AtMost,
                bound,
                json!({ "nexthop": tree.to_named(inst), "payments": payments, "optimum": opt }),
            ))
        }
        "lex-optimal" => {
            let tree = lex_optimal_mechanism(inst, budget)?;
            let value = workload(inst, &tree)?;
            Ok((value, Relation::AtLeast, opt, json!({ "nexthop": tree.to_named(inst) })))
        }
        _ => Ok((
            opt.clone(),
            Relation::Equal,
            opt,
            json!({ "nexthop": best.to_named(inst) }),
        )),
    }
}
