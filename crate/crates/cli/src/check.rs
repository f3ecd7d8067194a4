//! Property checks of a scheduling mechanism over a finite type domain.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Result};
use serde_json::json;
use truthlab_core::model::{AdditiveValuation, Budget, FiniteTypeDomain, Profile};
use truthlab_core::monotonicity::{
    check_ds_truthful, check_smon, check_wmon, payments_exist, Direction, PaymentSolution,
};
use truthlab_core::scheduling::{instance_from_profile, min_work_vcg, optimal_makespan};
use truthlab_core::ExactScalar;

use crate::input::load_scheduling_domain;
use crate::report::{Relation, Report};

pub const MECHANISMS: [&str; 2] = ["minwork-vcg", "opt-lex"];
pub const PROPERTIES: [&str; 4] = ["wmon", "smon", "truthful", "payments"];

/// Counts violations of `property`; the report is confirmed when there are none.
pub fn check(mechanism: &str, property: &str, domain_path: &Path, budget: &Budget) -> Report {
    let mut params = BTreeMap::new();
    params.insert("mechanism".to_string(), mechanism.to_string());
    params.insert("property".to_string(), property.to_string());
    params.insert("domain".to_string(), domain_path.display().to_string());
    let id = format!("check:{mechanism}:{property}");
    let outcome =
        load_scheduling_domain(domain_path).and_then(|domain| check_domain(mechanism, property, &domain, budget));
    match outcome {
        Ok((count, certificate)) => Report::compared(
            &id,
            params,
            &ExactScalar::from_integer(count as i64),
            Relation::Equal,
            &ExactScalar::zero(),
            certificate,
        ),
        Err(err) => Report::failed(&id, params, format!("{err:#}")),
    }
}

/// Violation count and certificate for an already loaded domain.
pub fn check_domain(
    mechanism: &str,
    property: &str,
    domain: &FiniteTypeDomain<AdditiveValuation>,
    budget: &Budget,
) -> Result<(usize, serde_json::Value)> {
    if !MECHANISMS.contains(&mechanism) {
        bail!(
            "unknown mechanism {mechanism:?}; expected one of {}",
            MECHANISMS.join(", ")
        );
    }
    let dir = Direction::CostMinimizing;
    let vcg = mechanism == "minwork-vcg";
    let rule = |p: &Profile| {
        let inst = instance_from_profile(domain, p)?;
        if vcg {
            Ok(min_work_vcg(&inst).alternative)
        } else {
            Ok(optimal_makespan(&inst, budget)?.1)
        }
    };
    match property {
        "wmon" | "smon" => {
            let found = if property == "wmon" {
                check_wmon(&rule, domain, dir)?
            } else {
                check_smon(&rule, domain, dir)?
            };
            Ok((found.len(), json!({ "violations": found })))
        }
        "truthful" => {
            if !vcg {
                bail!("{mechanism} has no payment rule; check the payments property instead");
            }
            let mech = |p: &Profile| Ok(min_work_vcg(&instance_from_profile(domain, p)?));
            let found = check_ds_truthful(&mech, domain, dir)?;
            let count = found.utility.len() + found.payment_dependence.len();
            Ok((count, serde_json::to_value(&found)?))
        }
        "payments" => Ok(match payments_exist(&rule, domain, dir)? {
            PaymentSolution::Feasible(payments) => {
                let table: BTreeMap<String, &Vec<ExactScalar>> = payments
                    .iter()
                    .map(|(p, pay)| (domain.type_names(p).join(","), pay))
                    .collect();
                (0, json!({ "payments": table }))
            }
            PaymentSolution::Infeasible(cycle) => (1, json!({ "negative_cycle": cycle })),
        }),
        other => bail!("unknown property {other:?}; expected one of {}", PROPERTIES.join(", ")),
    }
}
