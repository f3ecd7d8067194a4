//! JSON input files, dispatched on their `"type"` tag.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use truthlab_core::fairness::FairnessInstance;
use truthlab_core::model::{AdditiveValuation, FiniteTypeDomain, TypeEntry};
use truthlab_core::routing::RoutingInstance;
use truthlab_core::scheduling::SchedulingInstance;
use truthlab_core::ExactScalar;

#[derive(Debug, Clone)]
pub enum Instance {
    Scheduling(SchedulingInstance),
    Routing(RoutingInstance),
    Fairness(FairnessInstance),
}

#[derive(Deserialize)]
struct Tagged {
    #[serde(rename = "type")]
    kind: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireType {
    name: String,
    costs: Vec<ExactScalar>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainWire {
    #[serde(rename = "type")]
    kind: String,
    machines: Vec<Vec<WireType>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let tag: Tagged = serde_json::from_str(text).context("instance JSON needs a \"type\" field")?;
    Ok(match tag.kind.as_str() {
        "scheduling" => Instance::Scheduling(serde_json::from_str(text)?),
        "routing" => Instance::Routing(serde_json::from_str(text)?),
        "fairness" => Instance::Fairness(serde_json::from_str(text)?),
        other => bail!("unknown instance type {other:?}"),
    })
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// `{"type":"scheduling-domain","machines":[[{"name":..,"costs":[..]},..],..]}`:
/// named cost vectors per machine, all over the same number of tasks.
pub fn parse_scheduling_domain(text: &str) -> Result<FiniteTypeDomain<AdditiveValuation>> {
    let wire: DomainWire = serde_json::from_str(text)?;
    if wire.kind != "scheduling-domain" {
        bail!("expected type \"scheduling-domain\", got {:?}", wire.kind);
    }
    let tasks = wire.machines.first().and_then(|m| m.first()).map(|t| t.costs.len());
    let mut types = Vec::with_capacity(wire.machines.len());
    for (machine, entries) in wire.machines.into_iter().enumerate() {
        let mut row = Vec::with_capacity(entries.len());
        for entry in entries {
            if Some(entry.costs.len()) != tasks {
                bail!(
                    "type {:?} of machine {machine} has {} costs, expected {}",
                    entry.name,
                    entry.costs.len(),
                    tasks.unwrap_or(0)
                );
            }
            if entry.costs.iter().any(|c| c.is_negative() || c.is_infinite()) {
                bail!(
                    "type {:?} of machine {machine} has a negative or infinite cost",
                    entry.name
                );
            }
            row.push(TypeEntry::new(entry.name, AdditiveValuation(entry.costs)));
        }
        types.push(row);
    }
    Ok(FiniteTypeDomain::new(types)?)
}

pub fn load_scheduling_domain(path: &Path) -> Result<FiniteTypeDomain<AdditiveValuation>> {
    parse_scheduling_domain(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_rejects_ragged_types() {
        let text = r#"{"type":"scheduling-domain","machines":[[{"name":"a","costs":["1","2"]}],[{"name":"b","costs":["1"]}]]}"#;
        assert!(parse_scheduling_domain(text).is_err());
    }

    #[test]
    fn instance_type_is_checked() {
        assert!(parse_instance(r#"{"type":"auction"}"#).is_err());
        let text = r#"{"type":"scheduling","machines":2,"tasks":1,"costs":[["1"],["2"]]}"#;
        assert!(matches!(parse_instance(text).unwrap(), Instance::Scheduling(_)));
    }
}
