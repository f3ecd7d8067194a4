//! Machine-readable reports and their JSON/CSV rendering.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use truthlab_core::ExactScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Confirmed,
    Violated,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Confirmed => "CONFIRMED",
            Status::Violated => "VIOLATED",
            Status::Error => "ERROR",
        })
    }
}

/// How the computed value must relate to the reference bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtLeast,
    Greater,
    AtMost,
    Equal,
}

impl Relation {
    pub fn holds(self, computed: &ExactScalar, bound: &ExactScalar) -> bool {
        match self {
            Relation::AtLeast => computed >= bound,
            Relation::Greater => computed > bound,
            Relation::AtMost => computed <= bound,
            Relation::Equal => computed == bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub bound_id: String,
    pub params: BTreeMap<String, String>,
    pub computed_value: String,
    pub paper_bound: String,
    pub relation: Option<Relation>,
    pub status: Status,
    pub certificate: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u128>,
}

impl Report {
    /// Status follows from comparing `computed` with `bound`.
    pub fn compared(
        bound_id: &str,
        params: BTreeMap<String, String>,
        computed: &ExactScalar,
        relation: Relation,
        bound: &ExactScalar,
        certificate: serde_json::Value,
    ) -> Self {
        let status = if relation.holds(computed, bound) {
            Status::Confirmed
        } else {
            Status::Violated
        };
        Report {
            bound_id: bound_id.to_string(),
            params,
            computed_value: computed.to_string(),
            paper_bound: bound.to_string(),
            relation: Some(relation),
            status,
            certificate,
            error: None,
            wall_ms: None,
        }
    }

    pub fn failed(bound_id: &str, params: BTreeMap<String, String>, error: impl fmt::Display) -> Self {
        Report {
            bound_id: bound_id.to_string(),
            params,
            computed_value: String::new(),
            paper_bound: String::new(),
            relation: None,
            status: Status::Error,
            certificate: serde_json::Value::Null,
            error: Some(error.to_string()),
            wall_ms: None,
        }
    }

    pub fn param(&self, key: &str) -> &str {
        self.params.get(key).map_or("", String::as_str)
    }
}

/// 0 when every report is confirmed, 2 on any error, otherwise 1.
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().any(|r| r.status == Status::Error) {
        2
    } else if reports.iter().any(|r| r.status == Status::Violated) {
        1
    } else {
        0
    }
}

/// A single report renders as an object, several as an array.
pub fn to_json(reports: &[Report]) -> serde_json::Result<String> {
    match reports {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
}

pub const CSV_HEADER: [&str; 7] = [
    "bound_id",
    "m",
    "epsilon",
    "computed_value",
    "paper_bound",
    "status",
    "wall_ms",
];

pub fn to_csv(reports: &[Report]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for r in reports {
        let wall = r.wall_ms.map(|w| w.to_string()).unwrap_or_default();
        let status = r.status.to_string();
        writer.write_record([
            r.bound_id.as_str(),
            r.param("m"),
            r.param("epsilon"),
            r.computed_value.as_str(),
            r.paper_bound.as_str(),
            status.as_str(),
            wall.as_str(),
        ])?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}
