//! JSON reports for distance estimates and experiment grids.

use causal_core::dist::{DistanceEstimate, SeedMode};
use causal_core::ot::BaseDistance;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A distance estimate with its configuration echo, ready to write out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceReport {
    pub kind: String,
    pub value: f64,
    pub breakdown: Vec<BreakdownRow>,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub seed: u64,
    pub seed_mode: String,
    pub base: String,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakdownRow {
    /// Node label, or null for the empty intervention/evidence.
    pub target: Option<String>,
    pub weight: f64,
    pub mean: f64,
    pub values: Vec<f64>,
}

impl DistanceReport {
    pub fn new(
        kind: &str,
        est: &DistanceEstimate,
        labels: &[String],
        wall_clock_secs: f64,
    ) -> Self {
        DistanceReport {
            kind: kind.to_string(),
            value: est.value,
            breakdown: est
                .terms
                .iter()
                .map(|t| BreakdownRow {
                    target: t.target.map(|i| labels[i].clone()),
                    weight: t.weight,
                    mean: t.mean,
                    values: t.values.clone(),
                })
                .collect(),
            k: est.k,
            l: est.l,
            m: est.m,
            seed: est.seed,
            seed_mode: match est.seed_mode {
                SeedMode::Shared => "shared".into(),
                SeedMode::Disjoint => "disjoint".into(),
            },
            base: match est.base {
                BaseDistance::W2 => "w2".into(),
                BaseDistance::W1 => "w1".into(),
                BaseDistance::SlicedW1 { projections } => format!("sliced:{projections}"),
            },
            wall_clock_secs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// One cell of an experiment grid; every cell carries its own seed so any
/// number can be reproduced in isolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub key: Value,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Value,
    pub cells: Vec<ExperimentCell>,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
