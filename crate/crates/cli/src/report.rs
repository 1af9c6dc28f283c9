//! Experiment reports. Bodies are byte-identical across identical seeded
//! invocations; everything clock-dependent lives in the `meta` block, which
//! comparisons strip.

use serde::Serialize;
use serde_json::Value;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Serialize)]
pub struct ExperimentReport {
    pub command: String,
    /// Full configuration echo: parameters, thresholds, preset, fixture.
    pub config: Value,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<Value>,
    /// Aggregate rates; every rate carries its trial count and CI.
    pub aggregate: Value,
    pub meta: Meta,
}

#[derive(Serialize)]
pub struct Meta {
    pub timestamp_unix_ms: u128,
    pub wall_clock_ms: u128,
}

impl ExperimentReport {
    pub fn new(
        command: &str,
        config: Value,
        seeds: Vec<u64>,
        per_seed: Vec<Value>,
        aggregate: Value,
        wall_clock_ms: u128,
    ) -> Self {
        ExperimentReport {
            command: command.to_string(),
            config,
            seeds,
            per_seed,
            aggregate,
            meta: Meta {
                timestamp_unix_ms: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
                wall_clock_ms,
            },
        }
    }
}
