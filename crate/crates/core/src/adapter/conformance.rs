use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{invoke_adapter, AdapterManifest};
use crate::config::EvalConfig;
use crate::forecasters::ForecastTask;

const RANDOM_WALK_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceEntry {
    pub task: String,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub model_id: String,
    pub entries: Vec<ConformanceEntry>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.passed)
    }

    pub fn pass_count(&self) -> usize {
        self.entries.iter().filter(|e| e.passed).count()
    }
}

/// The three synthetic probes: a constant series, a linear ramp and a seeded
/// random walk, each with the configured look-back and horizons.
pub fn conformance_tasks(cfg: &EvalConfig) -> Vec<(&'static str, ForecastTask)> {
    let len = cfg.lookback;
    let constant = vec![3.0; len];
    let ramp: Vec<f64> = (0..len).map(|t| 1.0 + 0.5 * t as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_WALK_SEED);
    let mut level = 0.0;
    let walk: Vec<f64> = (0..len)
        .map(|_| {
            level += rng.random_range(-1.0..1.0);
            level
        })
        .collect();
    [("constant", constant), ("linear_ramp", ramp), ("random_walk", walk)]
        .into_iter()
        .map(|(name, window)| {
            let task = ForecastTask::new(format!("conformance_{name}"), len - 1, window, cfg.horizons.clone())
                .expect("valid synthetic task");
            (name, task)
        })
        .collect()
}

/// Runs each probe as its own batch and reports per-probe outcomes.
pub fn conformance_check(manifest: &AdapterManifest, cfg: &EvalConfig) -> ConformanceReport {
    let entries = conformance_tasks(cfg)
        .into_iter()
        .map(|(name, task)| {
            let outcome = invoke_adapter(manifest, std::slice::from_ref(&task)).and_then(|outs| {
                outs[0]
                    .check(&task)
                    .map_err(|e| super::AdapterError::BadResponse(e.to_string()))
            });
            ConformanceEntry {
                task: name.to_string(),
                passed: outcome.is_ok(),
                error: outcome.err().map(|e| format!("{e:?}")),
            }
        })
        .collect();
    ConformanceReport {
        model_id: manifest.model_id.clone(),
        entries,
    }
}
