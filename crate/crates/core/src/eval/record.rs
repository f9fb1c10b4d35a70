use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::config::Metric;

/// One metric value for one (model, series, origin, horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub vintage_id: String,
    pub model_id: String,
    pub series_id: String,
    pub origin_index: usize,
    pub horizon: usize,
    pub metric_name: Metric,
    pub value: f64,
    /// Fallback model used in place of `model_id`, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substituted: Option<String>,
}

impl MetricRecord {
    /// Canonical ordering used for persistence and determinism checks.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        (
            &self.vintage_id,
            &self.model_id,
            &self.series_id,
            self.origin_index,
            self.horizon,
            self.metric_name,
        )
            .cmp(&(
                &other.vintage_id,
                &other.model_id,
                &other.series_id,
                other.origin_index,
                other.horizon,
                other.metric_name,
            ))
            .then_with(|| self.value.total_cmp(&other.value))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
