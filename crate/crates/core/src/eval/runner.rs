use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::compute_metrics;
use super::splits::{splits_for_range, usable_range};
use super::{EvalError, MetricRecord};
use crate::adapter::{invoke_adapter, AdapterManifest};
use crate::config::EvalConfig;
use crate::forecasters::{ForecastError, ForecastOutput, ForecastTask, Forecaster, HistoricalAverage, ModelDescriptor};
use crate::ingest::TransformedPanel;

/// `substituted` label when even the historical average failed.
pub const FALLBACK_LAST_VALUE: &str = "last_value";

#[derive(Clone)]
pub enum ModelSpec {
    Builtin(Arc<dyn Forecaster>),
    Adapter(AdapterManifest),
}

impl ModelSpec {
    pub fn descriptor(&self) -> ModelDescriptor {
        match self {
            ModelSpec::Builtin(m) => m.descriptor(),
            ModelSpec::Adapter(m) => m.descriptor(),
        }
    }

    pub fn model_id(&self) -> String {
        self.descriptor().model_id
    }
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSpec::Builtin(m) => write!(f, "Builtin({})", m.descriptor().model_id),
            ModelSpec::Adapter(m) => write!(f, "Adapter({})", m.model_id),
        }
    }
}

/// Something that went wrong during a run without aborting it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub model_id: Option<String>,
    pub series_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalOutcome {
    /// Sorted canonically.
    pub records: Vec<MetricRecord>,
    pub incidents: Vec<Incident>,
    /// Series without a single valid origin, with the reason.
    pub skipped_series: Vec<(String, String)>,
    /// Records dropped from MASE because the window's scale was zero.
    pub mase_undefined: BTreeMap<String, usize>,
}

/// All forecasting jobs of one series: one task per origin, carrying every
/// horizon whose target lies inside the usable range.
struct SeriesJobs {
    series_id: String,
    values: Vec<f64>,
    range_start: usize,
    jobs: Vec<ForecastTask>,
}

impl SeriesJobs {
    fn history(&self, origin: usize) -> &[f64] {
        &self.values[..=origin - self.range_start]
    }

    fn actual(&self, index: usize) -> f64 {
        self.values[index - self.range_start]
    }
}

fn prepare(panel: &TransformedPanel, cfg: &EvalConfig) -> (Vec<SeriesJobs>, Vec<(String, String)>) {
    let mut series = Vec::new();
    let mut skipped = Vec::new();
    for (idx, series_id) in panel.series_ids().iter().enumerate() {
        let column = panel.column(idx);
        let Some((start, end)) = usable_range(column) else {
            skipped.push((series_id.clone(), "no observed values".to_string()));
            continue;
        };
        let splits = splits_for_range(start, end, cfg);
        if splits.is_empty() {
            skipped.push((
                series_id.clone(),
                format!("{} contiguous observations leave no valid origin", end - start + 1),
            ));
            continue;
        }
        let values: Vec<f64> = column[start..=end]
            .iter()
            .map(|v| v.expect("range is observed"))
            .collect();
        let mut by_origin: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in &splits {
            by_origin.entry(s.origin_index).or_default().push(s.horizon);
        }
        let jobs = by_origin
            .into_iter()
            .map(|(origin, horizons)| {
                let window = values[origin + 1 - cfg.lookback - start..=origin - start].to_vec();
                ForecastTask::new(series_id.clone(), origin, window, horizons).expect("valid split task")
            })
            .collect();
        series.push(SeriesJobs {
            series_id: series_id.clone(),
            values,
            range_start: start,
            jobs,
        });
    }
    (series, skipped)
}

fn builtin_with_fallback(
    model: &dyn Forecaster,
    task: &ForecastTask,
    history: &[f64],
) -> (ForecastOutput, Option<String>) {
    let model_id = model.descriptor().model_id;
    let attempt = |m: &dyn Forecaster| -> Result<ForecastOutput, ForecastError> {
        let out = m.fit_predict(task, history)?;
        out.check(task)?;
        Ok(out)
    };
    match attempt(model) {
        Ok(out) => return (out, None),
        Err(e) => {
            tracing::debug!(model = %model_id, series = %task.series_id, origin = task.origin_index, "falling back: {e}")
        }
    }
    if model_id != HistoricalAverage::ID {
        if let Ok(mut out) = attempt(&HistoricalAverage) {
            out.model_id = model_id;
            return (out, Some(HistoricalAverage::ID.to_string()));
        }
    }
    let last = task.last_value().unwrap_or(0.0);
    let out = ForecastOutput {
        model_id,
        series_id: task.series_id.clone(),
        origin_index: task.origin_index,
        forecasts: task.horizons.iter().map(|&h| (h, last)).collect(),
    };
    (out, Some(FALLBACK_LAST_VALUE.to_string()))
}

struct Scored {
    records: Vec<MetricRecord>,
    mase_undefined: BTreeMap<String, usize>,
}

fn score_outputs(
    series: &SeriesJobs,
    outputs: impl IntoIterator<Item = (ForecastOutput, Option<String>)>,
    cfg: &EvalConfig,
    vintage_id: &str,
) -> Scored {
    let mut records = Vec::new();
    let mut undefined = 0;
    let windows: BTreeMap<usize, &ForecastTask> = series.jobs.iter().map(|t| (t.origin_index, t)).collect();
    for (out, substituted) in outputs {
        let task = windows[&out.origin_index];
        for (&h, &forecast) in &out.forecasts {
            let actual = series.actual(out.origin_index + h);
            for (metric, value) in compute_metrics(forecast, actual, &task.window, cfg) {
                match value {
                    Ok(value) => records.push(MetricRecord {
                        vintage_id: vintage_id.to_string(),
                        model_id: out.model_id.clone(),
                        series_id: series.series_id.clone(),
                        origin_index: out.origin_index,
                        horizon: h,
                        metric_name: metric,
                        value,
                        substituted: substituted.clone(),
                    }),
                    Err(_) => undefined += 1,
                }
            }
        }
    }
    let mut mase_undefined = BTreeMap::new();
    if undefined > 0 {
        mase_undefined.insert(series.series_id.clone(), undefined);
    }
    Scored {
        records,
        mase_undefined,
    }
}

/// Evaluates every model on every rolling origin of every series.
pub fn run_evaluation(
    panel: &TransformedPanel,
    cfg: &EvalConfig,
    models: &[ModelSpec],
    vintage_id: &str,
) -> Result<EvalOutcome, EvalError> {
    cfg.validate().map_err(|e| EvalError::ConfigInvalid(e.to_string()))?;
    if models.is_empty() {
        return Err(EvalError::ConfigInvalid("no models to evaluate".into()));
    }
    let mut ids = BTreeSet::new();
    for m in models {
        if !ids.insert(m.model_id()) {
            return Err(EvalError::ConfigInvalid(format!("duplicate model id {}", m.model_id())));
        }
    }

    let (series, skipped_series) = prepare(panel, cfg);
    for (id, reason) in &skipped_series {
        tracing::info!(series = %id, "skipping series: {reason}");
    }
    if series.is_empty() {
        return Err(EvalError::NoEvaluableSeries);
    }

    let builtins: Vec<&Arc<dyn Forecaster>> = models
        .iter()
        .filter_map(|m| match m {
            ModelSpec::Builtin(b) => Some(b),
            ModelSpec::Adapter(_) => None,
        })
        .collect();
    let adapters: Vec<&AdapterManifest> = models
        .iter()
        .filter_map(|m| match m {
            ModelSpec::Adapter(a) => Some(a),
            ModelSpec::Builtin(_) => None,
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..builtins.len())
        .flat_map(|m| (0..series.len()).map(move |s| (m, s)))
        .collect();
    let builtin_scores: Vec<Scored> = pairs
        .par_iter()
        .map(|&(m, s)| {
            let sj = &series[s];
            let outputs = sj
                .jobs
                .iter()
                .map(|task| builtin_with_fallback(builtins[m].as_ref(), task, sj.history(task.origin_index)));
            score_outputs(sj, outputs, cfg, vintage_id)
        })
        .collect();

    let adapter_results: Vec<Result<Vec<Scored>, Incident>> = adapters
        .par_iter()
        .map(|manifest| {
            let batch: Vec<ForecastTask> = series.iter().flat_map(|s| s.jobs.iter().cloned()).collect();
            let outputs = invoke_adapter(manifest, &batch).map_err(|e| Incident {
                model_id: Some(manifest.model_id.clone()),
                series_id: None,
                message: e.to_string(),
            })?;
            let mut outputs = outputs.into_iter();
            Ok(series
                .iter()
                .map(|sj| {
                    let mine: Vec<_> = outputs.by_ref().take(sj.jobs.len()).map(|o| (o, None)).collect();
                    score_outputs(sj, mine, cfg, vintage_id)
                })
                .collect())
        })
        .collect();

    let mut outcome = EvalOutcome {
        skipped_series,
        ..Default::default()
    };
    let absorb = |scored: Scored, outcome: &mut EvalOutcome| {
        outcome.records.extend(scored.records);
        for (series_id, n) in scored.mase_undefined {
            *outcome.mase_undefined.entry(series_id).or_default() += n;
        }
    };
    for scored in builtin_scores {
        absorb(scored, &mut outcome);
    }
    for result in adapter_results {
        match result {
            Ok(all) => all.into_iter().for_each(|s| absorb(s, &mut outcome)),
            Err(incident) => {
                tracing::warn!(model = ?incident.model_id, "adapter failed: {}", incident.message);
                outcome.incidents.push(incident);
            }
        }
    }
    outcome.records.sort_by(MetricRecord::canonical_cmp);
    Ok(outcome)
}
