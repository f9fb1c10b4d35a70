//! In-process baseline forecasters behind one contract.
//!
//! Every model receives a [`ForecastTask`] (the look-back window plus the
//! horizons to score) and the series' full pre-origin history, which only
//! [`NLinear`] uses for training.

mod ar;
mod baselines;
mod ets;
mod linalg;
mod nlinear;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::EvalConfig;

pub use ar::{ArFit, ArLeastSquares, DEFAULT_AR_LAGS};
pub use baselines::{HistoricalAverage, LinearTrend, SeasonalNaive};
pub use ets::{EtsHolt, HoltFit};
pub use nlinear::{NLinear, DEFAULT_NLINEAR_RIDGE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("empty window")]
    EmptyWindow,
    #[error("window of {got} values is too short (need {need})")]
    WindowTooShort { need: usize, got: usize },
    #[error("{got} history values cannot form a training pair (need {need})")]
    InsufficientTraining { need: usize, got: usize },
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("{0} produced a non-finite forecast")]
    NonFinite(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// One forecasting job: a look-back window ending at the origin and the
/// horizons to forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastTask {
    pub series_id: String,
    pub origin_index: usize,
    pub window: Vec<f64>,
    pub horizons: Vec<usize>,
}

impl ForecastTask {
    pub fn new(
        series_id: impl Into<String>,
        origin_index: usize,
        window: Vec<f64>,
        horizons: Vec<usize>,
    ) -> Result<Self, ForecastError> {
        if horizons.is_empty() {
            return Err(ForecastError::InvalidTask("no horizons".into()));
        }
        if horizons[0] == 0 || horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ForecastError::InvalidTask(
                "horizons must be positive and strictly ascending".into(),
            ));
        }
        if window.iter().any(|v| !v.is_finite()) {
            return Err(ForecastError::InvalidTask("window holds a non-finite value".into()));
        }
        Ok(Self {
            series_id: series_id.into(),
            origin_index,
            window,
            horizons,
        })
    }

    pub fn max_horizon(&self) -> usize {
        *self.horizons.last().expect("horizons nonempty")
    }

    pub fn last_value(&self) -> Option<f64> {
        self.window.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastOutput {
    pub model_id: String,
    pub series_id: String,
    pub origin_index: usize,
    pub forecasts: BTreeMap<usize, f64>,
}

impl ForecastOutput {
    /// Checks the output against the task that produced it.
    pub fn check(&self, task: &ForecastTask) -> Result<(), ForecastError> {
        if !self.forecasts.keys().copied().eq(task.horizons.iter().copied()) {
            return Err(ForecastError::InvalidTask(format!(
                "forecast horizons {:?} differ from requested {:?}",
                self.forecasts.keys().collect::<Vec<_>>(),
                task.horizons
            )));
        }
        if self.forecasts.values().any(|v| !v.is_finite()) {
            return Err(ForecastError::NonFinite(self.model_id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Builtin,
    Adapter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub model_id: String,
    pub kind: ModelKind,
    pub display_name: String,
    pub model_type: String,
}

impl ModelDescriptor {
    pub fn is_valid_id(id: &str) -> bool {
        static RE: OnceLock<Regex> = OnceLock::new();
        RE.get_or_init(|| Regex::new(r"^[a-z0-9_-]+$").unwrap()).is_match(id)
    }
}

pub trait Forecaster: Send + Sync {
    fn descriptor(&self) -> ModelDescriptor;

    /// One point forecast per task horizon, in horizon order.
    fn forecast(&self, task: &ForecastTask, history: &[f64]) -> Result<Vec<f64>, ForecastError>;

    fn fit_predict(&self, task: &ForecastTask, history: &[f64]) -> Result<ForecastOutput, ForecastError> {
        let values = self.forecast(task, history)?;
        let descriptor = self.descriptor();
        if values.len() != task.horizons.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(ForecastError::NonFinite(descriptor.model_id));
        }
        Ok(ForecastOutput {
            model_id: descriptor.model_id,
            series_id: task.series_id.clone(),
            origin_index: task.origin_index,
            forecasts: task.horizons.iter().copied().zip(values).collect(),
        })
    }
}

pub(crate) fn builtin_descriptor(id: &str, name: &str, model_type: &str) -> ModelDescriptor {
    ModelDescriptor {
        model_id: id.to_string(),
        kind: ModelKind::Builtin,
        display_name: name.to_string(),
        model_type: model_type.to_string(),
    }
}

/// Ids of the in-process models, in registry order.
pub const BUILTIN_IDS: [&str; 6] = [
    HistoricalAverage::ID,
    LinearTrend::ID,
    ArLeastSquares::ID,
    NLinear::ID,
    EtsHolt::ID,
    SeasonalNaive::ID,
];

/// Looks up a builtin model by id, parameterised from the config.
pub fn builtin(id: &str, cfg: &EvalConfig) -> Option<Arc<dyn Forecaster>> {
    let model: Arc<dyn Forecaster> = match id {
        HistoricalAverage::ID => Arc::new(HistoricalAverage),
        LinearTrend::ID => Arc::new(LinearTrend),
        ArLeastSquares::ID => Arc::new(ArLeastSquares::default()),
        NLinear::ID => Arc::new(NLinear::default()),
        EtsHolt::ID => Arc::new(EtsHolt::default()),
        SeasonalNaive::ID => Arc::new(SeasonalNaive::new(cfg.season)),
        _ => return None,
    };
    Some(model)
}

pub fn builtin_models(cfg: &EvalConfig) -> Vec<Arc<dyn Forecaster>> {
    BUILTIN_IDS
        .iter()
        .map(|id| builtin(id, cfg).expect("listed builtin exists"))
        .collect()
}

pub(crate) fn require_len(window: &[f64], need: usize) -> Result<(), ForecastError> {
    if window.is_empty() {
        return Err(ForecastError::EmptyWindow);
    }
    if window.len() < need {
        return Err(ForecastError::WindowTooShort {
            need,
            got: window.len(),
        });
    }
    Ok(())
}
