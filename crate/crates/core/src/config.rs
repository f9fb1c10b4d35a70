//! Evaluation configuration and the platform settings file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default look-back window, in months.
pub const DEFAULT_LOOKBACK: usize = 96;
/// Default evaluation horizons, in months.
pub const DEFAULT_HORIZONS: [usize; 5] = [12, 24, 36, 48, 60];
/// Default trailing window (number of origins) for rank histories.
pub const DEFAULT_HISTORY_WINDOW: usize = 24;
/// Default poll interval of the refresh loop: six hours.
pub const DEFAULT_REFRESH_INTERVAL_SECS: u64 = 6 * 60 * 60;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("unknown space `{0}` (expected `transformed` or `raw`)")]
    UnknownSpace(String),
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Parse(String),
}

/// Accuracy metric computed per record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "MAE")]
    Mae,
    #[serde(rename = "RMSE")]
    Rmse,
    #[serde(rename = "sMAPE")]
    Smape,
    #[serde(rename = "MASE")]
    Mase,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Mae, Metric::Rmse, Metric::Smape, Metric::Mase];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mae => "MAE",
            Metric::Rmse => "RMSE",
            Metric::Smape => "sMAPE",
            Metric::Mase => "MASE",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mae" => Ok(Metric::Mae),
            "rmse" => Ok(Metric::Rmse),
            "smape" => Ok(Metric::Smape),
            "mase" => Ok(Metric::Mase),
            _ => Err(ConfigError::UnknownMetric(s.to_string())),
        }
    }
}

/// Which value space models are evaluated in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Transformed,
    Raw,
}

impl FromStr for Space {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "transformed" => Ok(Space::Transformed),
            "raw" => Ok(Space::Raw),
            _ => Err(ConfigError::UnknownSpace(s.to_string())),
        }
    }
}

/// Parameters of one rolling-origin evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub lookback: usize,
    pub horizons: Vec<usize>,
    pub stride: usize,
    pub metrics: Vec<Metric>,
    pub primary_metric: Metric,
    pub season: usize,
    pub space: Space,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            lookback: DEFAULT_LOOKBACK,
            horizons: DEFAULT_HORIZONS.to_vec(),
            stride: 1,
            metrics: Metric::ALL.to_vec(),
            primary_metric: Metric::Mase,
            season: 12,
            space: Space::Transformed,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.season == 0 {
            return invalid("season must be at least 1".into());
        }
        if self.lookback < 2 * self.season {
            return invalid(format!(
                "lookback {} must be at least twice the season {}",
                self.lookback, self.season
            ));
        }
        if self.stride == 0 {
            return invalid("stride must be at least 1".into());
        }
        if self.horizons.is_empty() {
            return invalid("horizons must be nonempty".into());
        }
        if self.horizons[0] == 0 || self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("horizons must be positive and strictly ascending".into());
        }
        if self.metrics.is_empty() {
            return invalid("metrics must be nonempty".into());
        }
        if !self.metrics.contains(&self.primary_metric) {
            return invalid(format!(
                "primary metric {} is not among the configured metrics",
                self.primary_metric
            ));
        }
        Ok(())
    }

    /// Stable JSON rendering used when hashing run identities.
    pub fn canonical_json(&self) -> String {
        let mut metrics = self.metrics.clone();
        metrics.sort();
        metrics.dedup();
        let canon = EvalConfig {
            metrics,
            ..self.clone()
        };
        serde_json::to_string(&canon).expect("config serializes")
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.last().copied().unwrap_or(0)
    }
}

/// Everything a settings file may hold: the evaluation config at top level
/// plus a few keys for the ingest source and the service.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub eval: EvalConfig,
    pub source: Option<String>,
    pub refresh_interval_secs: u64,
    pub history_window: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            eval: EvalConfig::default(),
            source: None,
            refresh_interval_secs: DEFAULT_REFRESH_INTERVAL_SECS,
            history_window: DEFAULT_HISTORY_WINDOW,
        }
    }
}

impl Settings {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut settings = Settings::default();
        if let Some(v) = table.remove("source") {
            settings.source = Some(
                v.as_str()
                    .ok_or_else(|| ConfigError::Invalid("source must be a string".into()))?
                    .to_string(),
            );
        }
        if let Some(v) = table.remove("refresh_interval_secs") {
            settings.refresh_interval_secs = v
                .as_integer()
                .filter(|n| *n > 0)
                .ok_or_else(|| ConfigError::Invalid("refresh_interval_secs must be a positive integer".into()))?
                as u64;
        }
        if let Some(v) = table.remove("history_window") {
            settings.history_window = v
                .as_integer()
                .filter(|n| *n > 0)
                .ok_or_else(|| ConfigError::Invalid("history_window must be a positive integer".into()))?
                as usize;
        }
        settings.eval = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        settings.eval.validate()?;
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_protocol() {
        let cfg = EvalConfig::default();
        assert_eq!(cfg.horizons, vec![12, 24, 36, 48, 60]);
        assert_eq!(cfg.lookback, 96);
        assert_eq!(cfg.stride, 1);
        assert_eq!(cfg.primary_metric, Metric::Mase);
        assert_eq!(cfg.metrics.len(), 4);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let short = EvalConfig {
            lookback: 20,
            ..Default::default()
        };
        assert!(short.validate().is_err());
        let unsorted = EvalConfig {
            horizons: vec![24, 12],
            ..Default::default()
        };
        assert!(unsorted.validate().is_err());
        let primary_missing = EvalConfig {
            metrics: vec![Metric::Mae],
            ..Default::default()
        };
        assert!(primary_missing.validate().is_err());
        let zero_stride = EvalConfig {
            stride: 0,
            ..Default::default()
        };
        assert!(zero_stride.validate().is_err());
    }

    #[test]
    fn settings_file_overrides_defaults() {
        let s = Settings::from_toml_str(
            r#"
            source = "fixtures/2024-11.csv"
            horizons = [12, 24]
            metrics = ["MAE", "MASE"]
            space = "raw"
            seed = 7
            history_window = 6
            "#,
        )
        .unwrap();
        assert_eq!(s.source.as_deref(), Some("fixtures/2024-11.csv"));
        assert_eq!(s.eval.horizons, vec![12, 24]);
        assert_eq!(s.eval.metrics, vec![Metric::Mae, Metric::Mase]);
        assert_eq!(s.eval.space, Space::Raw);
        assert_eq!(s.eval.lookback, 96);
        assert_eq!(s.history_window, 6);
    }

    #[test]
    fn settings_reject_unknown_keys() {
        assert!(Settings::from_toml_str("lookbak = 3").is_err());
    }

    #[test]
    fn canonical_json_ignores_metric_order() {
        let a = EvalConfig {
            metrics: vec![Metric::Mase, Metric::Mae],
            ..Default::default()
        };
        let b = EvalConfig {
            metrics: vec![Metric::Mae, Metric::Mase],
            ..Default::default()
        };
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn metric_names_parse_case_insensitively() {
        assert_eq!("smape".parse::<Metric>().unwrap(), Metric::Smape);
        assert_eq!("MASE".parse::<Metric>().unwrap(), Metric::Mase);
        assert!("mape".parse::<Metric>().is_err());
    }
}
