use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::{EvalConfig, Metric};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum MetricError {
    #[error("MASE is undefined: the seasonal-naive scale of the window is zero")]
    MaseUndefined,
}

/// Mean absolute seasonal difference `|y_t - y_{t-m}|` over the window, or
/// `None` when the window is not longer than one season.
pub fn mase_scale(window: &[f64], season: usize) -> Option<f64> {
    if season == 0 || window.len() <= season {
        return None;
    }
    let n = window.len() - season;
    let total: f64 = window[season..]
        .iter()
        .zip(window)
        .map(|(y, lag)| (y - lag).abs())
        .sum();
    Some(total / n as f64)
}

/// Per-record metric values. RMSE is stored as the absolute error; the
/// square root of the mean square happens at aggregation.
pub fn compute_metrics(
    forecast: f64,
    actual: f64,
    window: &[f64],
    cfg: &EvalConfig,
) -> BTreeMap<Metric, Result<f64, MetricError>> {
    let abs_err = (forecast - actual).abs();
    cfg.metrics
        .iter()
        .map(|&m| {
            let value = match m {
                Metric::Mae | Metric::Rmse => Ok(abs_err),
                Metric::Smape => {
                    let denom = forecast.abs() + actual.abs();
                    Ok(if denom == 0.0 { 0.0 } else { 200.0 * abs_err / denom })
                }
                Metric::Mase => match mase_scale(window, cfg.season) {
                    Some(d) if d > 0.0 => Ok(abs_err / d),
                    _ => Err(MetricError::MaseUndefined),
                },
            };
            (m, value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(season: usize) -> EvalConfig {
        EvalConfig {
            season,
            lookback: 2 * season.max(1),
            ..Default::default()
        }
    }

    #[test]
    fn perfect_forecast() {
        let window: Vec<f64> = (0..30).map(|t| t as f64).collect();
        let m = compute_metrics(3.5, 3.5, &window, &cfg(12));
        assert!(m.values().all(|v| *v == Ok(0.0)));
    }

    #[test]
    fn hand_arithmetic() {
        // With m = 1, |diffs| of [0, 2, 4] average to 2.
        let m = compute_metrics(1.0, 3.0, &[0.0, 2.0, 4.0], &cfg(1));
        assert_eq!(m[&Metric::Mae], Ok(2.0));
        assert_eq!(m[&Metric::Rmse], Ok(2.0));
        assert_eq!(m[&Metric::Mase], Ok(1.0));
        assert_eq!(m[&Metric::Smape], Ok(100.0));
    }

    #[test]
    fn constant_window_leaves_mase_undefined() {
        let m = compute_metrics(1.0, 2.0, &[5.0; 24], &cfg(12));
        assert_eq!(m[&Metric::Mase], Err(MetricError::MaseUndefined));
        assert_eq!(m[&Metric::Mae], Ok(1.0));
        assert!(m[&Metric::Smape].is_ok());
    }

    #[test]
    fn smape_zero_over_zero() {
        let m = compute_metrics(0.0, 0.0, &[1.0, 2.0, 3.0], &cfg(1));
        assert_eq!(m[&Metric::Smape], Ok(0.0));
    }

    #[test]
    fn only_configured_metrics() {
        let c = EvalConfig {
            metrics: vec![Metric::Mae],
            primary_metric: Metric::Mae,
            ..Default::default()
        };
        let m = compute_metrics(1.0, 2.0, &[0.0; 30], &c);
        assert_eq!(m.len(), 1);
    }
}
