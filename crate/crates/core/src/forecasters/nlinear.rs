use nalgebra::DMatrix;

use super::linalg::ridge_with_intercept;
use super::{builtin_descriptor, ForecastError, ForecastTask, Forecaster, ModelDescriptor};

pub const DEFAULT_NLINEAR_RIDGE: f64 = 1e-3;

/// NLinear: a linear map from the last-value-normalized window to each
/// horizon's normalized target, trained on the series' own history.
///
/// Training pairs are every (window, max-horizon future) slice that fits
/// inside the pre-origin history. Inputs and targets are divided by their
/// joint RMS before the ridge solve so the model is scale equivariant.
#[derive(Debug, Clone, Copy)]
pub struct NLinear {
    pub ridge: f64,
}

impl Default for NLinear {
    fn default() -> Self {
        Self {
            ridge: DEFAULT_NLINEAR_RIDGE,
        }
    }
}

impl NLinear {
    pub const ID: &'static str = "nlinear";
}

impl Forecaster for NLinear {
    fn descriptor(&self) -> ModelDescriptor {
        builtin_descriptor(Self::ID, "NLinear", "ML")
    }

    fn forecast(&self, task: &ForecastTask, history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        let lookback = task.window.len();
        let max_h = task.max_horizon();
        let need = lookback + max_h;
        if lookback == 0 || history.len() < need {
            return Err(ForecastError::InsufficientTraining {
                need,
                got: history.len(),
            });
        }
        let n_pairs = history.len() - need + 1;
        let ends: Vec<usize> = (lookback - 1..lookback - 1 + n_pairs).collect();

        let mut inputs = DMatrix::zeros(n_pairs, lookback + 1);
        let mut targets = DMatrix::zeros(n_pairs, task.horizons.len());
        let mut sum_sq = 0.0;
        for (r, &end) in ends.iter().enumerate() {
            let anchor = history[end];
            for c in 0..lookback {
                let z = history[end + 1 - lookback + c] - anchor;
                inputs[(r, c)] = z;
                sum_sq += z * z;
            }
            inputs[(r, lookback)] = 1.0;
            for (k, &h) in task.horizons.iter().enumerate() {
                let z = history[end + h] - anchor;
                targets[(r, k)] = z;
                sum_sq += z * z;
            }
        }
        let last = *task.window.last().expect("window nonempty");
        let count = n_pairs * (lookback + task.horizons.len());
        let scale = (sum_sq / count as f64).sqrt();
        if !scale.is_finite() || scale <= 0.0 {
            // Flat history: every normalized quantity is zero.
            return Ok(vec![last; task.horizons.len()]);
        }
        for r in 0..n_pairs {
            for c in 0..lookback {
                inputs[(r, c)] /= scale;
            }
        }
        targets /= scale;

        let weights = ridge_with_intercept(&inputs, &targets, self.ridge)
            .ok_or_else(|| ForecastError::Numerical("nlinear ridge system is singular".into()))?;
        let mut current = DMatrix::zeros(1, lookback + 1);
        for (c, v) in task.window.iter().enumerate() {
            current[(0, c)] = (v - last) / scale;
        }
        current[(0, lookback)] = 1.0;
        let pred = current * weights;
        Ok((0..task.horizons.len()).map(|k| last + scale * pred[(0, k)]).collect())
    }
}
