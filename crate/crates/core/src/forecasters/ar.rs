use nalgebra::{DMatrix, DVector};

use super::linalg::least_squares;
use super::{builtin_descriptor, require_len, ForecastError, ForecastTask, Forecaster, ModelDescriptor};

/// One year of monthly lags.
pub const DEFAULT_AR_LAGS: usize = 12;

const RIDGE_FALLBACK: f64 = 1e-6;

/// Autoregression `y_t = c + Σ φ_k y_{t-k}` fit by least squares on the
/// window, forecasting recursively.
#[derive(Debug, Clone, Copy)]
pub struct ArLeastSquares {
    pub lags: usize,
}

impl Default for ArLeastSquares {
    fn default() -> Self {
        Self { lags: DEFAULT_AR_LAGS }
    }
}

/// Fitted coefficients, expressed on the original (uncentered) scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub intercept: f64,
    /// `coefs[k]` multiplies `y_{t-k-1}`.
    pub coefs: Vec<f64>,
}

impl ArFit {
    pub fn predict_one(&self, recent: &[f64]) -> f64 {
        let n = recent.len();
        self.intercept
            + self
                .coefs
                .iter()
                .enumerate()
                .map(|(k, phi)| phi * recent[n - 1 - k])
                .sum::<f64>()
    }
}

impl ArLeastSquares {
    pub const ID: &'static str = "ar_least_squares";

    pub fn new(lags: usize) -> Self {
        Self { lags }
    }

    pub fn fit(&self, window: &[f64]) -> Result<ArFit, ForecastError> {
        let p = self.lags.max(1);
        require_len(window, 2 * p + 1)?;
        // Centering folds a constant window into the zero problem.
        let mean = window.iter().sum::<f64>() / window.len() as f64;
        let y: Vec<f64> = window.iter().map(|v| v - mean).collect();
        let rows = y.len() - p;
        let design = DMatrix::from_fn(rows, p + 1, |r, c| if c == 0 { 1.0 } else { y[p + r - c] });
        let target = DVector::from_iterator(rows, y[p..].iter().copied());
        let beta = least_squares(&design, &target, RIDGE_FALLBACK)
            .ok_or_else(|| ForecastError::Numerical("singular autoregression".into()))?;
        let coefs: Vec<f64> = beta.iter().skip(1).copied().collect();
        let intercept = beta[0] + mean * (1.0 - coefs.iter().sum::<f64>());
        Ok(ArFit { intercept, coefs })
    }
}

impl Forecaster for ArLeastSquares {
    fn descriptor(&self) -> ModelDescriptor {
        builtin_descriptor(Self::ID, "Linear regression (AR least squares)", "statistical")
    }

    fn forecast(&self, task: &ForecastTask, _history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        let fit = self.fit(&task.window)?;
        let mut path = task.window.clone();
        for _ in 0..task.max_horizon() {
            let next = fit.predict_one(&path);
            path.push(next);
        }
        let base = task.window.len() - 1;
        Ok(task.horizons.iter().map(|&h| path[base + h]).collect())
    }
}
