use super::{builtin_descriptor, require_len, ForecastError, ForecastTask, Forecaster, ModelDescriptor};

/// Holt's additive-trend exponential smoothing.
///
/// Without fixed parameters, `(alpha, beta)` is chosen from the
/// `{0.05, 0.15, ..., 0.95}` grid by in-sample one-step squared error, with
/// ties going to the smaller alpha, then the smaller beta.
#[derive(Debug, Clone, Copy, Default)]
pub struct EtsHolt {
    pub fixed: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltFit {
    pub alpha: f64,
    pub beta: f64,
    pub level: f64,
    pub trend: f64,
    pub sse: f64,
}

impl HoltFit {
    pub fn forecast(&self, h: usize) -> f64 {
        self.level + h as f64 * self.trend
    }
}

fn grid() -> impl Iterator<Item = f64> + Clone {
    (0..10).map(|k| (2 * k + 1) as f64 * 0.05)
}

impl EtsHolt {
    pub const ID: &'static str = "ets";

    pub fn with_params(alpha: f64, beta: f64) -> Self {
        Self {
            fixed: Some((alpha, beta)),
        }
    }

    /// Runs the recursion from `l_0 = y_0`, `b_0 = 0`.
    pub fn smooth(window: &[f64], alpha: f64, beta: f64) -> HoltFit {
        let mut level = window[0];
        let mut trend = 0.0;
        let mut sse = 0.0;
        for &y in &window[1..] {
            let err = y - (level + trend);
            sse += err * err;
            let prev = level;
            level = alpha * y + (1.0 - alpha) * (level + trend);
            trend = beta * (level - prev) + (1.0 - beta) * trend;
        }
        HoltFit {
            alpha,
            beta,
            level,
            trend,
            sse,
        }
    }

    pub fn fit(&self, window: &[f64]) -> Result<HoltFit, ForecastError> {
        require_len(window, 2)?;
        if let Some((alpha, beta)) = self.fixed {
            return Ok(Self::smooth(window, alpha, beta));
        }
        let mut best: Option<HoltFit> = None;
        for alpha in grid() {
            for beta in grid() {
                let fit = Self::smooth(window, alpha, beta);
                if best.is_none_or(|b| fit.sse < b.sse) {
                    best = Some(fit);
                }
            }
        }
        Ok(best.expect("grid is nonempty"))
    }
}

impl Forecaster for EtsHolt {
    fn descriptor(&self) -> ModelDescriptor {
        builtin_descriptor(Self::ID, "ETS (Holt linear trend)", "statistical")
    }

    fn forecast(&self, task: &ForecastTask, _history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        let fit = self.fit(&task.window)?;
        Ok(task.horizons.iter().map(|&h| fit.forecast(h)).collect())
    }
}
