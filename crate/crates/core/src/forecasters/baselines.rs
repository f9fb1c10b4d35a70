use super::{builtin_descriptor, require_len, ForecastError, ForecastTask, Forecaster, ModelDescriptor};

/// Mean of the window at every horizon.
#[derive(Debug, Clone, Copy, Default)]
pub struct HistoricalAverage;

impl HistoricalAverage {
    pub const ID: &'static str = "historical_average";
}

impl Forecaster for HistoricalAverage {
    fn descriptor(&self) -> ModelDescriptor {
        builtin_descriptor(Self::ID, "Historical average", "statistical")
    }

    fn forecast(&self, task: &ForecastTask, _history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        require_len(&task.window, 1)?;
        let mean = task.window.iter().sum::<f64>() / task.window.len() as f64;
        Ok(vec![mean; task.horizons.len()])
    }
}

/// Least-squares line through the window against its time index.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearTrend;

impl LinearTrend {
    pub const ID: &'static str = "linear_trend";

    /// `(intercept, slope)` for time indices `0..n`.
    pub fn fit(window: &[f64]) -> Result<(f64, f64), ForecastError> {
        require_len(window, 2)?;
        let n = window.len() as f64;
        let t_mean = (n - 1.0) / 2.0;
        let y_mean = window.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, y) in window.iter().enumerate() {
            let dt = t as f64 - t_mean;
            sxy += dt * (y - y_mean);
            sxx += dt * dt;
        }
        let slope = sxy / sxx;
        Ok((y_mean - slope * t_mean, slope))
    }
}

impl Forecaster for LinearTrend {
    fn descriptor(&self) -> ModelDescriptor {
        builtin_descriptor(Self::ID, "Linear trend", "statistical")
    }

    fn forecast(&self, task: &ForecastTask, _history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        let window = &task.window;
        let (_, slope) = Self::fit(window)?;
        // Anchored at the window mean so a constant shift moves forecasts exactly.
        let n = window.len() as f64;
        let t_mean = (n - 1.0) / 2.0;
        let y_mean = window.iter().sum::<f64>() / n;
        Ok(task
            .horizons
            .iter()
            .map(|&h| y_mean + slope * (n - 1.0 + h as f64 - t_mean))
            .collect())
    }
}

/// Repeats the last observed season.
#[derive(Debug, Clone, Copy)]
pub struct SeasonalNaive {
    pub season: usize,
}

impl SeasonalNaive {
    pub const ID: &'static str = "seasonal_naive";

    pub fn new(season: usize) -> Self {
        Self { season }
    }
}

impl Default for SeasonalNaive {
    fn default() -> Self {
        Self::new(12)
    }
}

impl Forecaster for SeasonalNaive {
    fn descriptor(&self) -> ModelDescriptor {
        builtin_descriptor(Self::ID, "Seasonal naive", "statistical")
    }

    fn forecast(&self, task: &ForecastTask, _history: &[f64]) -> Result<Vec<f64>, ForecastError> {
        let m = self.season.max(1);
        require_len(&task.window, m)?;
        let len = task.window.len();
        Ok(task
            .horizons
            .iter()
            .map(|&h| task.window[len - m + (h - 1) % m])
            .collect())
    }
}
