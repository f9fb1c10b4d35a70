use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::config::EvalConfig;
use crate::ingest::TransformedPanel;

/// One (origin, horizon) evaluation point of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SplitTask {
    pub origin_index: usize,
    pub horizon: usize,
    /// First index of the look-back window; the window ends at the origin.
    pub window_start: usize,
    pub target_index: usize,
}

/// Longest run of consecutive observed values, as inclusive indices. Ties
/// go to the most recent run.
pub fn usable_range(column: &[Option<f64>]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, v) in column.iter().enumerate() {
        match (v.is_some(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                best = longer(best, (s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        best = longer(best, (s, column.len() - 1));
    }
    best
}

fn longer(best: Option<(usize, usize)>, run: (usize, usize)) -> Option<(usize, usize)> {
    match best {
        Some((s, e)) if e - s > run.1 - run.0 => best,
        _ => Some(run),
    }
}

/// Splits inside a fully observed range `[start, end]`, ordered by origin
/// then horizon.
pub fn splits_for_range(start: usize, end: usize, cfg: &EvalConfig) -> Vec<SplitTask> {
    let lookback = cfg.lookback;
    let first_origin = start + lookback - 1;
    let mut out = Vec::new();
    let mut origin = first_origin;
    while origin < end {
        for &h in &cfg.horizons {
            if origin + h <= end {
                out.push(SplitTask {
                    origin_index: origin,
                    horizon: h,
                    window_start: origin + 1 - lookback,
                    target_index: origin + h,
                });
            }
        }
        origin += cfg.stride.max(1);
    }
    out
}

pub fn make_rolling_splits(
    panel: &TransformedPanel,
    cfg: &EvalConfig,
    series_id: &str,
) -> Result<Vec<SplitTask>, EvalError> {
    let column = panel
        .column_by_id(series_id)
        .ok_or_else(|| EvalError::UnknownSeries(series_id.to_string()))?;
    let splits = usable_range(column)
        .map(|(s, e)| splits_for_range(s, e, cfg))
        .unwrap_or_default();
    if splits.is_empty() {
        return Err(EvalError::SeriesTooShort(series_id.to_string()));
    }
    Ok(splits)
}
