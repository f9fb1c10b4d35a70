use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EvalError, MetricRecord};
use crate::config::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model_id: String,
    pub metric_name: Metric,
    pub horizon: usize,
    pub score: f64,
    pub n_records: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankHistoryPoint {
    pub model_id: String,
    pub metric_name: Metric,
    pub horizon: usize,
    pub window_end_origin: usize,
    pub trailing_score: f64,
    pub trailing_rank: usize,
}

/// Mean of the per-record values; root mean square for RMSE.
pub fn aggregate_score(metric: Metric, values: &[f64]) -> f64 {
    let n = values.len() as f64;
    match metric {
        Metric::Rmse => (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt(),
        _ => values.iter().sum::<f64>() / n,
    }
}

/// Orders `(model_id, score)` pairs by ascending score, ties by model id,
/// and returns them with 1-based ranks.
pub fn rank_scores<'a>(scores: impl IntoIterator<Item = (&'a str, f64)>) -> Vec<(&'a str, f64, usize)> {
    let mut v: Vec<(&str, f64)> = scores.into_iter().collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    v.into_iter()
        .enumerate()
        .map(|(i, (id, score))| (id, score, i + 1))
        .collect()
}

fn group_values<'a>(records: impl Iterator<Item = &'a MetricRecord>) -> BTreeMap<&'a str, Vec<f64>> {
    let mut by_model: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_model.entry(r.model_id.as_str()).or_default().push(r.value);
    }
    by_model
}

pub fn aggregate_leaderboard(
    records: &[MetricRecord],
    metric: Metric,
    horizon: usize,
    vintage: &str,
) -> Result<Vec<LeaderboardRow>, EvalError> {
    let by_model = group_values(
        records
            .iter()
            .filter(|r| r.metric_name == metric && r.horizon == horizon && r.vintage_id == vintage),
    );
    if by_model.is_empty() {
        return Err(EvalError::EmptyGroup);
    }
    let counts: BTreeMap<&str, usize> = by_model.iter().map(|(k, v)| (*k, v.len())).collect();
    let ranked = rank_scores(by_model.iter().map(|(id, vals)| (*id, aggregate_score(metric, vals))));
    Ok(ranked
        .into_iter()
        .map(|(id, score, rank)| LeaderboardRow {
            model_id: id.to_string(),
            metric_name: metric,
            horizon,
            score,
            n_records: counts[id],
            rank,
        })
        .collect())
}

/// Re-ranks models over each trailing window of `k` consecutive origins.
/// Points are ordered by window end, then rank.
pub fn rolling_rank_history(
    records: &[MetricRecord],
    metric: Metric,
    horizon: usize,
    k: usize,
) -> Result<Vec<RankHistoryPoint>, EvalError> {
    let group: Vec<&MetricRecord> = records
        .iter()
        .filter(|r| r.metric_name == metric && r.horizon == horizon)
        .collect();
    let origins: Vec<usize> = group
        .iter()
        .map(|r| r.origin_index)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if k == 0 || origins.len() < k {
        return Err(EvalError::TooFewOrigins {
            need: k,
            got: origins.len(),
        });
    }
    let mut by_origin: BTreeMap<usize, Vec<&MetricRecord>> = BTreeMap::new();
    for r in group {
        by_origin.entry(r.origin_index).or_default().push(r);
    }

    let mut points = Vec::new();
    for end in (k - 1)..origins.len() {
        let span = &origins[end + 1 - k..=end];
        let scores = group_values(span.iter().flat_map(|o| by_origin[o].iter().copied()));
        let ranked = rank_scores(scores.iter().map(|(id, vals)| (*id, aggregate_score(metric, vals))));
        points.extend(ranked.into_iter().map(|(id, score, rank)| RankHistoryPoint {
            model_id: id.to_string(),
            metric_name: metric,
            horizon,
            window_end_origin: origins[end],
            trailing_score: score,
            trailing_rank: rank,
        }));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(model: &str, series: &str, origin: usize, value: f64) -> MetricRecord {
        MetricRecord {
            vintage_id: "2024-11".into(),
            model_id: model.into(),
            series_id: series.into(),
            origin_index: origin,
            horizon: 12,
            metric_name: Metric::Mae,
            value,
            substituted: None,
        }
    }

    #[test]
    fn singleton_and_order() {
        let rows = aggregate_leaderboard(&[rec("a", "s", 0, 3.0)], Metric::Mae, 12, "2024-11").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].rank, 1);
        let rows = aggregate_leaderboard(
            &[rec("z", "s", 0, 1.0), rec("b", "s", 0, 2.0)],
            Metric::Mae,
            12,
            "2024-11",
        )
        .unwrap();
        assert_eq!((rows[0].model_id.as_str(), rows[0].rank), ("z", 1));
        assert_eq!((rows[1].model_id.as_str(), rows[1].rank), ("b", 2));
    }

    #[test]
    fn ties_break_by_model_id() {
        let rows = aggregate_leaderboard(
            &[rec("beta", "s", 0, 1.0), rec("alpha", "s", 0, 1.0)],
            Metric::Mae,
            12,
            "2024-11",
        )
        .unwrap();
        assert_eq!(rows[0].model_id, "alpha");
        assert_eq!(rows[1].model_id, "beta");
    }

    #[test]
    fn rmse_aggregates_in_square() {
        let mut records = vec![rec("a", "s", 0, 3.0), rec("a", "s", 1, 4.0)];
        for r in &mut records {
            r.metric_name = Metric::Rmse;
        }
        let rows = aggregate_leaderboard(&records, Metric::Rmse, 12, "2024-11").unwrap();
        assert!((rows[0].score - 12.5_f64.sqrt()).abs() < 1e-12);
        assert_eq!(rows[0].n_records, 2);
    }

    #[test]
    fn empty_group() {
        assert_eq!(
            aggregate_leaderboard(&[rec("a", "s", 0, 1.0)], Metric::Mae, 24, "2024-11"),
            Err(EvalError::EmptyGroup)
        );
        assert_eq!(
            aggregate_leaderboard(&[rec("a", "s", 0, 1.0)], Metric::Mae, 12, "1999-01"),
            Err(EvalError::EmptyGroup)
        );
    }

    #[test]
    fn rank_flip_in_history() {
        let mut records = Vec::new();
        for (o, (a, b)) in [(0.0, 1.0), (0.0, 1.0), (4.0, 1.0)].into_iter().enumerate() {
            records.push(rec("a", "s", o, a));
            records.push(rec("b", "s", o, b));
        }
        let h = rolling_rank_history(&records, Metric::Mae, 12, 2).unwrap();
        let of = |m: &str| -> Vec<(f64, usize)> {
            h.iter()
                .filter(|p| p.model_id == m)
                .map(|p| (p.trailing_score, p.trailing_rank))
                .collect()
        };
        assert_eq!(of("a"), vec![(0.0, 1), (2.0, 2)]);
        assert_eq!(of("b"), vec![(1.0, 2), (1.0, 1)]);
        assert_eq!(h[0].window_end_origin, 1);
    }

    #[test]
    fn single_model_history_is_always_first() {
        let records: Vec<_> = (0..30).map(|o| rec("a", "s", o, o as f64)).collect();
        let h = rolling_rank_history(&records, Metric::Mae, 12, 24).unwrap();
        assert_eq!(h.len(), 7);
        assert!(h.iter().all(|p| p.trailing_rank == 1));
    }

    #[test]
    fn too_few_origins() {
        let records: Vec<_> = (0..10).map(|o| rec("a", "s", o, 1.0)).collect();
        assert_eq!(
            rolling_rank_history(&records, Metric::Mae, 12, 24),
            Err(EvalError::TooFewOrigins { need: 24, got: 10 })
        );
    }
}
