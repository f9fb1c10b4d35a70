mod common;

use std::collections::BTreeMap;

use dbits_core::config::{EvalConfig, Metric, Space};
use dbits_core::eval::{compute_metrics, make_rolling_splits, splits_for_range};
use dbits_core::forecasters::{builtin, HistoricalAverage, LinearTrend, NLinear, SeasonalNaive};
use dbits_core::{run_evaluation, ModelSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force metric definitions, written index by index.
fn reference_metrics(forecast: f64, actual: f64, window: &[f64], season: usize) -> BTreeMap<Metric, Option<f64>> {
    let diff = if forecast > actual {
        forecast - actual
    } else {
        actual - forecast
    };
    let mut out = BTreeMap::new();
    out.insert(Metric::Mae, Some(diff));
    out.insert(Metric::Rmse, Some((diff * diff).sqrt()));
    let denom = forecast.abs() + actual.abs();
    out.insert(
        Metric::Smape,
        Some(if denom == 0.0 { 0.0 } else { 2.0 * diff / denom * 100.0 }),
    );
    let mut total = 0.0;
    let mut count = 0usize;
    let mut t = season;
    while t < window.len() {
        let d = window[t] - window[t - season];
        total += if d < 0.0 { -d } else { d };
        count += 1;
        t += 1;
    }
    let scale = if count == 0 { 0.0 } else { total / count as f64 };
    out.insert(Metric::Mase, if scale == 0.0 { None } else { Some(diff / scale) });
    out
}

fn brute_force_origins(len: usize, lookback: usize, h: usize) -> Vec<usize> {
    (0..len).filter(|&t| t + 1 >= lookback && t + h < len).collect()
}

#[test]
fn metrics_match_reference() {
    let cfg = EvalConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let forecast = rng.random_range(-100.0..100.0);
        let actual = rng.random_range(-100.0..100.0);
        let window: Vec<f64> = (0..96).map(|_| rng.random_range(-50.0..50.0)).collect();
        let got = compute_metrics(forecast, actual, &window, &cfg);
        let want = reference_metrics(forecast, actual, &window, cfg.season);
        for (m, v) in got {
            let w = want[&m].unwrap();
            let v = v.unwrap();
            assert!((v - w).abs() <= 1e-12 * w.abs().max(1.0), "{m}: {v} vs {w}");
        }
    }
}

proptest! {
    #[test]
    fn split_count_law(len in 90usize..320, h in prop::sample::select(vec![1usize, 12, 24, 36, 48, 60])) {
        let cfg = EvalConfig { horizons: vec![h], ..Default::default() };
        let splits = if len == 0 { vec![] } else { splits_for_range(0, len - 1, &cfg) };
        let expected = len.saturating_sub(cfg.lookback + h - 1);
        prop_assert_eq!(splits.len(), expected);
        let origins: Vec<usize> = splits.iter().map(|s| s.origin_index).collect();
        prop_assert_eq!(origins, brute_force_origins(len, cfg.lookback, h));
    }

    #[test]
    fn splits_never_leak(len in 100usize..250, start in 0usize..30, stride in 1usize..4) {
        let cfg = EvalConfig { stride, ..Default::default() };
        for s in splits_for_range(start, start + len - 1, &cfg) {
            prop_assert!(s.window_start >= start);
            prop_assert_eq!(s.origin_index + 1 - s.window_start, cfg.lookback);
            prop_assert!(s.target_index > s.origin_index);
            prop_assert!(s.target_index < start + len);
            prop_assert_eq!(s.target_index - s.origin_index, s.horizon);
        }
    }
}

#[test]
fn split_examples_on_panel() {
    let mut short = vec![None; 4];
    short.extend(vec![Some(1.0); 96]);
    let p = common::panel_with_gaps(vec![("A", vec![Some(1.0); 100]), ("B", short)]);
    let cfg = EvalConfig {
        horizons: vec![1],
        ..Default::default()
    };
    let a = make_rolling_splits(&p, &cfg, "A").unwrap();
    assert_eq!(
        a.iter().map(|s| s.origin_index).collect::<Vec<_>>(),
        vec![95, 96, 97, 98]
    );
    assert!(make_rolling_splits(&p, &cfg, "B").is_err());
    assert!(make_rolling_splits(&p, &cfg, "C").is_err());
}

#[test]
fn constant_series_scores_zero() {
    let p = common::panel(vec![("C", vec![2.5; 110])]);
    let cfg = EvalConfig {
        horizons: vec![12],
        ..Default::default()
    };
    let models = vec![ModelSpec::Builtin(std::sync::Arc::new(HistoricalAverage))];
    let out = run_evaluation(&p, &cfg, &models, "2024-11").unwrap();
    let abs: Vec<_> = out
        .records
        .iter()
        .filter(|r| matches!(r.metric_name, Metric::Mae | Metric::Rmse))
        .collect();
    assert_eq!(abs.len(), 2 * 3);
    assert!(abs.iter().all(|r| r.value == 0.0));
    // MASE is undefined on a flat window.
    assert!(out.records.iter().all(|r| r.metric_name != Metric::Mase));
    assert_eq!(out.mase_undefined.get("C"), Some(&3));
}

#[test]
fn ramp_separates_trend_from_average() {
    let p = common::panel(vec![("R", common::ramp(130, 1.0, 0.5))]);
    let cfg = EvalConfig {
        horizons: vec![12, 24],
        ..Default::default()
    };
    let models = vec![
        ModelSpec::Builtin(std::sync::Arc::new(LinearTrend)),
        ModelSpec::Builtin(std::sync::Arc::new(HistoricalAverage)),
    ];
    let out = run_evaluation(&p, &cfg, &models, "v").unwrap();
    for r in &out.records {
        if r.model_id == "linear_trend" {
            assert!(r.value.abs() < 1e-9, "{r:?}");
        } else {
            assert!(r.value > 0.0, "{r:?}");
        }
    }
}

#[test]
fn mase_is_scale_invariant() {
    let base = common::ar1(140, 0.7, 5)
        .into_iter()
        .map(|v| v + 50.0)
        .collect::<Vec<_>>();
    let scaled: Vec<f64> = base.iter().map(|v| v * 37.5).collect();
    let cfg = EvalConfig {
        horizons: vec![12, 24],
        metrics: vec![Metric::Mase],
        space: Space::Raw,
        ..Default::default()
    };
    let models: Vec<ModelSpec> = [HistoricalAverage::ID, LinearTrend::ID, SeasonalNaive::ID, NLinear::ID]
        .iter()
        .map(|id| ModelSpec::Builtin(builtin(id, &cfg).unwrap()))
        .collect();
    let a = run_evaluation(&common::panel(vec![("S", base)]), &cfg, &models, "v").unwrap();
    let b = run_evaluation(&common::panel(vec![("S", scaled)]), &cfg, &models, "v").unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(
            (&x.model_id, x.origin_index, x.horizon),
            (&y.model_id, y.origin_index, y.horizon)
        );
        assert!(
            (x.value - y.value).abs() <= 1e-9 * x.value.abs().max(1.0),
            "{x:?} vs {y:?}"
        );
    }
}

#[test]
fn runs_are_deterministic() {
    let p = common::desk_panel(3);
    let cfg = EvalConfig {
        horizons: vec![12, 24],
        ..Default::default()
    };
    let models: Vec<ModelSpec> = dbits_core::builtin_models(&cfg)
        .into_iter()
        .map(ModelSpec::Builtin)
        .collect();
    let a = run_evaluation(&p, &cfg, &models, "v").unwrap();
    let b = run_evaluation(&p, &cfg, &models, "v").unwrap();
    let lines = |o: &dbits_core::EvalOutcome| o.records.iter().map(|r| r.to_line()).collect::<Vec<_>>().join("\n");
    assert_eq!(lines(&a), lines(&b));
}

#[test]
fn nlinear_falls_back_until_trainable() {
    let p = common::panel(vec![("S", common::ar1(150, 0.5, 9))]);
    let cfg = EvalConfig {
        horizons: vec![12],
        metrics: vec![Metric::Mae],
        primary_metric: Metric::Mae,
        ..Default::default()
    };
    let models = vec![ModelSpec::Builtin(std::sync::Arc::new(NLinear::default()))];
    let out = run_evaluation(&p, &cfg, &models, "v").unwrap();
    for r in &out.records {
        // Training needs 96 + 12 values of history up to the origin.
        let trainable = r.origin_index + 1 >= 108;
        assert_eq!(r.substituted.is_none(), trainable, "{r:?}");
        if !trainable {
            assert_eq!(r.substituted.as_deref(), Some("historical_average"));
        }
    }
}

#[test]
fn invalid_inputs() {
    let p = common::panel(vec![("S", vec![1.0; 50])]);
    let cfg = EvalConfig::default();
    let models = vec![ModelSpec::Builtin(std::sync::Arc::new(HistoricalAverage))];
    assert_eq!(
        run_evaluation(&p, &cfg, &models, "v").unwrap_err(),
        dbits_core::EvalError::NoEvaluableSeries
    );
    assert!(matches!(
        run_evaluation(&p, &cfg, &[], "v"),
        Err(dbits_core::EvalError::ConfigInvalid(_))
    ));
    let bad = EvalConfig {
        stride: 0,
        ..Default::default()
    };
    assert!(matches!(
        run_evaluation(&p, &bad, &models, "v"),
        Err(dbits_core::EvalError::ConfigInvalid(_))
    ));
}
