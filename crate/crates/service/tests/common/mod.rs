#![allow(dead_code)]

use std::path::Path;

use chrono::{Months, NaiveDate};
use dbits_core::config::EvalConfig;
use dbits_core::ingest::to_fredmd_csv;
use dbits_core::{SeriesPanel, Settings};

pub fn eval_config() -> EvalConfig {
    EvalConfig {
        horizons: vec![12, 24],
        ..Default::default()
    }
}

/// Three level series over `n` months with a wiggle set by `seed`.
pub fn fixture_csv(n: usize, seed: u64) -> String {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let dates = (0..n).map(|i| start + Months::new(i as u32)).collect();
    let wiggle = |t: usize| ((t as u64 * 7 + seed * 13) % 11) as f64 / 10.0;
    let cols = vec![
        (0..n).map(|t| Some(1.0 + 0.5 * t as f64)).collect(),
        (0..n)
            .map(|t| Some(10.0 + (t as f64 / 2.0).sin() + wiggle(t)))
            .collect(),
        (0..n).map(|t| Some(5.0 + wiggle(t) * wiggle(t + 3))).collect(),
    ];
    let ids = vec!["RAMP".into(), "CYCLE".into(), "NOISE".into()];
    to_fredmd_csv(&SeriesPanel::new(dates, ids, cols, vec![1, 1, 1]).unwrap())
}

pub fn settings(source: &Path) -> Settings {
    Settings {
        eval: eval_config(),
        source: Some(source.display().to_string()),
        ..Default::default()
    }
}
