#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{Months, NaiveDate};
use dbits_core::ingest::SeriesPanel;
use dbits_core::TransformedPanel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn stub_dir(mode: &str) -> PathBuf {
    fixtures().join("adapters").join(mode)
}

pub fn reference_adapter() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../adapters/last_value")
}

pub fn months(n: usize) -> Vec<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    (0..n).map(|i| start + Months::new(i as u32)).collect()
}

/// Level panel (tcode 1 everywhere) from named columns.
pub fn panel(columns: Vec<(&str, Vec<f64>)>) -> TransformedPanel {
    panel_with_gaps(
        columns
            .into_iter()
            .map(|(id, v)| (id, v.into_iter().map(Some).collect()))
            .collect(),
    )
}

pub fn panel_with_gaps(columns: Vec<(&str, Vec<Option<f64>>)>) -> TransformedPanel {
    let n = columns[0].1.len();
    let ids = columns.iter().map(|(id, _)| id.to_string()).collect();
    let tcodes = vec![1; columns.len()];
    let cols = columns.into_iter().map(|(_, v)| v).collect();
    TransformedPanel {
        panel: SeriesPanel::new(months(n), ids, cols, tcodes).unwrap(),
        transform_applied: false,
    }
}

pub fn ramp(n: usize, intercept: f64, slope: f64) -> Vec<f64> {
    (0..n).map(|t| intercept + slope * t as f64).collect()
}

pub fn seasonal(n: usize, amplitude: f64) -> Vec<f64> {
    (0..n)
        .map(|t| 10.0 + amplitude * (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin())
        .collect()
}

pub fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0];
    for _ in 1..n {
        let prev = *y.last().unwrap();
        y.push(phi * prev + rng.random_range(-1.0..1.0));
    }
    y
}

/// Ten series of 150 months: constants, ramps, seasonal and AR(1) noise.
pub fn desk_panel(seed: u64) -> TransformedPanel {
    panel(vec![
        ("CONST_A", vec![4.0; 150]),
        ("CONST_B", vec![-1.5; 150]),
        ("RAMP", ramp(150, 2.0, 0.75)),
        ("RAMP_STEEP", ramp(150, -10.0, 3.0)),
        ("SEASON_A", seasonal(150, 2.0)),
        ("SEASON_B", seasonal(150, 5.0)),
        ("AR_A", ar1(150, 0.6, seed)),
        ("AR_B", ar1(150, 0.9, seed + 1)),
        ("AR_C", ar1(150, -0.3, seed + 2)),
        ("AR_D", ar1(150, 0.2, seed + 3)),
    ])
}
