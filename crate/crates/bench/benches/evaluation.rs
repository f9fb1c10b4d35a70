use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use dbits_core::ingest::to_fredmd_csv;
use dbits_core::{
    aggregate_leaderboard, build_transformed_panel, builtin_models, parse_fredmd, run_evaluation, EvalConfig, Metric,
    ModelSpec, Space, TransformedPanel,
};

/// A FRED-MD style panel of `series` level series over `months` months.
fn panel(series: usize, months: usize) -> TransformedPanel {
    let mut csv = String::from("sasdate");
    for s in 0..series {
        csv.push_str(&format!(",S{s}"));
    }
    csv.push_str("\nTransform:");
    csv.push_str(&",1".repeat(series));
    csv.push('\n');
    for t in 0..months {
        csv.push_str(&format!("{}/1/{}", t % 12 + 1, 1960 + t / 12));
        for s in 0..series {
            let v = 10.0 + s as f64 + 0.05 * t as f64 + ((t * (s + 3)) % 13) as f64 * 0.3;
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    let raw = parse_fredmd(csv.as_bytes()).unwrap();
    build_transformed_panel(&raw, Space::Transformed).unwrap()
}

fn full_run(c: &mut Criterion) {
    let cfg = EvalConfig::default();
    let models: Vec<ModelSpec> = builtin_models(&cfg).into_iter().map(ModelSpec::Builtin).collect();
    let mut group = c.benchmark_group("run_evaluation");
    group.sample_size(10);
    for series in [10, 40] {
        let p = panel(series, 240);
        group.throughput(Throughput::Elements(series as u64));
        group.bench_with_input(BenchmarkId::new("series", series), &p, |b, p| {
            b.iter(|| run_evaluation(black_box(p), &cfg, &models, "2024-11").unwrap())
        });
    }
    group.finish();
}

fn leaderboard(c: &mut Criterion) {
    let cfg = EvalConfig::default();
    let models: Vec<ModelSpec> = builtin_models(&cfg).into_iter().map(ModelSpec::Builtin).collect();
    let records = run_evaluation(&panel(20, 240), &cfg, &models, "2024-11")
        .unwrap()
        .records;
    c.bench_function("aggregate_leaderboard", |b| {
        b.iter(|| aggregate_leaderboard(black_box(&records), Metric::Mase, 12, "2024-11").unwrap())
    });
}

fn ingest(c: &mut Criterion) {
    let csv = to_fredmd_csv(&panel(120, 780));
    c.bench_function("parse_fredmd_120x780", |b| {
        b.iter(|| parse_fredmd(black_box(csv.as_bytes())).unwrap())
    });
}

criterion_group!(benches, full_run, leaderboard, ingest);
criterion_main!(benches);
