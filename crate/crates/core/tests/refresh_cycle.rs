mod common;

use std::path::Path;

use dbits_core::config::{EvalConfig, Settings};
use dbits_core::ingest::to_fredmd_csv;
use dbits_core::{refresh_cycle, RefreshOutcome, Store};

fn write_vintage(path: &Path, seed: u64) {
    let p = common::panel(vec![
        ("RAMP", common::ramp(115, 1.0, 0.5)),
        ("AR", common::ar1(115, 0.5, seed)),
    ]);
    std::fs::write(path, to_fredmd_csv(&p)).unwrap();
}

fn settings(source: &Path) -> Settings {
    Settings {
        eval: EvalConfig {
            horizons: vec![12],
            ..Default::default()
        },
        source: Some(source.display().to_string()),
        ..Default::default()
    }
}

#[test]
fn new_content_commits_once() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("2024-11.csv");
    write_vintage(&src, 1);
    let store = Store::open(dir.path().join("store")).unwrap();
    let s = settings(&src);

    let RefreshOutcome::Refreshed { run, incidents } = refresh_cycle(&s, &store) else {
        panic!("first cycle should commit");
    };
    assert!(incidents.is_empty(), "{incidents:?}");
    assert_eq!(run.vintage_id, "2024-11");
    assert_eq!(run.model_ids.len(), 6);
    assert!(run.record_count > 0);
    for _ in 0..4 {
        assert_eq!(refresh_cycle(&s, &store), RefreshOutcome::NoChange);
    }
    assert_eq!(store.list_runs().unwrap().len(), 1);
    assert_eq!(store.list_vintages().unwrap().len(), 1);
    assert_eq!(store.latest_vintage().unwrap().unwrap().id, "2024-11");
}

#[test]
fn malformed_vintage_keeps_previous_run() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("2024-11.csv");
    write_vintage(&src, 2);
    let store = Store::open(dir.path().join("store")).unwrap();
    let s = settings(&src);
    assert!(matches!(refresh_cycle(&s, &store), RefreshOutcome::Refreshed { .. }));
    let before = store.list_runs().unwrap();

    std::fs::write(&src, "sasdate,A\nTransform:,9\n1/1/2000,1\n").unwrap();
    let RefreshOutcome::Failed(message) = refresh_cycle(&s, &store) else {
        panic!("malformed input should fail");
    };
    assert!(message.contains("tcode") || message.contains("transform"), "{message}");
    assert_eq!(store.list_runs().unwrap(), before);
    assert_eq!(store.list_vintages().unwrap().len(), 1);

    // A different file carrying the same month clashes with the committed run.
    write_vintage(&src, 3);
    assert!(matches!(refresh_cycle(&s, &store), RefreshOutcome::Failed(m) if m.contains("run")));
    assert_eq!(store.list_runs().unwrap(), before);

    let next = dir.path().join("2024-12.csv");
    write_vintage(&next, 3);
    let RefreshOutcome::Refreshed { run, .. } = refresh_cycle(&settings(&next), &store) else {
        panic!("next month should commit");
    };
    assert_eq!(run.vintage_id, "2024-12");
    assert_eq!(store.list_runs().unwrap().len(), 2);
    assert_eq!(store.latest_vintage().unwrap().unwrap().id, "2024-12");
}

#[test]
fn missing_source_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let mut s = settings(&dir.path().join("absent.csv"));
    assert!(matches!(refresh_cycle(&s, &store), RefreshOutcome::Failed(_)));
    s.source = None;
    assert!(matches!(refresh_cycle(&s, &store), RefreshOutcome::Failed(_)));
    assert!(store.list_runs().unwrap().is_empty());
}

#[test]
fn registry_change_reevaluates_unchanged_data() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("2024-11.csv");
    write_vintage(&src, 5);
    let store = Store::open(dir.path().join("store")).unwrap();
    let s = settings(&src);
    assert!(matches!(refresh_cycle(&s, &store), RefreshOutcome::Refreshed { .. }));

    let manifest = dir.path().join("ets.toml");
    std::fs::write(&manifest, "kind = \"builtin\"\nmodel_id = \"ets\"\n").unwrap();
    dbits_core::register_from_path(&store, &manifest, &s.eval).unwrap();
    let RefreshOutcome::Refreshed { run, .. } = refresh_cycle(&s, &store) else {
        panic!("new model set should be evaluated");
    };
    assert_eq!(run.model_ids, vec!["ets".to_string()]);
    assert_eq!(refresh_cycle(&s, &store), RefreshOutcome::NoChange);
    assert_eq!(store.list_runs().unwrap().len(), 2);
    assert_eq!(store.list_vintages().unwrap().len(), 1);
}
