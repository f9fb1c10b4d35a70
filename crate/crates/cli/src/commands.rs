use std::net::SocketAddr;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use dbits_core::adapter::{conformance_check, load_manifest};
use dbits_core::refresh::{evaluate_vintage, resolve_models};
use dbits_core::{
    aggregate_leaderboard, build_transformed_panel, fetch_vintage, parse_fredmd, refresh_cycle, register_from_path,
    FetchOutcome, Metric, RefreshOutcome, RegisterError, Settings, Store,
};
use dbits_service::ServiceConfig;

use crate::args::{Cli, Command};

pub fn run(cli: Cli) -> Result<ExitCode> {
    let store_root = cli.store;
    match cli.command {
        Command::Ingest { settings } => ingest(&open(&store_root)?, &settings.resolve()?),
        Command::Eval { settings, vintage } => eval(&open(&store_root)?, &settings.resolve()?, vintage.as_deref()),
        Command::Refresh { settings } => refresh(&open(&store_root)?, &settings.resolve()?),
        Command::Rank {
            metric,
            horizon,
            vintage,
            json,
        } => rank(&open_existing(&store_root)?, metric, horizon, vintage.as_deref(), json),
        Command::AdapterTest { manifest, settings } => adapter_test(&manifest, &settings.resolve()?),
        Command::Register { manifest, settings } => register(&open(&store_root)?, &manifest, &settings.resolve()?),
        Command::Models => models(&open_existing(&store_root)?),
        Command::Serve {
            port,
            bind,
            static_dir,
            no_refresh,
            allow_remote_refresh,
            settings,
        } => {
            let mut config = ServiceConfig::new(settings.resolve()?);
            config.static_dir = static_dir;
            config.background_refresh = !no_refresh;
            config.allow_remote_refresh = allow_remote_refresh;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(dbits_service::serve(store_root, config, SocketAddr::new(bind, port)))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn open(root: &Path) -> Result<Store> {
    Store::open(root).with_context(|| format!("opening store {}", root.display()))
}

fn open_existing(root: &Path) -> Result<Store> {
    Store::open_existing(root).with_context(|| format!("no store at {}", root.display()))
}

fn source(settings: &Settings) -> Result<&str> {
    settings
        .source
        .as_deref()
        .ok_or_else(|| anyhow!("no source given; pass --source or set `source` in the config file"))
}

fn ingest(store: &Store, settings: &Settings) -> Result<ExitCode> {
    let previous = store.latest_vintage()?.map(|v| v.content_hash);
    match fetch_vintage(source(settings)?, previous.as_deref())? {
        FetchOutcome::NoNewVintage => println!("no new vintage"),
        FetchOutcome::New { bytes, vintage } => {
            let panel = parse_fredmd(&bytes)?;
            build_transformed_panel(&panel, settings.eval.space)?;
            store.put_vintage(&vintage, &bytes)?;
            println!(
                "stored vintage {} ({} series, {} months) {}",
                vintage.id,
                panel.n_series(),
                panel.n_dates(),
                vintage.content_hash
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn eval(store: &Store, settings: &Settings, vintage_id: Option<&str>) -> Result<ExitCode> {
    let (vintage, raw) = match (&settings.source, vintage_id) {
        (Some(src), None) => match fetch_vintage(src, None)? {
            FetchOutcome::New { bytes, vintage } => (vintage, bytes),
            FetchOutcome::NoNewVintage => unreachable!("no previous hash was given"),
        },
        (_, id) => {
            let vintages = store.list_vintages()?;
            let vintage = match id {
                Some(id) => vintages.into_iter().rev().find(|v| v.id == id),
                None => vintages.into_iter().last(),
            }
            .ok_or_else(|| anyhow!("no stored vintage to evaluate; run `dbits ingest` or pass --source"))?;
            let raw = store.vintage_bytes(&vintage.content_hash)?;
            (vintage, raw)
        }
    };
    let (models, incidents) = resolve_models(store, settings)?;
    if models.is_empty() {
        bail!("no usable models in the registry");
    }
    let (run, outcome) = evaluate_vintage(store, settings, &vintage, &raw, &models)?;
    println!(
        "run {} vintage {} records {}",
        run.run_id, run.vintage_id, run.record_count
    );
    for (series, reason) in &outcome.skipped_series {
        println!("skipped series {series}: {reason}");
    }
    for (series, n) in &outcome.mase_undefined {
        println!("MASE undefined for {series} at {n} origins");
    }
    for i in incidents.iter().chain(&outcome.incidents) {
        println!(
            "incident model={} series={}: {}",
            i.model_id.as_deref().unwrap_or("-"),
            i.series_id.as_deref().unwrap_or("-"),
            i.message
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn refresh(store: &Store, settings: &Settings) -> Result<ExitCode> {
    match refresh_cycle(settings, store) {
        RefreshOutcome::Refreshed { run, incidents } => {
            println!(
                "refreshed run {} vintage {} records {}",
                run.run_id, run.vintage_id, run.record_count
            );
            for i in incidents {
                println!("incident model={}: {}", i.model_id.as_deref().unwrap_or("-"), i.message);
            }
            Ok(ExitCode::SUCCESS)
        }
        RefreshOutcome::NoChange => {
            println!("no change");
            Ok(ExitCode::SUCCESS)
        }
        RefreshOutcome::Failed(message) => bail!("refresh failed: {message}"),
    }
}

fn rank(store: &Store, metric: Metric, horizon: usize, vintage: Option<&str>, json: bool) -> Result<ExitCode> {
    let vintage = match vintage {
        Some(v) => v.to_string(),
        None => store
            .list_runs()?
            .into_iter()
            .map(|r| r.vintage_id)
            .max()
            .ok_or_else(|| anyhow!("the store has no committed runs"))?,
    };
    let run = store
        .latest_run(Some(&vintage))?
        .ok_or_else(|| anyhow!("no committed run for vintage {vintage}"))?;
    if !run.config.horizons.contains(&horizon) {
        bail!(
            "horizon {horizon} is not one of the run's horizons {:?}",
            run.config.horizons
        );
    }
    let records = store.run_records(&run)?;
    let rows = aggregate_leaderboard(&records, metric, horizon, &vintage)?;
    if json {
        println!("{}", serde_json::to_string(&rows)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("vintage {vintage}  metric {metric}  horizon {horizon}");
    println!("{:>4}  {:<24} {:>14} {:>9}", "rank", "model", "score", "records");
    for r in rows {
        println!("{:>4}  {:<24} {:>14.6} {:>9}", r.rank, r.model_id, r.score, r.n_records);
    }
    Ok(ExitCode::SUCCESS)
}

fn adapter_test(manifest: &Path, settings: &Settings) -> Result<ExitCode> {
    let manifest = load_manifest(manifest, &settings.eval)?;
    let report = conformance_check(&manifest, &settings.eval);
    for e in &report.entries {
        match &e.error {
            None => println!("pass {}", e.task),
            Some(err) => println!("FAIL {}: {err}", e.task),
        }
    }
    println!(
        "{} passed {}/{}",
        report.model_id,
        report.pass_count(),
        report.entries.len()
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn register(store: &Store, manifest: &Path, settings: &Settings) -> Result<ExitCode> {
    match register_from_path(store, manifest, &settings.eval) {
        Ok(reg) => {
            println!(
                "registered {} ({:?})",
                reg.entry.descriptor.model_id, reg.entry.descriptor.kind
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(RegisterError::Conformance(report)) => {
            for e in report.entries.iter().filter(|e| !e.passed) {
                println!("FAIL {}: {}", e.task, e.error.as_deref().unwrap_or("failed"));
            }
            bail!("{} failed conformance and was not registered", report.model_id)
        }
        Err(e) => Err(e.into()),
    }
}

fn models(store: &Store) -> Result<ExitCode> {
    let entries = store.list_models()?;
    if entries.is_empty() {
        println!("no registered models; every builtin is evaluated");
    }
    for e in entries {
        let d = e.descriptor;
        println!(
            "{:<24} {:<8} {:<14} {}",
            d.model_id,
            format!("{:?}", d.kind).to_lowercase(),
            d.model_type,
            d.display_name
        );
    }
    Ok(ExitCode::SUCCESS)
}
