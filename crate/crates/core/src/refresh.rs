//! One refresh cycle: fetch the source, and when its content is new,
//! evaluate every registered model and commit the run.

use thiserror::Error;

use crate::config::Settings;
use crate::eval::{run_evaluation, EvalError, EvalOutcome, Incident, ModelSpec};
use crate::forecasters::{builtin, builtin_models, ModelKind};
use crate::ingest::{build_transformed_panel, fetch_vintage, parse_fredmd, FetchOutcome, IngestError, Vintage};
use crate::store::{RunManifest, Store, StoreError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefreshError {
    #[error("no source configured")]
    NoSource,
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum RefreshOutcome {
    Refreshed {
        run: RunManifest,
        incidents: Vec<Incident>,
    },
    NoChange,
    /// The cycle failed; whatever was committed before stays as it was.
    Failed(String),
}

/// The models a run evaluates: every registered adapter, plus the builtins.
/// Registering any builtin restricts the builtins to the registered ones;
/// otherwise all of them run. Entries that cannot be resolved become
/// incidents.
pub fn resolve_models(store: &Store, settings: &Settings) -> Result<(Vec<ModelSpec>, Vec<Incident>), StoreError> {
    let entries = store.list_models()?;
    let mut specs = Vec::new();
    let mut incidents = Vec::new();
    if !entries.iter().any(|e| e.descriptor.kind == ModelKind::Builtin) {
        specs.extend(builtin_models(&settings.eval).into_iter().map(ModelSpec::Builtin));
    }
    for entry in entries {
        let id = entry.descriptor.model_id.clone();
        match (entry.descriptor.kind, entry.adapter) {
            (ModelKind::Adapter, Some(manifest)) if manifest.input_window_len == settings.eval.lookback => {
                specs.push(ModelSpec::Adapter(manifest))
            }
            (ModelKind::Adapter, _) => incidents.push(Incident {
                model_id: Some(id),
                series_id: None,
                message: "adapter window length differs from the configured look-back".into(),
            }),
            (ModelKind::Builtin, _) => match builtin(&id, &settings.eval) {
                Some(model) => specs.push(ModelSpec::Builtin(model)),
                None => incidents.push(Incident {
                    model_id: Some(id),
                    series_id: None,
                    message: "unknown builtin model".into(),
                }),
            },
        }
    }
    specs.sort_by_key(ModelSpec::model_id);
    let before = specs.len();
    specs.dedup_by_key(|m| m.model_id());
    if specs.len() < before {
        incidents.push(Incident {
            model_id: None,
            series_id: None,
            message: "registry holds models sharing an id; only the first is evaluated".into(),
        });
    }
    Ok((specs, incidents))
}

/// Parses, transforms and evaluates one vintage, then commits the run and
/// the vintage itself.
pub fn evaluate_vintage(
    store: &Store,
    settings: &Settings,
    vintage: &Vintage,
    raw: &[u8],
    models: &[ModelSpec],
) -> Result<(RunManifest, EvalOutcome), RefreshError> {
    let panel = parse_fredmd(raw)?;
    let transformed = build_transformed_panel(&panel, settings.eval.space)?;
    let outcome = run_evaluation(&transformed, &settings.eval, models, &vintage.id)?;
    let ids: Vec<String> = models.iter().map(ModelSpec::model_id).collect();
    let run = RunManifest::new(&vintage.id, &settings.eval, &ids);
    let committed = store.put_records(&run, &outcome.records)?;
    store.put_vintage(vintage, raw)?;
    Ok((committed, outcome))
}

fn try_refresh(settings: &Settings, store: &Store) -> Result<RefreshOutcome, RefreshError> {
    let source = settings.source.as_deref().ok_or(RefreshError::NoSource)?;
    let latest = store.latest_vintage()?;
    let previous = latest.as_ref().map(|v| v.content_hash.as_str());
    let (models, mut incidents) = resolve_models(store, settings)?;
    let (raw, vintage) = match fetch_vintage(source, previous)? {
        FetchOutcome::New { bytes, vintage } => (bytes, vintage),
        FetchOutcome::NoNewVintage => {
            // Unchanged data still needs a run when the model set or config
            // has changed since it was last evaluated.
            let vintage = latest.expect("a previous hash implies a stored vintage");
            let ids: Vec<String> = models.iter().map(ModelSpec::model_id).collect();
            let planned = RunManifest::new(&vintage.id, &settings.eval, &ids);
            if store.get_run(&planned.run_id)?.is_some() {
                return Ok(RefreshOutcome::NoChange);
            }
            (store.vintage_bytes(&vintage.content_hash)?, vintage)
        }
    };
    let (run, outcome) = evaluate_vintage(store, settings, &vintage, &raw, &models)?;
    incidents.extend(outcome.incidents);
    Ok(RefreshOutcome::Refreshed { run, incidents })
}

/// Runs one cycle. Never panics on bad input or I/O; failures come back
/// as [`RefreshOutcome::Failed`] and are logged.
pub fn refresh_cycle(settings: &Settings, store: &Store) -> RefreshOutcome {
    match try_refresh(settings, store) {
        Ok(outcome) => {
            match &outcome {
                RefreshOutcome::Refreshed { run, incidents } => {
                    tracing::info!(run = %run.run_id, vintage = %run.vintage_id, records = run.record_count, "refreshed");
                    for i in incidents {
                        tracing::warn!(model = ?i.model_id, "incident: {}", i.message);
                    }
                }
                RefreshOutcome::NoChange => tracing::info!("no new vintage"),
                RefreshOutcome::Failed(_) => {}
            }
            outcome
        }
        Err(e) => {
            tracing::error!("refresh failed: {e}");
            RefreshOutcome::Failed(e.to_string())
        }
    }
}
