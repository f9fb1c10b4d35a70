//! Registering models from manifest files.

use std::path::Path;

use thiserror::Error;

use crate::adapter::{conformance_check, load_manifest, AdapterError, ConformanceReport, MANIFEST_FILE};
use crate::config::EvalConfig;
use crate::forecasters::{builtin, BUILTIN_IDS};
use crate::store::{Registration, RegistryEntry, Store, StoreError};

#[derive(Debug, Error)]
pub enum RegisterError {
    #[error("cannot read manifest {path}: {message}")]
    Manifest { path: String, message: String },
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("{} passed {}/{} conformance tasks", .0.model_id, .0.pass_count(), .0.entries.len())]
    Conformance(ConformanceReport),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// What a successful registration produced.
#[derive(Debug, Clone)]
pub struct Registered {
    pub entry: RegistryEntry,
    pub report: Option<ConformanceReport>,
}

/// Registers the model described by `path` (a manifest file or the
/// directory holding one). A manifest with `kind = "builtin"` names one of
/// the in-process models; anything else is an adapter and must pass
/// conformance first.
pub fn register_from_path(store: &Store, path: &Path, cfg: &EvalConfig) -> Result<Registered, RegisterError> {
    let file = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    let unreadable = |message: String| RegisterError::Manifest {
        path: file.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(&file).map_err(|e| unreadable(e.to_string()))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| unreadable(e.to_string()))?;

    if table.get("kind").and_then(|k| k.as_str()) == Some("builtin") {
        let id = table
            .get("model_id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| unreadable("missing `model_id`".into()))?;
        let model = builtin(id, cfg).ok_or_else(|| RegisterError::UnknownBuiltin(id.to_string()))?;
        let entry = store.register_model(Registration::Builtin(model.descriptor()))?;
        return Ok(Registered { entry, report: None });
    }

    let manifest = load_manifest(path, cfg)?;
    if BUILTIN_IDS.contains(&manifest.model_id.as_str()) {
        return Err(StoreError::DuplicateModelId(manifest.model_id).into());
    }
    let report = conformance_check(&manifest, cfg);
    if !report.passed() {
        return Err(RegisterError::Conformance(report));
    }
    let entry = store.register_model(Registration::Adapter {
        manifest: &manifest,
        report: &report,
    })?;
    Ok(Registered {
        entry,
        report: Some(report),
    })
}
