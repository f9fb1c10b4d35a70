use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{staging_name, Store, StoreError, WriteBudget};
use crate::adapter::{AdapterManifest, ConformanceReport, MANIFEST_FILE};
use crate::forecasters::{ModelDescriptor, ModelKind};

/// A model accepted into the registry.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistryEntry {
    pub descriptor: ModelDescriptor,
    /// Present for adapters; its `base_dir` points inside the store.
    pub adapter: Option<AdapterManifest>,
}

pub enum Registration<'a> {
    Builtin(ModelDescriptor),
    Adapter {
        manifest: &'a AdapterManifest,
        report: &'a ConformanceReport,
    },
}

#[derive(Deserialize)]
struct StoredBuiltin {
    model_id: String,
    display_name: String,
    model_type: String,
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), StoreError> {
    for entry in fs::read_dir(from).map_err(|e| StoreError::io(from, e))? {
        let entry = entry.map_err(|e| StoreError::io(from, e))?;
        let src = entry.path();
        let dst = to.join(entry.file_name());
        let kind = entry.file_type().map_err(|e| StoreError::io(&src, e))?;
        if kind.is_dir() {
            fs::create_dir_all(&dst).map_err(|e| StoreError::io(&dst, e))?;
            copy_tree(&src, &dst)?;
        } else if kind.is_file() {
            fs::copy(&src, &dst).map_err(|e| StoreError::io(&dst, e))?;
        }
    }
    Ok(())
}

impl Store {
    /// Adds a model to the registry. Adapters must carry a passing
    /// conformance report; their registration directory is copied in.
    pub fn register_model(&self, registration: Registration<'_>) -> Result<RegistryEntry, StoreError> {
        let (descriptor, adapter) = match &registration {
            Registration::Builtin(d) => {
                if d.kind != ModelKind::Builtin {
                    return Err(StoreError::InvalidModel(format!("{} is not a builtin", d.model_id)));
                }
                (d.clone(), None)
            }
            Registration::Adapter { manifest, report } => {
                if report.model_id != manifest.model_id || !report.passed() {
                    return Err(StoreError::ConformanceFailed(manifest.model_id.clone()));
                }
                (manifest.descriptor(), Some(*manifest))
            }
        };
        if !ModelDescriptor::is_valid_id(&descriptor.model_id) {
            return Err(StoreError::InvalidModel(format!(
                "bad model id `{}`",
                descriptor.model_id
            )));
        }

        let _lock = self.lock()?;
        let models = self.models_dir();
        let target = models.join(&descriptor.model_id);
        if target.join(MANIFEST_FILE).is_file() {
            return Err(StoreError::DuplicateModelId(descriptor.model_id));
        }
        self.sweep_staging(&models)?;
        if target.exists() {
            fs::remove_dir_all(&target).map_err(|e| StoreError::io(&target, e))?;
        }
        let staging = models.join(staging_name(&descriptor.model_id));
        let mut budget = WriteBudget::unlimited();
        budget.create_dir(&staging)?;
        let text = match adapter {
            Some(manifest) => {
                if let Some(dir) = &manifest.base_dir {
                    copy_tree(dir, &staging)?;
                }
                manifest.to_toml()
            }
            None => {
                let mut t = toml::Table::new();
                t.insert("kind".into(), "builtin".into());
                t.insert("model_id".into(), descriptor.model_id.clone().into());
                t.insert("display_name".into(), descriptor.display_name.clone().into());
                t.insert("model_type".into(), descriptor.model_type.clone().into());
                toml::to_string(&t).expect("descriptor serializes")
            }
        };
        budget.write_file(&staging.join(MANIFEST_FILE), text.as_bytes())?;
        budget.rename(&staging, &target)?;
        self.read_entry(&target)
    }

    fn read_entry(&self, dir: &Path) -> Result<RegistryEntry, StoreError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
        let table: toml::Table = toml::from_str(&text).map_err(|e| StoreError::corrupt(&path, e))?;
        match table.get("kind").and_then(|k| k.as_str()) {
            Some("builtin") => {
                let b: StoredBuiltin = table.try_into().map_err(|e| StoreError::corrupt(&path, e))?;
                Ok(RegistryEntry {
                    descriptor: ModelDescriptor {
                        model_id: b.model_id,
                        kind: ModelKind::Builtin,
                        display_name: b.display_name,
                        model_type: b.model_type,
                    },
                    adapter: None,
                })
            }
            Some("adapter") => {
                let mut m: AdapterManifest = table.try_into().map_err(|e| StoreError::corrupt(&path, e))?;
                m.base_dir = Some(fs::canonicalize(dir).unwrap_or_else(|_| PathBuf::from(dir)));
                Ok(RegistryEntry {
                    descriptor: m.descriptor(),
                    adapter: Some(m),
                })
            }
            _ => Err(StoreError::corrupt(&path, "missing or unknown `kind`")),
        }
    }

    /// Registered models ordered by id.
    pub fn list_models(&self) -> Result<Vec<RegistryEntry>, StoreError> {
        let dir = self.models_dir();
        let mut names: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| StoreError::io(&dir, e))?
            .filter_map(Result::ok)
            .filter(|e| !e.file_name().to_string_lossy().starts_with('.'))
            .map(|e| e.path())
            .filter(|p| p.join(MANIFEST_FILE).is_file())
            .collect();
        names.sort();
        names.iter().map(|p| self.read_entry(p)).collect()
    }
}
