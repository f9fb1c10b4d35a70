//! Append-only on-disk store.
//!
//! ```text
//! <root>/
//!   .lock                              writer lock
//!   vintages/<content_hash>/{vintage.json, raw}
//!   runs/<run_id>/{manifest, records, COMMIT}
//!   models/<model_id>/manifest         plus any adapter files
//! ```
//!
//! Every directory is assembled under a `.staging-*` name and renamed into
//! place. A run is visible only once its `COMMIT` marker exists.

mod models;
mod runs;
mod vintages;
mod write;

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use models::{Registration, RegistryEntry};
pub use runs::{RecordFilter, RunManifest};
pub use write::WriteBudget;

pub const ROOT_ENV: &str = "DBITS_STORE";

const STAGING_PREFIX: &str = ".staging-";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("storage is full")]
    StorageFull,
    #[error("run {0} is already committed with different records")]
    DuplicateRun(String),
    #[error("model id {0} is already registered")]
    DuplicateModelId(String),
    #[error("model {0} did not pass conformance")]
    ConformanceFailed(String),
    #[error("invalid model registration: {0}")]
    InvalidModel(String),
    #[error("corrupt store entry {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("write interrupted")]
    Interrupted,
    #[error("not found: {0}")]
    NotFound(String),
}

impl StoreError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::StorageFull {
            return StoreError::StorageFull;
        }
        StoreError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub(crate) fn corrupt(path: &Path, message: impl ToString) -> Self {
        StoreError::Corrupt {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Held for the duration of a write; released on drop.
struct WriterLock(File);

impl Drop for WriterLock {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in ["runs", "models", "vintages"] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(|e| StoreError::io(&p, e))?;
        }
        Ok(Self { root })
    }

    /// Opens an existing store without creating anything.
    pub fn open_existing(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in ["runs", "models", "vintages"] {
            let p = root.join(dir);
            if !p.is_dir() {
                return Err(StoreError::NotFound(p.display().to_string()));
            }
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    fn models_dir(&self) -> PathBuf {
        self.root.join("models")
    }

    fn vintages_dir(&self) -> PathBuf {
        self.root.join("vintages")
    }

    fn lock(&self) -> Result<WriterLock, StoreError> {
        let path = self.root.join(".lock");
        let file = File::options()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| StoreError::io(&path, e))?;
        file.lock().map_err(|e| StoreError::io(&path, e))?;
        Ok(WriterLock(file))
    }

    /// Removes leftovers of interrupted writes. Only safe under the lock.
    fn sweep_staging(&self, dir: &Path) -> Result<(), StoreError> {
        for entry in fs::read_dir(dir).map_err(|e| StoreError::io(dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(dir, e))?;
            if entry.file_name().to_string_lossy().starts_with(STAGING_PREFIX) {
                let p = entry.path();
                fs::remove_dir_all(&p).map_err(|e| StoreError::io(&p, e))?;
            }
        }
        Ok(())
    }
}

fn staging_name(key: &str) -> String {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or_default();
    format!("{STAGING_PREFIX}{key}-{}-{nanos}", std::process::id())
}

fn is_hex_digest(name: &str) -> bool {
    name.len() == 64 && name.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
}
