//! External model adapters: executables that answer forecast requests
//! line by line over stdin/stdout.

mod conformance;
mod invoke;
mod manifest;
mod protocol;

pub use conformance::{conformance_check, conformance_tasks, ConformanceEntry, ConformanceReport};
pub use invoke::{invoke_adapter, SHUTDOWN_GRACE};
pub use manifest::{load_manifest, validate_manifest, AdapterManifest, HorizonSupport, MANIFEST_FILE};
pub use protocol::{parse_response, render_request, Request, Response};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdapterError {
    #[error("manifest is missing field `{0}`")]
    MissingField(String),
    #[error("manifest field `{field}` is invalid: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad command: {0}")]
    BadCommand(String),
    #[error("failed to read manifest: {0}")]
    Io(String),
    #[error("adapter produced no complete response within {0} s")]
    AdapterTimeout(u64),
    #[error("adapter crashed: {0}")]
    AdapterCrash(String),
    #[error("bad response: {0}")]
    BadResponse(String),
}
