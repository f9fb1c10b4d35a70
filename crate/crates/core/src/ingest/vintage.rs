use std::path::Path;
use std::sync::OnceLock;
use std::time::Duration;

use chrono::{DateTime, Datelike, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::IngestError;

const FETCH_TIMEOUT: Duration = Duration::from_secs(60);

/// One dated snapshot of the raw dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vintage {
    /// `YYYY-MM`.
    pub id: String,
    pub fetched_at: DateTime<Utc>,
    /// SHA-256 of the raw bytes, lowercase hex.
    pub content_hash: String,
    pub source_url: String,
}

impl Vintage {
    pub fn is_valid_id(id: &str) -> bool {
        static RE: OnceLock<Regex> = OnceLock::new();
        RE.get_or_init(|| Regex::new(r"^\d{4}-(0[1-9]|1[0-2])$").unwrap())
            .is_match(id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FetchOutcome {
    New { bytes: Vec<u8>, vintage: Vintage },
    NoNewVintage,
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Vintage id taken from a `YYYY-MM` stem in the source's file name, or the
/// current UTC month when the name carries none.
pub fn vintage_id_from_source(source: &str, now: DateTime<Utc>) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(\d{4})-(0[1-9]|1[0-2])").unwrap());
    let no_query = source.split(['?', '#']).next().unwrap_or(source);
    let file_name = no_query.rsplit(['/', '\\']).next().unwrap_or(no_query);
    match re.captures(file_name) {
        Some(c) => format!("{}-{}", &c[1], &c[2]),
        None => format!("{:04}-{:02}", now.year(), now.month()),
    }
}

/// Fetches a vintage from an http(s) URL, a `file://` URL or a local path.
/// Returns [`FetchOutcome::NoNewVintage`] when the bytes hash to
/// `previous_hash`.
pub fn fetch_vintage(source: &str, previous_hash: Option<&str>) -> Result<FetchOutcome, IngestError> {
    let bytes = if source.starts_with("http://") || source.starts_with("https://") {
        fetch_http(source)?
    } else {
        let path = source.strip_prefix("file://").unwrap_or(source);
        read_local(Path::new(path))?
    };
    if bytes.is_empty() {
        return Err(IngestError::EmptyBody);
    }
    let hash = content_hash(&bytes);
    if previous_hash.is_some_and(|p| p.eq_ignore_ascii_case(&hash)) {
        return Ok(FetchOutcome::NoNewVintage);
    }
    let fetched_at = Utc::now();
    let vintage = Vintage {
        id: vintage_id_from_source(source, fetched_at),
        fetched_at,
        content_hash: hash,
        source_url: source.to_string(),
    };
    Ok(FetchOutcome::New { bytes, vintage })
}

fn read_local(path: &Path) -> Result<Vec<u8>, IngestError> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => IngestError::NotFound(path.display().to_string()),
        _ => IngestError::Network {
            url: path.display().to_string(),
            reason: e.to_string(),
        },
    })
}

fn fetch_http(url: &str) -> Result<Vec<u8>, IngestError> {
    let network = |reason: String| IngestError::Network {
        url: url.to_string(),
        reason,
    };
    let client = reqwest::blocking::Client::builder()
        .timeout(FETCH_TIMEOUT)
        .connect_timeout(Duration::from_secs(10))
        .build()
        .map_err(|e| network(e.to_string()))?;
    let resp = client.get(url).send().map_err(|e| network(e.to_string()))?;
    let status = resp.status();
    if status.is_client_error() {
        return Err(IngestError::NotFound(format!("{url} ({status})")));
    }
    if !status.is_success() {
        return Err(network(format!("HTTP {status}")));
    }
    resp.bytes().map(|b| b.to_vec()).map_err(|e| network(e.to_string()))
}
