use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{is_hex_digest, staging_name, Store, StoreError, WriteBudget};
use crate::config::{EvalConfig, Metric};
use crate::eval::MetricRecord;
use crate::ingest::content_hash;

const MANIFEST: &str = "manifest";
const RECORDS: &str = "records";
const COMMIT: &str = "COMMIT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub vintage_id: String,
    pub config: EvalConfig,
    pub model_ids: Vec<String>,
    pub created_at: DateTime<Utc>,
    pub record_count: usize,
    /// SHA-256 of the `records` file.
    #[serde(default)]
    pub records_hash: String,
}

impl RunManifest {
    pub fn new(vintage_id: &str, config: &EvalConfig, model_ids: &[String]) -> Self {
        let mut ids = model_ids.to_vec();
        ids.sort();
        ids.dedup();
        Self {
            run_id: Self::compute_id(vintage_id, config, &ids),
            vintage_id: vintage_id.to_string(),
            config: config.clone(),
            model_ids: ids,
            created_at: Utc::now(),
            record_count: 0,
            records_hash: String::new(),
        }
    }

    /// Digest of (vintage, canonical config, sorted model ids).
    pub fn compute_id(vintage_id: &str, config: &EvalConfig, sorted_model_ids: &[String]) -> String {
        let mut h = Sha256::new();
        h.update(vintage_id.as_bytes());
        h.update(b"\n");
        h.update(config.canonical_json().as_bytes());
        h.update(b"\n");
        h.update(sorted_model_ids.join(",").as_bytes());
        hex::encode(h.finalize())
    }
}

/// Conjunction of optional equality filters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordFilter {
    pub vintage: Option<String>,
    pub model: Option<String>,
    pub series: Option<String>,
    pub horizon: Option<usize>,
    pub metric: Option<Metric>,
}

impl RecordFilter {
    pub fn matches(&self, r: &MetricRecord) -> bool {
        self.vintage.as_ref().is_none_or(|v| *v == r.vintage_id)
            && self.model.as_ref().is_none_or(|m| *m == r.model_id)
            && self.series.as_ref().is_none_or(|s| *s == r.series_id)
            && self.horizon.is_none_or(|h| h == r.horizon)
            && self.metric.is_none_or(|m| m == r.metric_name)
    }
}

fn render_records(records: &[MetricRecord]) -> Vec<u8> {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out.into_bytes()
}

impl Store {
    /// Atomically commits a run. Re-committing identical content is a no-op.
    pub fn put_records(&self, run: &RunManifest, records: &[MetricRecord]) -> Result<RunManifest, StoreError> {
        self.put_records_with_budget(run, records, WriteBudget::unlimited())
    }

    /// [`Store::put_records`] with a write budget, to simulate a crash part
    /// way through the commit.
    pub fn put_records_with_budget(
        &self,
        run: &RunManifest,
        records: &[MetricRecord],
        mut budget: WriteBudget,
    ) -> Result<RunManifest, StoreError> {
        if !is_hex_digest(&run.run_id) {
            return Err(StoreError::InvalidModel(format!("bad run id {}", run.run_id)));
        }
        let mut sorted = records.to_vec();
        sorted.sort_by(MetricRecord::canonical_cmp);
        let body = render_records(&sorted);
        let mut manifest = run.clone();
        manifest.record_count = sorted.len();
        manifest.records_hash = content_hash(&body);

        let _lock = self.lock()?;
        let runs = self.runs_dir();
        let target = runs.join(&run.run_id);
        if target.join(COMMIT).is_file() {
            let existing = self.read_manifest(&target)?;
            if existing.records_hash == manifest.records_hash {
                return Ok(existing);
            }
            return Err(StoreError::DuplicateRun(run.run_id.clone()));
        }
        self.sweep_staging(&runs)?;
        if target.exists() {
            // Uncommitted remains are never visible; clear them.
            fs::remove_dir_all(&target).map_err(|e| StoreError::io(&target, e))?;
        }

        let staging = runs.join(staging_name(&run.run_id));
        budget.create_dir(&staging)?;
        budget.write_file(&staging.join(RECORDS), &body)?;
        let manifest_json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        budget.write_file(&staging.join(MANIFEST), &manifest_json)?;
        budget.write_file(&staging.join(COMMIT), manifest.records_hash.as_bytes())?;
        budget.rename(&staging, &target)?;
        Ok(manifest)
    }

    fn read_manifest(&self, dir: &Path) -> Result<RunManifest, StoreError> {
        let path = dir.join(MANIFEST);
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| StoreError::corrupt(&path, e))
    }

    /// Committed runs, ordered by creation time then id.
    pub fn list_runs(&self) -> Result<Vec<RunManifest>, StoreError> {
        let dir = self.runs_dir();
        let mut runs = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| StoreError::io(&dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().to_string();
            let path = entry.path();
            if !is_hex_digest(&name) || !path.join(COMMIT).is_file() {
                continue;
            }
            let manifest = self.read_manifest(&path)?;
            if manifest.run_id != name {
                return Err(StoreError::corrupt(&path, "manifest run id differs from directory"));
            }
            runs.push(manifest);
        }
        runs.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.run_id.cmp(&b.run_id)));
        Ok(runs)
    }

    pub fn get_run(&self, run_id: &str) -> Result<Option<RunManifest>, StoreError> {
        if !is_hex_digest(run_id) {
            return Ok(None);
        }
        let dir = self.runs_dir().join(run_id);
        if !dir.join(COMMIT).is_file() {
            return Ok(None);
        }
        self.read_manifest(&dir).map(Some)
    }

    /// Most recently committed run, optionally restricted to a vintage.
    pub fn latest_run(&self, vintage: Option<&str>) -> Result<Option<RunManifest>, StoreError> {
        Ok(self
            .list_runs()?
            .into_iter()
            .rfind(|r| vintage.is_none_or(|v| r.vintage_id == v)))
    }

    /// All records of one committed run, in canonical order.
    pub fn run_records(&self, run: &RunManifest) -> Result<Vec<MetricRecord>, StoreError> {
        let path = self.runs_dir().join(&run.run_id).join(RECORDS);
        let file = fs::File::open(&path).map_err(|e| StoreError::io(&path, e))?;
        let mut records = Vec::with_capacity(run.record_count);
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| StoreError::io(&path, e))?;
            if line.is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|e| StoreError::corrupt(&path, e))?);
        }
        if records.len() != run.record_count {
            return Err(StoreError::corrupt(
                &path,
                format!("{} records, manifest says {}", records.len(), run.record_count),
            ));
        }
        Ok(records)
    }

    /// Records of every committed run matching the filter, in canonical
    /// order (runs ordered by id break exact ties).
    pub fn query_records(&self, filter: &RecordFilter) -> Result<Vec<MetricRecord>, StoreError> {
        let mut runs = self.list_runs()?;
        runs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        let mut out = Vec::new();
        for run in runs {
            if filter.vintage.as_ref().is_some_and(|v| *v != run.vintage_id) {
                continue;
            }
            out.extend(self.run_records(&run)?.into_iter().filter(|r| filter.matches(r)));
        }
        out.sort_by(MetricRecord::canonical_cmp);
        Ok(out)
    }
}
