use std::collections::BTreeMap;

use dbits_core::refresh::resolve_models;
use dbits_core::store::StoreError;
use dbits_core::{MetricRecord, ModelDescriptor, ModelSpec, RunManifest, Settings, Store, Vintage};

/// The runs being served, one per vintage: the most recently created.
#[derive(Debug, Clone)]
pub struct ServedRun {
    pub manifest: RunManifest,
    pub records: Vec<MetricRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub vintages: Vec<Vintage>,
    /// The models the next refresh evaluates.
    pub models: Vec<ModelDescriptor>,
    /// Keyed by vintage id.
    pub runs: BTreeMap<String, ServedRun>,
}

impl Snapshot {
    pub fn load(store: &Store, settings: &Settings) -> Result<Self, StoreError> {
        let mut latest: BTreeMap<String, RunManifest> = BTreeMap::new();
        for run in store.list_runs()? {
            latest.insert(run.vintage_id.clone(), run);
        }
        let mut runs = BTreeMap::new();
        for (vintage, manifest) in latest {
            let records = store.run_records(&manifest)?;
            runs.insert(vintage, ServedRun { manifest, records });
        }
        let models = resolve_models(store, settings)?
            .0
            .iter()
            .map(ModelSpec::descriptor)
            .collect();
        Ok(Self {
            vintages: store.list_vintages()?,
            models,
            runs,
        })
    }

    /// Most recent vintage id that has a committed run.
    pub fn latest_vintage(&self) -> Option<&str> {
        self.runs.keys().next_back().map(String::as_str)
    }

    pub fn run(&self, vintage: Option<&str>) -> Option<&ServedRun> {
        match vintage {
            Some(v) => self.runs.get(v),
            None => self.runs.values().next_back(),
        }
    }
}
