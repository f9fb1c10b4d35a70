use std::fs;

use super::{is_hex_digest, staging_name, Store, StoreError, WriteBudget};
use crate::ingest::{content_hash, Vintage};

const VINTAGE_FILE: &str = "vintage.json";
const RAW_FILE: &str = "raw";

impl Store {
    /// Stores a fetched vintage under its content hash. Storing the same
    /// bytes twice keeps the first copy.
    pub fn put_vintage(&self, vintage: &Vintage, raw: &[u8]) -> Result<Vintage, StoreError> {
        if content_hash(raw) != vintage.content_hash {
            return Err(StoreError::corrupt(
                &self.vintages_dir(),
                "vintage hash does not match its bytes",
            ));
        }
        let _lock = self.lock()?;
        let dir = self.vintages_dir();
        let target = dir.join(&vintage.content_hash);
        if target.join(VINTAGE_FILE).is_file() {
            return self.read_vintage(&vintage.content_hash);
        }
        self.sweep_staging(&dir)?;
        if target.exists() {
            fs::remove_dir_all(&target).map_err(|e| StoreError::io(&target, e))?;
        }
        let staging = dir.join(staging_name(&vintage.content_hash));
        let mut budget = WriteBudget::unlimited();
        budget.create_dir(&staging)?;
        budget.write_file(&staging.join(RAW_FILE), raw)?;
        let json = serde_json::to_vec_pretty(vintage).expect("vintage serializes");
        budget.write_file(&staging.join(VINTAGE_FILE), &json)?;
        budget.rename(&staging, &target)?;
        Ok(vintage.clone())
    }

    fn read_vintage(&self, hash: &str) -> Result<Vintage, StoreError> {
        let path = self.vintages_dir().join(hash).join(VINTAGE_FILE);
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| StoreError::corrupt(&path, e))
    }

    /// Stored vintages, oldest fetch first.
    pub fn list_vintages(&self) -> Result<Vec<Vintage>, StoreError> {
        let dir = self.vintages_dir();
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| StoreError::io(&dir, e))? {
            let entry = entry.map_err(|e| StoreError::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().to_string();
            if is_hex_digest(&name) && entry.path().join(VINTAGE_FILE).is_file() {
                out.push(self.read_vintage(&name)?);
            }
        }
        out.sort_by(|a, b| {
            a.fetched_at
                .cmp(&b.fetched_at)
                .then_with(|| a.id.cmp(&b.id))
                .then_with(|| a.content_hash.cmp(&b.content_hash))
        });
        Ok(out)
    }

    pub fn latest_vintage(&self) -> Result<Option<Vintage>, StoreError> {
        Ok(self.list_vintages()?.pop())
    }

    pub fn vintage_bytes(&self, content_hash: &str) -> Result<Vec<u8>, StoreError> {
        if !is_hex_digest(content_hash) {
            return Err(StoreError::NotFound(content_hash.to_string()));
        }
        let path = self.vintages_dir().join(content_hash).join(RAW_FILE);
        fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::NotFound(content_hash.to_string()),
            _ => StoreError::io(&path, e),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;

    #[test]
    fn vintage_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let raw = b"sasdate,A\n".to_vec();
        let v = Vintage {
            id: "2024-11".into(),
            fetched_at: Utc::now(),
            content_hash: content_hash(&raw),
            source_url: "fixture".into(),
        };
        store.put_vintage(&v, &raw).unwrap();
        store.put_vintage(&v, &raw).unwrap();
        assert_eq!(store.list_vintages().unwrap(), vec![v.clone()]);
        assert_eq!(store.latest_vintage().unwrap(), Some(v.clone()));
        assert_eq!(store.vintage_bytes(&v.content_hash).unwrap(), raw);
        let mut bad = v.clone();
        bad.content_hash = content_hash(b"other");
        assert!(store.put_vintage(&bad, &raw).is_err());
    }
}
