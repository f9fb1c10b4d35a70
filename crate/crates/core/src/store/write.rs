use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use super::StoreError;

/// Byte budget for a sequence of writes. Once spent, the next write stops
/// part way and reports [`StoreError::Interrupted`], leaving the files as a
/// crash at that point would. Unlimited in normal use.
#[derive(Debug, Clone, Copy)]
pub struct WriteBudget {
    remaining: Option<usize>,
}

impl WriteBudget {
    pub fn unlimited() -> Self {
        Self { remaining: None }
    }

    /// Stops after `bytes` bytes; a rename or directory creation costs one.
    pub fn crash_after(bytes: usize) -> Self {
        Self { remaining: Some(bytes) }
    }

    fn spend(&mut self, want: usize) -> usize {
        match &mut self.remaining {
            None => want,
            Some(left) => {
                let take = want.min(*left);
                *left -= take;
                take
            }
        }
    }

    pub(crate) fn step(&mut self) -> Result<(), StoreError> {
        if self.spend(1) == 1 {
            Ok(())
        } else {
            Err(StoreError::Interrupted)
        }
    }

    pub(crate) fn write_file(&mut self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let take = self.spend(bytes.len());
        let mut f = File::create(path).map_err(|e| StoreError::io(path, e))?;
        f.write_all(&bytes[..take]).map_err(|e| StoreError::io(path, e))?;
        f.sync_all().map_err(|e| StoreError::io(path, e))?;
        if take < bytes.len() {
            return Err(StoreError::Interrupted);
        }
        Ok(())
    }

    pub(crate) fn create_dir(&mut self, path: &Path) -> Result<(), StoreError> {
        self.step()?;
        fs::create_dir(path).map_err(|e| StoreError::io(path, e))
    }

    pub(crate) fn rename(&mut self, from: &Path, to: &Path) -> Result<(), StoreError> {
        self.step()?;
        fs::rename(from, to).map_err(|e| StoreError::io(to, e))?;
        if let Some(parent) = to.parent() {
            // Persist the rename itself; not every platform allows this.
            if let Ok(dir) = File::open(parent) {
                let _ = dir.sync_all();
            }
        }
        Ok(())
    }
}

impl Default for WriteBudget {
    fn default() -> Self {
        Self::unlimited()
    }
}
