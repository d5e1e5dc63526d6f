//! File-backed registry: `<dir>/events.log` plus `<dir>/keys/`.
//!
//! One writer owns the store. Mutations go through [`RegistryStore::registry_mut`]
//! and become durable on [`RegistryStore::commit`].

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qrseal_core::registry::{Event, Registry};

use crate::logfile::{read_lines, AppendLog};

pub const EVENTS_LOG: &str = "events.log";
pub const KEYS_DIR: &str = "keys";

#[derive(Debug)]
pub struct RegistryStore {
    dir: PathBuf,
    registry: Registry,
    log: AppendLog,
}

impl RegistryStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let path = dir.join(EVENTS_LOG);
        let lines = read_lines(&path).with_context(|| format!("reading {}", path.display()))?;
        let registry = Registry::replay(lines.iter().map(String::as_str))
            .with_context(|| format!("replaying {}", path.display()))?;
        let log = AppendLog::open(&path).with_context(|| format!("opening {}", path.display()))?;
        Ok(Self { dir, registry, log })
    }

    /// Reads the current state without taking the writer role.
    pub fn snapshot(dir: &Path) -> Result<Registry> {
        let path = dir.join(EVENTS_LOG);
        let lines = read_lines(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Registry::replay(lines.iter().map(String::as_str))?)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn keys_dir(&self) -> PathBuf {
        self.dir.join(KEYS_DIR)
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn registry_mut(&mut self) -> &mut Registry {
        &mut self.registry
    }

    pub fn commit(&mut self) -> Result<usize> {
        let events = self.registry.drain_events();
        self.log
            .append(events.iter().map(Event::to_line))
            .with_context(|| format!("appending to {}", self.log.path().display()))?;
        Ok(events.len())
    }
}

impl Drop for RegistryStore {
    fn drop(&mut self) {
        if self.registry.has_pending() {
            let _ = self.commit();
        }
    }
}
