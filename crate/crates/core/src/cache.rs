//! Memoisation of Fox-Li solutions, in memory and optionally on disk.
//!
//! Entries are keyed by a SHA-256 digest of the full [`CavityConfig`], so
//! any change to geometry, grid or iteration settings misses the cache.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::geometry::CavityConfig;
use crate::mode::{fox_li_solve, ModeSummary};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "RBSLIPT_CACHE_DIR";

/// Bumped whenever the solver changes in a way that alters results.
const FORMAT_VERSION: u32 = 2;

#[derive(Serialize, Deserialize)]
struct DiskEntry {
    version: u32,
    key: String,
    config: CavityConfig,
    summary: ModeSummary,
}

type Slot = Arc<Mutex<Option<ModeSummary>>>;

/// Thread-safe mode cache. Concurrent lookups of different keys proceed in
/// parallel; concurrent lookups of the same key solve it once.
pub struct ModeCache {
    dir: Option<PathBuf>,
    enabled: bool,
    slots: Mutex<HashMap<String, Slot>>,
    solves: std::sync::atomic::AtomicUsize,
}

impl ModeCache {
    /// In-memory cache only.
    pub fn in_memory() -> Self {
        Self::build(None, true)
    }

    /// In-memory cache backed by JSON files in `dir`.
    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self::build(Some(dir), true))
    }

    /// Every lookup recomputes.
    pub fn disabled() -> Self {
        Self::build(None, false)
    }

    /// Disk-backed cache in `$RBSLIPT_CACHE_DIR` if set, otherwise in memory.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::with_dir(PathBuf::from(dir)),
            _ => Ok(Self::in_memory()),
        }
    }

    fn build(dir: Option<PathBuf>, enabled: bool) -> Self {
        Self {
            dir,
            enabled,
            slots: Mutex::new(HashMap::new()),
            solves: std::sync::atomic::AtomicUsize::new(0),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Number of Fox-Li solves actually run through this cache.
    pub fn solve_count(&self) -> usize {
        self.solves.load(std::sync::atomic::Ordering::Relaxed)
    }

    pub fn get_or_solve(&self, config: &CavityConfig) -> Result<ModeSummary> {
        if !self.enabled {
            return self.solve(config);
        }
        let key = cache_key(config);
        let slot = {
            let mut slots = self.slots.lock().expect("cache map poisoned");
            slots.entry(key.clone()).or_default().clone()
        };
        let mut entry = slot.lock().expect("cache slot poisoned");
        if let Some(summary) = *entry {
            return Ok(summary);
        }
        if let Some(summary) = self.read_disk(&key) {
            *entry = Some(summary);
            return Ok(summary);
        }
        let summary = self.solve(config)?;
        self.write_disk(&key, config, &summary);
        *entry = Some(summary);
        Ok(summary)
    }

    fn solve(&self, config: &CavityConfig) -> Result<ModeSummary> {
        self.solves.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        Ok(fox_li_solve(config)?.summary())
    }

    fn entry_path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    fn read_disk(&self, key: &str) -> Option<ModeSummary> {
        let path = self.entry_path(key)?;
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cannot read cache entry {}: {e}", path.display());
                return None;
            }
        };
        match serde_json::from_str::<DiskEntry>(&text) {
            Ok(entry) if entry.version == FORMAT_VERSION && entry.key == key => Some(entry.summary),
            Ok(_) => {
                log::warn!("stale cache entry {}; recomputing", path.display());
                None
            }
            Err(e) => {
                log::warn!("corrupt cache entry {} ({e}); recomputing", path.display());
                None
            }
        }
    }

    fn write_disk(&self, key: &str, config: &CavityConfig, summary: &ModeSummary) {
        let (Some(path), Some(dir)) = (self.entry_path(key), self.dir.as_ref()) else {
            return;
        };
        let entry = DiskEntry {
            version: FORMAT_VERSION,
            key: key.to_string(),
            config: config.clone(),
            summary: *summary,
        };
        let result = (|| -> std::io::Result<()> {
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            serde_json::to_writer_pretty(&mut tmp, &entry)?;
            tmp.flush()?;
            tmp.persist(&path).map_err(|e| e.error)?;
            Ok(())
        })();
        if let Err(e) = result {
            log::warn!("cannot write cache entry {}: {e}", path.display());
        }
    }
}

/// Hex SHA-256 of every mode-affecting field.
pub fn cache_key(config: &CavityConfig) -> String {
    let material = serde_json::to_vec(&(FORMAT_VERSION, config)).expect("config serialises");
    hex::encode(Sha256::digest(&material))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AlgorithmSettings, CatEyeGeometry};

    fn small(length: f64) -> CavityConfig {
        let algorithm = AlgorithmSettings {
            samples: 64,
            ..AlgorithmSettings::default()
        };
        CavityConfig::for_link(CatEyeGeometry::default(), algorithm, length, 0.05)
    }

    #[test]
    fn key_covers_geometry() {
        let a = small(3.0);
        let mut b = a.clone();
        b.geometry.gain_radius = 2.5e-3;
        assert_ne!(cache_key(&a), cache_key(&b));
        let mut c = a.clone();
        c.algorithm.samples = 128;
        assert_ne!(cache_key(&a), cache_key(&c));
        assert_eq!(cache_key(&a), cache_key(&small(3.0)));
    }

    #[test]
    fn memory_hit_skips_solve() {
        let cache = ModeCache::in_memory();
        let first = cache.get_or_solve(&small(2.0)).unwrap();
        let second = cache.get_or_solve(&small(2.0)).unwrap();
        assert_eq!(first, second);
        assert_eq!(cache.solve_count(), 1);
    }

    #[test]
    fn disabled_always_solves() {
        let cache = ModeCache::disabled();
        cache.get_or_solve(&small(2.0)).unwrap();
        cache.get_or_solve(&small(2.0)).unwrap();
        assert_eq!(cache.solve_count(), 2);
    }

    #[test]
    fn disk_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cold = ModeCache::with_dir(dir.path()).unwrap();
        let a = cold.get_or_solve(&small(2.0)).unwrap();
        let warm = ModeCache::with_dir(dir.path()).unwrap();
        let b = warm.get_or_solve(&small(2.0)).unwrap();
        assert_eq!(warm.solve_count(), 0);
        assert_eq!(a.v1.to_bits(), b.v1.to_bits());
        assert_eq!(a.v2.to_bits(), b.v2.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn corrupt_entry_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(2.0);
        let path = dir.path().join(format!("{}.json", cache_key(&cfg)));
        std::fs::write(&path, "{ not json").unwrap();
        let cache = ModeCache::with_dir(dir.path()).unwrap();
        let s = cache.get_or_solve(&cfg).unwrap();
        assert_eq!(cache.solve_count(), 1);
        let text = std::fs::read_to_string(&path).unwrap();
        let entry: DiskEntry = serde_json::from_str(&text).unwrap();
        assert_eq!(entry.summary, s);
    }
}
