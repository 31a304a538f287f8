//! On-disk datasets: a descriptor, one HSNP file per timestep, a catalog.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halo::{read_catalog_file, MergerForest};
use crate::snapshot::ParticleSnapshot;

pub const DESCRIPTOR_FILE: &str = "dataset.json";
pub const CATALOG_FILE: &str = "halos.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub timestep_count: u32,
    pub particle_counts: Vec<u64>,
    pub halo_count: u64,
    /// Snapshot file names relative to the dataset directory, by timestep.
    pub snapshots: Vec<String>,
    pub catalog: String,
    /// Simulation bounding box, `[min, max]`.
    pub bounds: [[f64; 3]; 2],
}

impl DatasetDescriptor {
    pub fn snapshot_file_name(t: u32) -> String {
        format!("snap_{t:04}.hsnp")
    }

    pub fn read(path: &Path) -> Result<DatasetDescriptor> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// Snapshots kept in memory per dataset, most recently used last.
pub const SNAPSHOT_CACHE: usize = 4;

/// An opened dataset: validated forest in memory, snapshots loaded on
/// demand with a small most-recently-used cache.
#[derive(Debug)]
pub struct Dataset {
    pub descriptor: DatasetDescriptor,
    pub dir: PathBuf,
    pub forest: Arc<MergerForest>,
    snapshots: Mutex<VecDeque<Arc<ParticleSnapshot>>>,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Dataset> {
        let descriptor = DatasetDescriptor::read(&dir.join(DESCRIPTOR_FILE))?;
        let t = descriptor.timestep_count as usize;
        if descriptor.snapshots.len() != t || descriptor.particle_counts.len() != t {
            return Err(Error::IncompleteDataset(format!(
                "descriptor lists {} snapshots for {t} timesteps",
                descriptor.snapshots.len()
            )));
        }
        for (i, name) in descriptor.snapshots.iter().enumerate() {
            if !dir.join(name).is_file() {
                return Err(Error::IncompleteDataset(format!("missing snapshot for timestep {i}: {name}")));
            }
        }
        let halos = read_catalog_file(&dir.join(&descriptor.catalog))?;
        if halos.len() as u64 != descriptor.halo_count {
            return Err(Error::Format(format!(
                "catalog has {} halos, descriptor says {}",
                halos.len(),
                descriptor.halo_count
            )));
        }
        let forest = MergerForest::load(halos)?;
        Ok(Dataset {
            descriptor,
            dir: dir.to_path_buf(),
            forest: Arc::new(forest),
            snapshots: Mutex::new(VecDeque::new()),
        })
    }

    pub fn name(&self) -> &str {
        &self.descriptor.name
    }

    pub fn timestep_count(&self) -> u32 {
        self.descriptor.timestep_count
    }

    pub fn snapshot_path(&self, t: u32) -> Result<PathBuf> {
        self.descriptor
            .snapshots
            .get(t as usize)
            .map(|n| self.dir.join(n))
            .ok_or_else(|| Error::InvalidParams(format!("timestep {t} outside 0..{}", self.timestep_count())))
    }

    pub fn snapshot(&self, t: u32) -> Result<Arc<ParticleSnapshot>> {
        {
            let mut cache = self.snapshots.lock().unwrap();
            if let Some(i) = cache.iter().position(|s| s.timestep == t) {
                let s = cache.remove(i).unwrap();
                cache.push_back(Arc::clone(&s));
                return Ok(s);
            }
        }
        let snap = Arc::new(self.load_snapshot(t)?);
        let mut cache = self.snapshots.lock().unwrap();
        if !cache.iter().any(|s| s.timestep == t) {
            if cache.len() == SNAPSHOT_CACHE {
                cache.pop_front();
            }
            cache.push_back(Arc::clone(&snap));
        }
        Ok(snap)
    }

    /// Reads a snapshot from disk without touching the cache.
    pub fn load_snapshot(&self, t: u32) -> Result<ParticleSnapshot> {
        let snap = ParticleSnapshot::read_file(self.snapshot_path(t)?)?;
        if snap.timestep != t {
            return Err(Error::Format(format!("snapshot file for timestep {t} says {}", snap.timestep)));
        }
        Ok(snap)
    }
}
