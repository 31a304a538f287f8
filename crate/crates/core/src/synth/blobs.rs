//! Gaussian-blob datasets with scripted merges.
//!
//! Each blob is a cloud of particles around a moving center. A particle keeps
//! a fixed offset from its blob center for its whole life, so its trace path
//! is smooth. A merge `{into, from, at}` steers the `from` center onto the
//! `into` center so the two coincide at timestep `at`; from then on the
//! `from` particles belong to `into`, and the `from` halo line ends with a
//! descendant link into `into`'s halo at `at`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halo::{write_catalog_file, HaloRecord, MergerForest};
use crate::service::dataset::{DatasetDescriptor, CATALOG_FILE, DESCRIPTOR_FILE};
use crate::snapshot::{Particle, ParticleSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub into: usize,
    pub from: usize,
    pub at: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub blob_count: usize,
    pub particles_per_blob: usize,
    /// Gaussian sigma per blob; a single value applies to all blobs.
    pub spreads: Vec<f64>,
    pub timesteps: u32,
    #[serde(default)]
    pub merges: Vec<Merge>,
    #[serde(default = "default_box")]
    pub box_size: f64,
    /// Offsets are cut off at this many sigma. A sparse tail leaves lone
    /// above-threshold grid nodes around a blob, each of which becomes a
    /// tiny cluster of its own under a mean-density threshold.
    #[serde(default = "default_truncate")]
    pub truncate_sigma: f64,
    /// Initial centers; drawn from the seed when absent.
    #[serde(default)]
    pub centers: Option<Vec<[f64; 3]>>,
}

fn default_name() -> String {
    "synthetic".into()
}
fn default_box() -> f64 {
    100.0
}
fn default_truncate() -> f64 {
    2.0
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec {
            name: default_name(),
            blob_count: 2,
            particles_per_blob: 10_000,
            spreads: vec![2.0],
            timesteps: 64,
            merges: Vec::new(),
            box_size: default_box(),
            truncate_sigma: default_truncate(),
            centers: None,
        }
    }
}

impl BlobSpec {
    pub fn spread(&self, blob: usize) -> f64 {
        if self.spreads.len() == 1 {
            self.spreads[0]
        } else {
            self.spreads[blob]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.blob_count == 0 || self.particles_per_blob == 0 || self.timesteps == 0 {
            return bad("blob_count, particles_per_blob and timesteps must be positive".into());
        }
        if self.spreads.len() != 1 && self.spreads.len() != self.blob_count {
            return bad(format!("need 1 or {} spreads, got {}", self.blob_count, self.spreads.len()));
        }
        if self.spreads.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("spreads must be positive".into());
        }
        if !(self.box_size.is_finite() && self.box_size > 0.0 && self.truncate_sigma > 0.0) {
            return bad("box_size and truncate_sigma must be positive".into());
        }
        if let Some(c) = &self.centers {
            if c.len() != self.blob_count || c.iter().flatten().any(|v| !v.is_finite()) {
                return bad("centers must list one finite point per blob".into());
            }
        }
        let mut end = vec![self.timesteps; self.blob_count];
        let mut merges = self.merges.clone();
        merges.sort_by_key(|m| m.at);
        for m in &merges {
            if m.into >= self.blob_count || m.from >= self.blob_count || m.into == m.from {
                return bad(format!("merge {m:?} names an unknown or identical blob"));
            }
            if m.at == 0 || m.at >= self.timesteps {
                return bad(format!("merge {m:?} must happen within 1..{}", self.timesteps));
            }
            // both parents must exist at the step before the merge
            if end[m.from] < m.at || end[m.into] <= m.at {
                return bad(format!("merge {m:?} involves a blob that has already merged away"));
            }
            end[m.from] = m.at;
        }
        Ok(())
    }

    pub fn total_particles(&self) -> usize {
        self.blob_count * self.particles_per_blob
    }
}

/// Everything the generator decided, before anything is written.
pub struct BlobUniverse {
    pub spec: BlobSpec,
    /// `centers[t][b]`.
    pub centers: Vec<Vec<[f64; 3]>>,
    /// Blob a particle belongs to at each timestep: `host[t][b]`.
    pub host: Vec<Vec<usize>>,
    pub offsets: Vec<[f32; 3]>,
    pub velocities: Vec<[f32; 3]>,
    pub halos: Vec<HaloRecord>,
}

fn gaussian3(rng: &mut ChaCha8Rng, sigma: f64, cut: f64) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        if v.iter().map(|c| c * c).sum::<f64>().sqrt() <= cut {
            return v.map(|c| c * sigma);
        }
    }
}

fn lerp(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    std::array::from_fn(|k| a[k] + (b[k] - a[k]) * s)
}

impl BlobUniverse {
    pub fn build(spec: &BlobSpec, seed: u64) -> Result<BlobUniverse> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nb = spec.blob_count;
        let tn = spec.timesteps as usize;
        let b = spec.box_size;

        let start: Vec<[f64; 3]> = match &spec.centers {
            Some(c) => c.clone(),
            None => (0..nb)
                .map(|_| std::array::from_fn(|_| rng.random_range(0.2 * b..0.8 * b)))
                .collect(),
        };
        let drift: Vec<[f64; 3]> = (0..nb)
            .map(|_| std::array::from_fn(|_| rng.random_range(-0.002 * b..0.002 * b)))
            .collect();

        // Free trajectories. Merges pull `from` onto `into`; later merges
        // are applied first so an earlier merge aims at the final path of
        // its `into` blob.
        let mut centers: Vec<Vec<[f64; 3]>> = (0..tn)
            .map(|t| (0..nb).map(|i| std::array::from_fn(|k| start[i][k] + drift[i][k] * t as f64)).collect())
            .collect();
        let mut merges = spec.merges.clone();
        merges.sort_by_key(|m| m.at);
        for m in merges.iter().rev() {
            let at = m.at as usize;
            let target = centers[at][m.into];
            let origin = centers[0][m.from];
            for (t, row) in centers.iter_mut().enumerate().take(at) {
                row[m.from] = lerp(origin, target, t as f64 / at as f64);
            }
        }
        // after a merge `from` (and anything already merged into it) rides
        // on `into`
        let mut host: Vec<Vec<usize>> = vec![(0..nb).collect(); tn];
        for m in &merges {
            for row in host.iter_mut().skip(m.at as usize) {
                for h in row.iter_mut() {
                    if *h == m.from {
                        *h = m.into;
                    }
                }
            }
        }
        // a merged blob's center row keeps following its host
        for t in 0..tn {
            for blob in 0..nb {
                let h = host[t][blob];
                centers[t][blob] = centers[t][h];
            }
        }

        let n = spec.total_particles();
        let mut offsets = Vec::with_capacity(n);
        let mut velocities = Vec::with_capacity(n);
        for blob in 0..nb {
            let sigma = spec.spread(blob);
            for _ in 0..spec.particles_per_blob {
                offsets.push(gaussian3(&mut rng, sigma, spec.truncate_sigma).map(|c| c as f32));
                velocities.push(gaussian3(&mut rng, 1.0, 3.0).map(|c| c as f32));
            }
        }

        let halos = blob_halos(spec, &centers, &host);
        Ok(BlobUniverse {
            spec: spec.clone(),
            centers,
            host,
            offsets,
            velocities,
            halos,
        })
    }

    pub fn snapshot(&self, t: u32) -> ParticleSnapshot {
        let ppb = self.spec.particles_per_blob;
        let row = &self.centers[t as usize];
        let particles = (0..self.offsets.len())
            .into_par_iter()
            .map(|i| {
                let blob = i / ppb;
                let c = row[blob];
                let o = self.offsets[i];
                let sigma = self.spec.spread(blob);
                Particle {
                    id: i as u64 + 1,
                    position: std::array::from_fn(|k| (c[k] + o[k] as f64) as f32),
                    velocity: self.velocities[i],
                    mass: 1.0,
                    dispersion: 1.0,
                    density: (ppb as f64 / sigma.powi(3)) as f32,
                }
            })
            .collect();
        ParticleSnapshot::new(t, particles)
    }

    /// Writes `snap_XXXX.hsnp` per timestep, the halo catalog and the
    /// dataset descriptor into `dir`.
    pub fn write(&self, dir: &Path) -> Result<DatasetDescriptor> {
        fs::create_dir_all(dir)?;
        let tn = self.spec.timesteps;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut snapshots = Vec::new();
        let mut counts = Vec::new();
        for t in 0..tn {
            let snap = self.snapshot(t);
            for p in &snap.particles {
                for k in 0..3 {
                    lo[k] = lo[k].min(p.position[k] as f64);
                    hi[k] = hi[k].max(p.position[k] as f64);
                }
            }
            let name = DatasetDescriptor::snapshot_file_name(t);
            snap.write_file(dir.join(&name))?;
            snapshots.push(name);
            counts.push(snap.len() as u64);
        }
        write_catalog_file(&dir.join(CATALOG_FILE), &self.halos)?;
        let desc = DatasetDescriptor {
            name: self.spec.name.clone(),
            timestep_count: tn,
            particle_counts: counts,
            halo_count: self.halos.len() as u64,
            snapshots,
            catalog: CATALOG_FILE.into(),
            bounds: [lo, hi],
        };
        desc.write(&dir.join(DESCRIPTOR_FILE))?;
        Ok(desc)
    }
}

/// One master halo per live blob per timestep, ids in (timestep, blob)
/// order, each in its own FOF group.
fn blob_halos(spec: &BlobSpec, centers: &[Vec<[f64; 3]>], host: &[Vec<usize>]) -> Vec<HaloRecord> {
    let nb = spec.blob_count;
    let tn = spec.timesteps as usize;
    let id_of = |t: usize, blob: usize| (t * nb + blob) as u64 + 1;
    let mut out = Vec::new();
    for t in 0..tn {
        for blob in 0..nb {
            if host[t][blob] != blob {
                continue;
            }
            let members: Vec<usize> = (0..nb).filter(|&o| host[t][o] == blob).collect();
            let mass = (members.len() * spec.particles_per_blob) as f64;
            let sigma = (members.iter().map(|&o| spec.spread(o).powi(2)).sum::<f64>() / members.len() as f64).sqrt();
            let radius = 2.0 * sigma;
            let descendant_id = (t + 1 < tn).then(|| id_of(t + 1, host[t + 1][blob]));
            out.push(HaloRecord {
                halo_id: id_of(t, blob),
                timestep: t as u32,
                descendant_id,
                fof_group_id: id_of(t, blob),
                is_master: true,
                center: centers[t][blob],
                radius,
                mass,
                dispersion: sigma,
                density: mass / (4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)),
            });
        }
    }
    out
}

/// Builds and writes a blob dataset; the catalog is checked with the forest
/// loader before returning.
pub fn generate_synthetic_dataset(spec: &BlobSpec, seed: u64, dir: &Path) -> Result<DatasetDescriptor> {
    let universe = BlobUniverse::build(spec, seed)?;
    MergerForest::load(universe.halos.clone())?;
    universe.write(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_blob_spec() -> BlobSpec {
        BlobSpec {
            name: "pair".into(),
            blob_count: 2,
            particles_per_blob: 500,
            spreads: vec![1.0, 0.6],
            timesteps: 64,
            merges: vec![Merge { into: 0, from: 1, at: 32 }],
            box_size: 100.0,
            truncate_sigma: 2.0,
            centers: None,
        }
    }

    #[test]
    fn merge_links_both_lines_into_one_descendant() {
        let u = BlobUniverse::build(&two_blob_spec(), 1).unwrap();
        let f = MergerForest::load(u.halos.clone()).unwrap();
        let at31: Vec<_> = f.at_timestep(31).collect();
        assert_eq!(at31.len(), 2);
        assert_eq!(at31[0].descendant_id, at31[1].descendant_id);
        assert_eq!(f.at_timestep(32).count(), 1);
        assert_eq!(f.at_timestep(63).count(), 1);
        let root = f.at_timestep(63).next().unwrap().halo_id;
        assert_eq!(crate::halo::extract_subtree(&f, root).unwrap().len(), 64 + 32);
        // centers coincide at the merge
        assert_eq!(u.centers[32][0], u.centers[32][1]);
    }

    #[test]
    fn offsets_are_truncated() {
        let u = BlobUniverse::build(&two_blob_spec(), 2).unwrap();
        for (i, o) in u.offsets.iter().enumerate() {
            let sigma = u.spec.spread(i / 500);
            let r = o.iter().map(|c| (*c as f64).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 2.0 * sigma + 1e-5);
        }
    }

    #[test]
    fn inconsistent_scripts_rejected() {
        let mut s = two_blob_spec();
        s.merges = vec![Merge { into: 0, from: 1, at: 0 }];
        assert!(s.validate().is_err());
        s.merges = vec![Merge { into: 0, from: 1, at: 10 }, Merge { into: 1, from: 0, at: 20 }];
        assert_eq!(s.validate().unwrap_err().kind(), crate::ErrorKind::InvalidSpec);
        s.merges = vec![Merge { into: 0, from: 5, at: 10 }];
        assert!(s.validate().is_err());
        s.merges = vec![Merge { into: 0, from: 1, at: 10 }, Merge { into: 0, from: 1, at: 20 }];
        assert!(s.validate().is_err());
    }

    #[test]
    fn chained_merges() {
        let mut s = two_blob_spec();
        s.blob_count = 3;
        s.spreads = vec![1.0];
        s.merges = vec![Merge { into: 1, from: 2, at: 10 }, Merge { into: 0, from: 1, at: 20 }];
        let u = BlobUniverse::build(&s, 3).unwrap();
        let f = MergerForest::load(u.halos.clone()).unwrap();
        assert_eq!(f.at_timestep(15).count(), 2);
        assert_eq!(f.at_timestep(25).count(), 1);
        assert_eq!(u.host[25], vec![0, 0, 0]);
        let root = f.at_timestep(63).next().unwrap();
        assert_eq!(root.mass, 1500.0);
    }
}
