//! Evolution trace paths of particles and halo lines across timesteps.

use std::borrow::Borrow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::forest::{HaloId, MergerForest};
use crate::error::{Error, Result};
use crate::snapshot::ParticleSnapshot;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ids", rename_all = "snake_case")]
pub enum TraceSubject {
    Particles(Vec<u64>),
    Halo(HaloId),
}

/// What a single path follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum TraceTarget {
    Particle(u64),
    Halo(HaloId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceVertex {
    pub timestep: u32,
    pub position: [f64; 3],
}

/// Consecutive timesteps with no gaps.
pub type TraceSegment = Vec<TraceVertex>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePath {
    pub subject: TraceTarget,
    pub segments: Vec<TraceSegment>,
}

impl TracePath {
    pub fn vertex_count(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }
}

/// Splits time-ordered vertices wherever a timestep is skipped.
fn split_at_gaps(vertices: Vec<TraceVertex>) -> Vec<TraceSegment> {
    let mut out: Vec<TraceSegment> = Vec::new();
    for v in vertices {
        match out.last_mut() {
            Some(seg) if seg.last().is_some_and(|l| l.timestep + 1 == v.timestep) => seg.push(v),
            _ => out.push(vec![v]),
        }
    }
    out
}

/// Accumulates particle trace vertices one snapshot at a time, so callers
/// can stream snapshots from disk.
#[derive(Debug, Clone)]
pub struct ParticleTracer {
    ids: Vec<u64>,
    slot: HashMap<u64, usize>,
    vertices: Vec<Vec<TraceVertex>>,
}

impl ParticleTracer {
    pub fn new(ids: &[u64]) -> ParticleTracer {
        let mut slot = HashMap::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            slot.entry(id).or_insert(i);
        }
        ParticleTracer {
            ids: ids.to_vec(),
            slot,
            vertices: vec![Vec::new(); ids.len()],
        }
    }

    pub fn visit(&mut self, snap: &ParticleSnapshot) {
        for p in &snap.particles {
            if let Some(&i) = self.slot.get(&p.id) {
                self.vertices[i].push(TraceVertex {
                    timestep: snap.timestep,
                    position: p.position.map(f64::from),
                });
            }
        }
    }

    /// One path per requested id seen at least once, in request order.
    pub fn finish(self) -> Result<Vec<TracePath>> {
        let mut out = Vec::new();
        for (i, mut v) in self.vertices.into_iter().enumerate() {
            if v.is_empty() {
                continue;
            }
            v.sort_by_key(|v| v.timestep);
            v.dedup_by_key(|v| v.timestep);
            out.push(TracePath {
                subject: TraceTarget::Particle(self.ids[i]),
                segments: split_at_gaps(v),
            });
        }
        if out.is_empty() {
            return Err(Error::EmptyTrace);
        }
        Ok(out)
    }
}

/// One path per requested particle id that appears in at least one
/// snapshot. Snapshots may come in any order.
pub fn trace_particles<S: Borrow<ParticleSnapshot>>(
    snapshots: impl IntoIterator<Item = S>,
    ids: &[u64],
) -> Result<Vec<TracePath>> {
    let mut tracer = ParticleTracer::new(ids);
    for snap in snapshots {
        tracer.visit(snap.borrow());
    }
    tracer.finish()
}

/// Main-progenitor line of `root` (the most massive progenitor at every
/// step), as halo centers from the earliest progenitor up to the root.
pub fn main_progenitor_line(forest: &MergerForest, root: HaloId) -> Result<Vec<HaloId>> {
    let mut i = forest.index_of(root).ok_or(Error::NoSuchHalo(root))?;
    let mut line = vec![root];
    while let Some(&p) = forest.progenitor_indices(i).first() {
        line.push(forest.halo_at(p).halo_id);
        i = p;
    }
    line.reverse();
    Ok(line)
}

pub fn trace_halo(forest: &MergerForest, root: HaloId) -> Result<TracePath> {
    let vertices = main_progenitor_line(forest, root)?
        .into_iter()
        .map(|id| {
            let h = forest.get(id).expect("line ids come from the forest");
            TraceVertex {
                timestep: h.timestep,
                position: h.center,
            }
        })
        .collect();
    Ok(TracePath {
        subject: TraceTarget::Halo(root),
        segments: split_at_gaps(vertices),
    })
}
