//! Splitting the thresholded volume into independent clusters.
//!
//! A 3D flood fill over inner and boundary voxels. Seeds are taken in
//! ascending voxel index and cluster ids count up from 1 in seed order. Under
//! [`SplitRule::Tagged`] a step along axis `k` between two face-adjacent
//! voxels is taken only when one of them has its axis-`k` tag bit set, i.e.
//! holds an above-threshold edge running in the marching direction. The
//! relation is symmetric, so labels do not depend on which side a fill
//! starts from. Two clusters whose boundary voxels touch across a face of
//! below-threshold nodes stay apart.
//!
//! Under the tagged rule only voxels with a non-empty tag seed clusters.
//! Untagged voxels not reached from a tagged one are grouped afterwards by
//! plain 6-connectivity among themselves, so every qualifying voxel ends up
//! in exactly one cluster.

use std::collections::VecDeque;

use super::classify::{classify_in_voxel, Side, VoxelClassification, VoxelKind};
use super::grid::{DensityGrid, SplitRule};
use super::surface::IsoSurfaceMesh;

pub type ClusterId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub cluster_id: ClusterId,
    /// Snapshot indices of the member particles, ascending.
    pub members: Vec<usize>,
    /// Voxel indices, ascending.
    pub voxels: Vec<usize>,
    pub surface: IsoSurfaceMesh,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn get(&self, id: ClusterId) -> Option<&Cluster> {
        id.checked_sub(1)
            .and_then(|i| self.clusters.get(i as usize))
            .filter(|c| c.cluster_id == id)
    }
}

const AXIS_STEPS: [(usize, isize); 6] = [(0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)];

#[inline]
fn neighbour(dims: [usize; 3], coords: [usize; 3], axis: usize, dir: isize) -> Option<usize> {
    let mut c = coords;
    let n = c[axis] as isize + dir;
    // legal coordinate range: 0 <= c < N along every axis
    if n < 0 || n >= dims[axis] as isize {
        return None;
    }
    c[axis] = n as usize;
    Some(c[0] + dims[0] * (c[1] + dims[1] * c[2]))
}

#[inline]
fn coords_of(dims: [usize; 3], v: usize) -> [usize; 3] {
    [v % dims[0], (v / dims[0]) % dims[1], v / (dims[0] * dims[1])]
}

/// Cluster label per voxel (0 = none).
pub fn label_voxels(
    dims: [usize; 3],
    classification: &VoxelClassification,
    rule: SplitRule,
) -> Vec<ClusterId> {
    let n = dims[0] * dims[1] * dims[2];
    assert_eq!(classification.cell_value.len(), n, "classification does not match grid");
    let qualifies = |v: usize| classification.is_qualifying(v);
    let mut label = vec![0 as ClusterId; n];
    let mut next_id: ClusterId = 1;
    let mut queue = VecDeque::new();

    let can_step = |v: usize, nb: usize, axis: usize| match rule {
        SplitRule::Untagged => true,
        SplitRule::Tagged => (classification.tag[v] | classification.tag[nb]) & (1 << axis) != 0,
    };
    let can_seed = |v: usize| match rule {
        SplitRule::Untagged => true,
        SplitRule::Tagged => classification.tag[v] != 0,
    };

    for seed in 0..n {
        if label[seed] != 0 || !qualifies(seed) || !can_seed(seed) {
            continue;
        }
        flood(dims, seed, next_id, &mut label, &mut queue, &qualifies, &can_step);
        next_id += 1;
    }

    if rule == SplitRule::Tagged {
        // Leftover untagged voxels, grouped among themselves.
        let leftover = |v: usize| qualifies(v) && classification.tag[v] == 0;
        for seed in 0..n {
            if label[seed] != 0 || !leftover(seed) {
                continue;
            }
            flood(dims, seed, next_id, &mut label, &mut queue, &leftover, &|_, _, _| true);
            next_id += 1;
        }
    }
    label
}

fn flood(
    dims: [usize; 3],
    seed: usize,
    id: ClusterId,
    label: &mut [ClusterId],
    queue: &mut VecDeque<usize>,
    qualifies: &dyn Fn(usize) -> bool,
    can_step: &dyn Fn(usize, usize, usize) -> bool,
) {
    label[seed] = id;
    queue.push_back(seed);
    while let Some(v) = queue.pop_front() {
        let c = coords_of(dims, v);
        for (axis, dir) in AXIS_STEPS {
            let Some(nb) = neighbour(dims, c, axis, dir) else {
                continue;
            };
            if label[nb] == 0 && qualifies(nb) && can_step(v, nb, axis) {
                label[nb] = id;
                queue.push_back(nb);
            }
        }
    }
}

pub fn split_clusters(
    grid: &DensityGrid,
    classification: &VoxelClassification,
    surface: &IsoSurfaceMesh,
    rule: SplitRule,
) -> ClusterSet {
    let label = label_voxels(grid.dims, classification, rule);
    let count = label.iter().copied().max().unwrap_or(0) as usize;
    let mut voxels: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (v, &l) in label.iter().enumerate() {
        if l != 0 {
            voxels[l as usize - 1].push(v);
        }
    }
    let threshold = classification.threshold;
    let clusters = voxels
        .into_iter()
        .enumerate()
        .map(|(i, vox)| {
            let mut members = Vec::new();
            for &v in &vox {
                let bucket = grid.voxel_particles(v);
                match classification.kind(v) {
                    VoxelKind::Inner => {
                        members.extend(bucket.iter().map(|&p| grid.particles[p as usize].index))
                    }
                    VoxelKind::Boundary => {
                        let corners = grid.corner_densities(v);
                        for &p in bucket {
                            let mp = &grid.particles[p as usize];
                            let (_, local) = grid
                                .locate(&mp.position)
                                .expect("bucketed particle lies in the grid");
                            if classify_in_voxel(&corners, local, threshold) == Side::Inside {
                                members.push(mp.index);
                            }
                        }
                    }
                    VoxelKind::Outer => unreachable!("outer voxels are never labelled"),
                }
            }
            members.sort_unstable();
            Cluster {
                cluster_id: i as ClusterId + 1,
                members,
                surface: surface.restrict_to(&vox),
                voxels: vox,
            }
        })
        .collect();
    ClusterSet { clusters }
}
