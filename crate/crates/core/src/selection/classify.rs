//! Voxel classification against the density threshold.

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::grid::{trilinear, DensityGrid};
use super::mc_tables::{tag_of_case, CORNERS};

pub const OUTER: u8 = 0;
pub const INNER: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoxelKind {
    Outer,
    Boundary,
    Inner,
}

impl VoxelKind {
    pub fn of(cell_value: u8) -> VoxelKind {
        match cell_value {
            OUTER => VoxelKind::Outer,
            INNER => VoxelKind::Inner,
            _ => VoxelKind::Boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// Per-voxel marching-cubes case codes and axis tags for one threshold.
///
/// `cell_value` bit `i` is set iff corner `i` has density `>= threshold`, so
/// 0 marks an outer voxel, 255 an inner one and anything else a boundary
/// voxel. `tag` bit `k` is set iff one of the four edges parallel to axis `k`
/// has both corners at or above the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelClassification {
    pub cell_value: Vec<u8>,
    pub tag: Vec<u8>,
    pub threshold: f64,
}

impl VoxelClassification {
    pub fn kind(&self, voxel: usize) -> VoxelKind {
        VoxelKind::of(self.cell_value[voxel])
    }

    pub fn is_qualifying(&self, voxel: usize) -> bool {
        self.cell_value[voxel] != OUTER
    }
}

pub fn classify_voxels(grid: &DensityGrid, threshold: f64) -> Result<VoxelClassification> {
    if threshold < 0.0 || !threshold.is_finite() {
        return Err(Error::InvalidParams(format!("threshold must be >= 0, got {threshold}")));
    }
    let above: Vec<bool> = grid.node_density.iter().map(|d| *d >= threshold).collect();
    let [nx, ny, nz] = grid.dims;
    let mut cell_value = Vec::with_capacity(grid.voxel_count());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let mut case = 0u8;
                for (c, off) in CORNERS.iter().enumerate() {
                    if above[grid.node_index(i + off[0], j + off[1], k + off[2])] {
                        case |= 1 << c;
                    }
                }
                cell_value.push(case);
            }
        }
    }
    let tag = cell_value.iter().map(|c| tag_of_case(*c)).collect();
    Ok(VoxelClassification {
        cell_value,
        tag,
        threshold,
    })
}

/// Inside/outside test for a point against the threshold isosurface: inner
/// voxels are inside, outer voxels outside, and boundary voxels compare the
/// trilinear density at the point with the threshold.
pub fn classify_particle_in_isosurface(
    grid: &DensityGrid,
    threshold: f64,
    position: &Vec3,
) -> Result<Side> {
    let (voxel, local) = grid.locate(position)?;
    Ok(classify_in_voxel(&grid.corner_densities(voxel), local, threshold))
}

pub(crate) fn classify_in_voxel(corners: &[f64; 8], local: [f64; 3], threshold: f64) -> Side {
    let above = corners.iter().filter(|d| **d >= threshold).count();
    let inside = match above {
        8 => true,
        0 => false,
        _ => trilinear(corners, local) >= threshold,
    };
    if inside {
        Side::Inside
    } else {
        Side::Outside
    }
}
