//! Which master halos a selected cluster contains.

use super::forest::{progenitor_order, HaloId, MergerForest};
use crate::error::Result;
use crate::geom::Vec3;
use crate::selection::classify::{classify_in_voxel, Side};
use crate::selection::{ClusterId, SelectionResult};

/// Master halos at `timestep` whose center falls inside the cluster by the
/// same rule as particles: the host voxel belongs to the cluster and is
/// inner, or is boundary with trilinear density at the center >= threshold.
/// Heaviest first, ties by ascending id.
pub fn halos_in_selection(
    forest: &MergerForest,
    timestep: u32,
    result: &SelectionResult,
    cluster_id: ClusterId,
) -> Result<Vec<HaloId>> {
    let cluster = result.cluster(cluster_id)?;
    let grid = &result.grid;
    let mut hits: Vec<_> = forest
        .at_timestep(timestep)
        .filter(|h| h.is_master)
        .filter(|h| {
            let Ok((voxel, local)) = grid.locate(&Vec3::from(h.center)) else {
                return false;
            };
            cluster.voxels.binary_search(&voxel).is_ok()
                && classify_in_voxel(&grid.corner_densities(voxel), local, result.threshold())
                    == Side::Inside
        })
        .collect();
    hits.sort_by(|a, b| progenitor_order(a, b));
    Ok(hits.into_iter().map(|h| h.halo_id).collect())
}
