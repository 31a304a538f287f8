//! The five-step selection pipeline: mask, mark, grid, extract/split, rank.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::snapshot::ParticleSnapshot;

use super::area::rank_projected_areas;
use super::camera::CameraPose;
use super::classify::{classify_voxels, VoxelClassification};
use super::grid::{DensityGrid, MarkedParticle, SelectionParams, ThresholdMode};
use super::lasso::{mark_particles, rasterize_lasso, LassoRegion};
use super::split::{split_clusters, Cluster, ClusterId, ClusterSet};
use super::surface::extract_cluster_surfaces;

/// Everything a selection produced. The grid is shared so the threshold can
/// be changed without re-marking or re-gridding.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub primary_cluster_id: Option<ClusterId>,
    pub clusters: ClusterSet,
    pub projected_pixel_counts: Vec<u64>,
    pub grid: Arc<DensityGrid>,
    pub classification: VoxelClassification,
    pub params: SelectionParams,
}

impl SelectionResult {
    pub fn threshold(&self) -> f64 {
        self.classification.threshold
    }

    pub fn primary(&self) -> Option<&Cluster> {
        self.primary_cluster_id.and_then(|id| self.clusters.get(id))
    }

    pub fn cluster(&self, id: ClusterId) -> Result<&Cluster> {
        self.clusters.get(id).ok_or(Error::NoSuchCluster(id))
    }

    /// Snapshot indices of every marked particle.
    pub fn marked(&self) -> Vec<usize> {
        self.grid.particles.iter().map(|p| p.index).collect()
    }

    /// Reruns classify, extract, split and rank on the cached grid.
    pub fn rethreshold(&self, threshold: f64, camera: &CameraPose) -> Result<SelectionResult> {
        select_on_grid(Arc::clone(&self.grid), threshold, camera, &self.params)
    }
}

/// Resolves the threshold for a grid.
pub fn resolve_threshold(grid: &DensityGrid, mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::MeanNodeDensity => grid.mean_node_density(),
        ThresholdMode::Explicit(rho) => rho,
    }
}

pub fn wysiwyg_select(
    snapshot: &ParticleSnapshot,
    camera: &CameraPose,
    lasso: &LassoRegion,
    params: &SelectionParams,
) -> Result<SelectionResult> {
    wysiwyg_select_cancellable(snapshot, camera, lasso, params, &|| false)
}

/// As [`wysiwyg_select`], checking `cancelled` between stages and returning
/// [`Error::Superseded`] once it reports true.
pub fn wysiwyg_select_cancellable(
    snapshot: &ParticleSnapshot,
    camera: &CameraPose,
    lasso: &LassoRegion,
    params: &SelectionParams,
    cancelled: &dyn Fn() -> bool,
) -> Result<SelectionResult> {
    let check = || if cancelled() { Err(Error::Superseded) } else { Ok(()) };
    params.validate()?;
    camera.validate()?;
    let mask = rasterize_lasso(lasso, camera.viewport)?;
    if mask.count() == 0 {
        return Err(Error::EmptySelection);
    }
    check()?;
    let marked = mark_particles(snapshot, camera, &mask)?;
    if marked.is_empty() {
        return Err(Error::EmptySelection);
    }
    check()?;
    let particles = marked
        .into_iter()
        .map(|index| MarkedParticle {
            index,
            position: snapshot.particles[index].pos(),
        })
        .collect();
    let grid = Arc::new(DensityGrid::build(particles, params)?);
    check()?;
    let threshold = resolve_threshold(&grid, params.threshold_mode);
    select_on_grid(grid, threshold, camera, params)
}

/// Classify, extract, split and rank on an existing grid.
pub fn select_on_grid(
    grid: Arc<DensityGrid>,
    threshold: f64,
    camera: &CameraPose,
    params: &SelectionParams,
) -> Result<SelectionResult> {
    let classification = classify_voxels(&grid, threshold)?;
    let mesh = extract_cluster_surfaces(&grid, &classification);
    let clusters = split_clusters(&grid, &classification, &mesh, params.split_rule);
    let ranking = rank_projected_areas(&clusters, camera, params.area_resolution)?;
    Ok(SelectionResult {
        primary_cluster_id: ranking.primary,
        clusters,
        projected_pixel_counts: ranking.pixel_counts,
        grid,
        classification,
        params: SelectionParams {
            threshold_mode: ThresholdMode::Explicit(threshold),
            ..*params
        },
    })
}
