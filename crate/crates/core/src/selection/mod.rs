//! Structure-aware lasso selection.
//!
//! A lasso drawn over the rendered view marks the particles projecting into
//! it; the marked particles are gridded into a density volume, thresholded
//! and triangulated with marching cubes, split into connected clusters, and
//! the cluster with the largest projected area is reported as the primary
//! selection.

pub mod area;
pub mod camera;
pub mod classify;
pub mod grid;
pub mod lasso;
pub mod mc_tables;
pub mod pipeline;
pub mod split;
pub mod surface;

pub use area::{rank_projected_areas, AreaRanking};
pub use camera::{CameraPose, Viewport};
pub use classify::{classify_particle_in_isosurface, classify_voxels, Side, VoxelClassification, VoxelKind};
pub use grid::{
    build_density_grid, DensityGrid, DepositionMode, MarkedParticle, SelectionParams, SplitRule,
    ThresholdMode,
};
pub use lasso::{mark_particles, rasterize_lasso, LassoRegion, ScreenMask};
pub use pipeline::{select_on_grid, wysiwyg_select, wysiwyg_select_cancellable, SelectionResult};
pub use split::{label_voxels, split_clusters, Cluster, ClusterId, ClusterSet};
pub use surface::{extract_cluster_surfaces, IsoSurfaceMesh};
