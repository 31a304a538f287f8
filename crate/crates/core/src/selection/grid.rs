//! Density gridding of the marked particles.
//!
//! The grid covers the bounding box of the marked particles padded by half a
//! cell on every side. Cells are cubic; the longest padded axis is split into
//! `grid_n` cells. Node densities live on the `(Nx+1) x (Ny+1) x (Nz+1)`
//! lattice, x fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};

use super::mc_tables::CORNERS;

/// Cell length used when every marked particle sits at the same point.
pub const DEGENERATE_CELL_LENGTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepositionMode {
    /// Each node of the host cell receives `w_x + w_y + w_z`.
    #[default]
    AdditivePaper,
    /// Standard cloud-in-cell: `w_x * w_y * w_z`.
    MultiplicativeCic,
}

impl DepositionMode {
    /// Total density a single particle deposits over its 8 nodes.
    pub fn mass_per_particle(self) -> f64 {
        match self {
            DepositionMode::AdditivePaper => 12.0,
            DepositionMode::MultiplicativeCic => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", content = "rho0", rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    MeanNodeDensity,
    Explicit(f64),
}


/// Step-gating rule for cluster splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Steps along axis k leave a voxel only through its axis-k tag bit.
    #[default]
    Tagged,
    /// Plain 6-connected flood fill over inner and boundary voxels.
    Untagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionParams {
    pub grid_n: u32,
    pub threshold_mode: ThresholdMode,
    pub deposition_mode: DepositionMode,
    /// Width and height of each per-cluster coverage buffer.
    pub area_resolution: [u32; 2],
    pub split_rule: SplitRule,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            grid_n: 64,
            threshold_mode: ThresholdMode::MeanNodeDensity,
            deposition_mode: DepositionMode::AdditivePaper,
            area_resolution: [512, 512],
            split_rule: SplitRule::Tagged,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::InvalidParams(format!("grid_n must be >= 2, got {}", self.grid_n)));
        }
        if let ThresholdMode::Explicit(rho) = self.threshold_mode {
            if rho < 0.0 || !rho.is_finite() {
                return Err(Error::InvalidParams(format!("threshold must be >= 0, got {rho}")));
            }
        }
        if self.area_resolution[0] == 0 || self.area_resolution[1] == 0 {
            return Err(Error::InvalidParams("area resolution must be at least 1x1".into()));
        }
        Ok(())
    }
}

/// A particle deposited into the grid; `index` refers to the source snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedParticle {
    pub index: usize,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub origin: Vec3,
    pub cell_length: f64,
    /// Cell counts per axis.
    pub dims: [usize; 3],
    pub node_density: Vec<f64>,
    pub deposition: DepositionMode,
    pub particles: Vec<MarkedParticle>,
    // voxel -> particles, CSR layout
    bucket_offsets: Vec<u32>,
    bucket_items: Vec<u32>,
}

impl DensityGrid {
    pub fn node_dims(&self) -> [usize; 3] {
        [self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1]
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [nx, ny, _] = self.node_dims();
        i + nx * (j + ny * k)
    }

    #[inline]
    pub fn voxel_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn voxel_coords(&self, v: usize) -> [usize; 3] {
        let i = v % self.dims[0];
        let j = (v / self.dims[0]) % self.dims[1];
        let k = v / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn upper(&self) -> Vec3 {
        self.origin
            + Vec3::new(
                self.dims[0] as f64,
                self.dims[1] as f64,
                self.dims[2] as f64,
            ) * self.cell_length
    }

    pub fn bounds(&self) -> Aabb {
        Aabb {
            min: self.origin,
            max: self.upper(),
        }
    }

    /// Position of node `(i, j, k)` in world space.
    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.cell_length
    }

    /// Densities at the 8 corners of a voxel in marching-cubes corner order.
    pub fn corner_densities(&self, voxel: usize) -> [f64; 8] {
        let [i, j, k] = self.voxel_coords(voxel);
        let mut out = [0.0; 8];
        for (c, off) in CORNERS.iter().enumerate() {
            out[c] = self.node_density[self.node_index(i + off[0], j + off[1], k + off[2])];
        }
        out
    }

    /// Marked particles (positions into `particles`) bucketed in a voxel.
    pub fn voxel_particles(&self, voxel: usize) -> &[u32] {
        let lo = self.bucket_offsets[voxel] as usize;
        let hi = self.bucket_offsets[voxel + 1] as usize;
        &self.bucket_items[lo..hi]
    }

    /// Host voxel and local coordinates in `[0, 1]^3` of a position inside
    /// the grid domain. Positions on an interior node belong to the voxel
    /// above it; positions on the top face belong to the last voxel.
    pub fn locate(&self, p: &Vec3) -> Result<(usize, [f64; 3])> {
        let mut cell = [0usize; 3];
        let mut local = [0.0; 3];
        for a in 0..3 {
            let r = (p[a] - self.origin[a]) / self.cell_length;
            if !(r >= 0.0 && r <= self.dims[a] as f64) {
                return Err(Error::OutOfDomain([p.x, p.y, p.z]));
            }
            let (k1, w) = bracket(r, self.dims[a]);
            cell[a] = k1;
            local[a] = w;
        }
        Ok((self.voxel_index(cell[0], cell[1], cell[2]), local))
    }

    /// Trilinear interpolation of the corner densities of the host voxel.
    pub fn trilinear(&self, p: &Vec3) -> Result<f64> {
        let (voxel, local) = self.locate(p)?;
        Ok(trilinear(&self.corner_densities(voxel), local))
    }

    pub fn total_density(&self) -> f64 {
        self.node_density.iter().sum()
    }

    pub fn mean_node_density(&self) -> f64 {
        self.total_density() / self.node_density.len() as f64
    }

    pub fn max_node_density(&self) -> f64 {
        self.node_density.iter().copied().fold(0.0, f64::max)
    }
}

/// Lower bracketing node and the fractional offset from it along one axis.
///
/// `k1 = floor(r)` and `k2 = k1 + 1`, except that a position on the top
/// boundary node uses the last cell so every particle has a host voxel. For
/// integral `r` this yields weights `(1, 0)` instead of the degenerate
/// `floor == ceil` pair.
#[inline]
pub(crate) fn bracket(r: f64, cells: usize) -> (usize, f64) {
    let k1 = (r.floor().max(0.0) as usize).min(cells - 1);
    (k1, r - k1 as f64)
}

/// Trilinear interpolation over corners in marching-cubes order.
#[inline]
pub fn trilinear(c: &[f64; 8], [fx, fy, fz]: [f64; 3]) -> f64 {
    let x00 = c[0] * (1.0 - fx) + c[1] * fx;
    let x10 = c[3] * (1.0 - fx) + c[2] * fx;
    let x01 = c[4] * (1.0 - fx) + c[5] * fx;
    let x11 = c[7] * (1.0 - fx) + c[6] * fx;
    let y0 = x00 * (1.0 - fy) + x10 * fy;
    let y1 = x01 * (1.0 - fy) + x11 * fy;
    y0 * (1.0 - fz) + y1 * fz
}

/// Builds the density grid over positions, tagging each with its own index.
pub fn build_density_grid(positions: &[Vec3], params: &SelectionParams) -> Result<DensityGrid> {
    let marked = positions
        .iter()
        .enumerate()
        .map(|(index, &position)| MarkedParticle { index, position })
        .collect();
    DensityGrid::build(marked, params)
}

impl DensityGrid {
    pub fn build(particles: Vec<MarkedParticle>, params: &SelectionParams) -> Result<DensityGrid> {
        params.validate()?;
        let bbox = Aabb::from_points(particles.iter().map(|p| &p.position))
            .ok_or(Error::EmptySelection)?;
        if let Some(i) = particles.iter().position(|p| !p.position.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidPoint(i));
        }
        let extent = bbox.extent();
        let longest = extent.max();
        let grid_n = params.grid_n as f64;
        // The padded longest axis is `longest + l` and must hold exactly
        // `grid_n` cells, so `l = longest / (grid_n - 1)`.
        let cell_length = if longest > 0.0 {
            longest / (grid_n - 1.0)
        } else {
            DEGENERATE_CELL_LENGTH
        };
        let mut dims = [1usize; 3];
        for a in 0..3 {
            let cells = ((extent[a] + cell_length) / cell_length - 1e-9).ceil();
            dims[a] = (cells as usize).clamp(1, params.grid_n as usize);
        }
        let origin = bbox.min - Vec3::repeat(cell_length * 0.5);
        let mut grid = DensityGrid {
            origin,
            cell_length,
            dims,
            node_density: vec![0.0; (dims[0] + 1) * (dims[1] + 1) * (dims[2] + 1)],
            deposition: params.deposition_mode,
            particles,
            bucket_offsets: Vec::new(),
            bucket_items: Vec::new(),
        };
        grid.deposit();
        Ok(grid)
    }

    fn deposit(&mut self) {
        let n_vox = self.voxel_count();
        let mut host = Vec::with_capacity(self.particles.len());
        let mut counts = vec![0u32; n_vox + 1];
        let inv_l = 1.0 / self.cell_length;
        for p in &self.particles {
            let mut k1 = [0usize; 3];
            let mut w = [[0.0f64; 2]; 3];
            for a in 0..3 {
                let r = (p.position[a] - self.origin[a]) * inv_l;
                let (lo, frac) = bracket(r, self.dims[a]);
                k1[a] = lo;
                // weight toward k1 is (k2 - r), toward k2 is (r - k1)
                w[a] = [1.0 - frac, frac];
            }
            for off in &CORNERS {
                let (wx, wy, wz) = (w[0][off[0]], w[1][off[1]], w[2][off[2]]);
                let contrib = match self.deposition {
                    DepositionMode::AdditivePaper => wx + wy + wz,
                    DepositionMode::MultiplicativeCic => wx * wy * wz,
                };
                let n = self.node_index(k1[0] + off[0], k1[1] + off[1], k1[2] + off[2]);
                self.node_density[n] += contrib;
            }
            let v = self.voxel_index(k1[0], k1[1], k1[2]);
            host.push(v as u32);
            counts[v + 1] += 1;
        }
        for v in 0..n_vox {
            counts[v + 1] += counts[v];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; self.particles.len()];
        for (pi, &v) in host.iter().enumerate() {
            let slot = &mut fill[v as usize];
            items[*slot as usize] = pi as u32;
            *slot += 1;
        }
        self.bucket_offsets = counts;
        self.bucket_items = items;
    }
}
