//! Projected-area ranking of cluster surfaces.
//!
//! Every cluster mesh is rasterised on its own coverage buffer through the
//! shared camera, so clusters never occlude each other. A pixel is covered
//! when any triangle contains its center. The buffer spans the camera's full
//! field of view at the requested resolution; rescaling is uniform across
//! clusters and leaves the ranking unchanged.

use rayon::prelude::*;

use crate::error::Result;
use crate::geom::Vec3;

use super::camera::{CameraPose, Projector, ViewPoint};
use super::split::{ClusterId, ClusterSet};
use super::surface::{IsoSurfaceMesh, Triangle};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaRanking {
    /// Covered pixel count per cluster, in cluster order.
    pub pixel_counts: Vec<u64>,
    /// Cluster with the most covered pixels; ties go to the lowest id.
    pub primary: Option<ClusterId>,
}

pub fn rank_projected_areas(
    clusters: &ClusterSet,
    camera: &CameraPose,
    resolution: [u32; 2],
) -> Result<AreaRanking> {
    camera.validate()?;
    let proj = camera.projector();
    let pixel_counts: Vec<u64> = clusters
        .clusters
        .par_iter()
        .map(|c| coverage_count(&c.surface, &proj, resolution))
        .collect();
    let primary = argmax_lowest_id(&pixel_counts)
        .map(|i| clusters.clusters[i].cluster_id);
    Ok(AreaRanking {
        pixel_counts,
        primary,
    })
}

fn argmax_lowest_id(counts: &[u64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &c) in counts.iter().enumerate() {
        if best.is_none_or(|b| c > counts[b]) {
            best = Some(i);
        }
    }
    best
}

/// Number of buffer pixels whose centers are covered by the mesh.
pub fn coverage_count(mesh: &IsoSurfaceMesh, proj: &Projector, [w, h]: [u32; 2]) -> u64 {
    let mut buf = CoverageBuffer::new(w, h);
    for tri in &mesh.triangles {
        buf.draw(proj, tri);
    }
    buf.count()
}

/// Boolean coverage raster.
pub struct CoverageBuffer {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl CoverageBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        CoverageBuffer {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|b| **b).count() as u64
    }

    pub fn get(&self, i: u32, j: u32) -> bool {
        self.bits[j as usize * self.width as usize + i as usize]
    }

    /// Clips a world-space triangle to the near/far slab, projects it and
    /// fills the covered pixel centers.
    pub fn draw(&mut self, proj: &Projector, tri: &Triangle) {
        let view: [ViewPoint; 3] = [proj.view(&tri[0]), proj.view(&tri[1]), proj.view(&tri[2])];
        if view.iter().all(|v| v.depth >= proj.near && v.depth <= proj.far) {
            let s = view.map(|v| proj.to_pixel(&v, self.width, self.height));
            self.fill_triangle(s[0], s[1], s[2]);
            return;
        }
        let poly = clip_depth(&view, proj.near, proj.far);
        if poly.len() < 3 {
            return;
        }
        let s: Vec<(f64, f64)> = poly
            .iter()
            .map(|v| proj.to_pixel(v, self.width, self.height))
            .collect();
        for k in 1..s.len() - 1 {
            self.fill_triangle(s[0], s[k], s[k + 1]);
        }
    }

    /// Marks every pixel whose center lies inside or on the triangle.
    pub fn fill_triangle(&mut self, a: (f64, f64), b: (f64, f64), c: (f64, f64)) {
        let area = edge(a, b, c);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let min_x = a.0.min(b.0).min(c.0);
        let max_x = a.0.max(b.0).max(c.0);
        let min_y = a.1.min(b.1).min(c.1);
        let max_y = a.1.max(b.1).max(c.1);
        // pixel i has center i + 0.5
        let i0 = ((min_x - 0.5).ceil().max(0.0)) as i64;
        let i1 = ((max_x - 0.5).floor().min(self.width as f64 - 1.0)) as i64;
        let j0 = ((min_y - 0.5).ceil().max(0.0)) as i64;
        let j1 = ((max_y - 0.5).floor().min(self.height as f64 - 1.0)) as i64;
        if i0 > i1 || j0 > j1 {
            return;
        }
        let sign = area.signum();
        let row = self.width as usize;
        for j in j0..=j1 {
            let py = j as f64 + 0.5;
            for i in i0..=i1 {
                let p = (i as f64 + 0.5, py);
                let w0 = edge(b, c, p) * sign;
                let w1 = edge(c, a, p) * sign;
                let w2 = edge(a, b, p) * sign;
                if w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0 {
                    self.bits[j as usize * row + i as usize] = true;
                }
            }
        }
    }
}

#[inline]
fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Sutherland-Hodgman clip of a camera-space polygon against
/// `near <= depth <= far`.
fn clip_depth(poly: &[ViewPoint], near: f64, far: f64) -> Vec<ViewPoint> {
    let lerp = |a: &ViewPoint, b: &ViewPoint, t: f64| ViewPoint {
        x: a.x + (b.x - a.x) * t,
        y: a.y + (b.y - a.y) * t,
        depth: a.depth + (b.depth - a.depth) * t,
    };
    let clip = |input: Vec<ViewPoint>, plane: f64, keep_above: bool| -> Vec<ViewPoint> {
        let inside = |v: &ViewPoint| if keep_above { v.depth >= plane } else { v.depth <= plane };
        let mut out = Vec::with_capacity(input.len() + 2);
        for i in 0..input.len() {
            let cur = &input[i];
            let prev = &input[(i + input.len() - 1) % input.len()];
            match (inside(prev), inside(cur)) {
                (true, true) => out.push(*cur),
                (true, false) => out.push(lerp(prev, cur, (plane - prev.depth) / (cur.depth - prev.depth))),
                (false, true) => {
                    out.push(lerp(prev, cur, (plane - prev.depth) / (cur.depth - prev.depth)));
                    out.push(*cur);
                }
                (false, false) => {}
            }
        }
        out
    };
    let near_clipped = clip(poly.to_vec(), near, true);
    if near_clipped.is_empty() {
        return near_clipped;
    }
    clip(near_clipped, far, false)
}

/// UV sphere, handy for tests and demos.
pub fn sphere_mesh(center: Vec3, radius: f64, rings: usize, segments: usize) -> IsoSurfaceMesh {
    use std::f64::consts::PI;
    let point = |r: usize, s: usize| {
        let theta = PI * r as f64 / rings as f64;
        let phi = 2.0 * PI * s as f64 / segments as f64;
        center + Vec3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin()) * radius
    };
    let mut triangles = Vec::with_capacity(rings * segments * 2);
    for r in 0..rings {
        for s in 0..segments {
            let (a, b, c, d) = (point(r, s), point(r, s + 1), point(r + 1, s), point(r + 1, s + 1));
            if r != 0 {
                triangles.push([a, b, c]);
            }
            if r + 1 != rings {
                triangles.push([b, d, c]);
            }
        }
    }
    let n = triangles.len();
    IsoSurfaceMesh {
        triangles,
        voxel_ranges: vec![(0, 0..n)],
    }
}
