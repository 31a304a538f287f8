use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snapshot::ParticleSnapshot;

use super::camera::{CameraPose, Viewport};

/// A user-drawn region in pixel coordinates (origin top-left).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LassoRegion {
    Circle { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl LassoRegion {
    pub fn validate(&self) -> Result<()> {
        match self {
            LassoRegion::Circle { center, radius } => {
                if *radius <= 0.0 || !radius.is_finite() {
                    return Err(Error::InvalidLasso(format!("circle radius {radius} must be positive")));
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidLasso("non-finite circle center".into()));
                }
            }
            LassoRegion::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidLasso(format!(
                        "polygon needs at least 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                if !vertices.iter().flatten().all(|c| c.is_finite()) {
                    return Err(Error::InvalidLasso("non-finite polygon vertex".into()));
                }
            }
        }
        Ok(())
    }

    /// Even-odd point-in-region test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            LassoRegion::Circle { center, radius } => {
                let dx = x - center[0];
                let dy = y - center[1];
                (dx * dx + dy * dy).sqrt() <= *radius
            }
            LassoRegion::Polygon { vertices } => {
                let mut inside = false;
                let n = vertices.len();
                let mut j = n - 1;
                for i in 0..n {
                    let [xi, yi] = vertices[i];
                    let [xj, yj] = vertices[j];
                    if (yi > y) != (yj > y) && x < crossing_x(xi, yi, xj, yj, y) {
                        inside = !inside;
                    }
                    j = i;
                }
                inside
            }
        }
    }
}

#[inline]
fn crossing_x(xi: f64, yi: f64, xj: f64, yj: f64, y: f64) -> f64 {
    (xj - xi) * (y - yi) / (yj - yi) + xi
}

/// One bit per viewport pixel, row-major from the top-left corner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl ScreenMask {
    pub fn empty(width: u32, height: u32) -> Self {
        ScreenMask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, i: u32, j: u32) -> bool {
        self.bits[j as usize * self.width as usize + i as usize]
    }

    #[inline]
    pub fn set(&mut self, i: u32, j: u32, v: bool) {
        self.bits[j as usize * self.width as usize + i as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Rasterises a lasso into a mask: pixel (i, j) is set iff its center
/// `(i + 0.5, j + 0.5)` lies inside the region.
pub fn rasterize_lasso(lasso: &LassoRegion, viewport: Viewport) -> Result<ScreenMask> {
    lasso.validate()?;
    if viewport.width == 0 || viewport.height == 0 {
        return Err(Error::InvalidParams("viewport must be at least 1x1".into()));
    }
    let mut mask = ScreenMask::empty(viewport.width, viewport.height);
    match lasso {
        LassoRegion::Circle { .. } => {
            // Only the bounding square needs visiting.
            let (x0, x1, y0, y1) = pixel_bounds(lasso, viewport);
            for j in y0..y1 {
                for i in x0..x1 {
                    if lasso.contains(i as f64 + 0.5, j as f64 + 0.5) {
                        mask.set(i, j, true);
                    }
                }
            }
        }
        LassoRegion::Polygon { vertices } => {
            // Scanline even-odd fill; crossings use the same arithmetic as
            // `contains` so both agree at every pixel center.
            let (_, _, y0, y1) = pixel_bounds(lasso, viewport);
            let n = vertices.len();
            let mut xs = Vec::with_capacity(n);
            for j in y0..y1 {
                let y = j as f64 + 0.5;
                xs.clear();
                let mut k = n - 1;
                for i in 0..n {
                    let [xi, yi] = vertices[i];
                    let [xk, yk] = vertices[k];
                    if (yi > y) != (yk > y) {
                        xs.push(crossing_x(xi, yi, xk, yk, y));
                    }
                    k = i;
                }
                xs.sort_by(f64::total_cmp);
                // A center x is inside iff an odd number of crossings lie
                // strictly to its right, i.e. x in [xs[2m], xs[2m+1]).
                for pair in xs.chunks_exact(2) {
                    let (lo, hi) = (pair[0], pair[1]);
                    let mut i = ((lo - 0.5).ceil().max(0.0)) as i64;
                    while i > 0 && (i - 1) as f64 + 0.5 >= lo {
                        i -= 1;
                    }
                    while i < viewport.width as i64 && (i as f64 + 0.5) < lo {
                        i += 1;
                    }
                    while i < viewport.width as i64 && (i as f64 + 0.5) < hi {
                        let cur = mask.get(i as u32, j);
                        // Overlapping pairs cannot occur after sorting, but
                        // toggling keeps the even-odd rule exact anyway.
                        mask.set(i as u32, j, !cur);
                        i += 1;
                    }
                }
            }
        }
    }
    Ok(mask)
}

fn pixel_bounds(lasso: &LassoRegion, viewport: Viewport) -> (u32, u32, u32, u32) {
    let (min_x, max_x, min_y, max_y) = match lasso {
        LassoRegion::Circle { center, radius } => (
            center[0] - radius,
            center[0] + radius,
            center[1] - radius,
            center[1] + radius,
        ),
        LassoRegion::Polygon { vertices } => vertices.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), v| (a.min(v[0]), b.max(v[0]), c.min(v[1]), d.max(v[1])),
        ),
    };
    let clamp = |v: f64, hi: u32| -> u32 { v.max(0.0).min(hi as f64) as u32 };
    (
        clamp(min_x.floor() - 1.0, viewport.width),
        clamp(max_x.ceil() + 1.0, viewport.width),
        clamp(min_y.floor() - 1.0, viewport.height),
        clamp(max_y.ceil() + 1.0, viewport.height),
    )
}

/// Indices of particles whose projection lands on a set mask pixel,
/// ascending.
pub fn mark_particles(
    snapshot: &ParticleSnapshot,
    camera: &CameraPose,
    mask: &ScreenMask,
) -> Result<Vec<usize>> {
    camera.validate()?;
    let vp = camera.viewport;
    if mask.width != vp.width || mask.height != vp.height {
        return Err(Error::DimensionMismatch {
            mask: (mask.width, mask.height),
            viewport: (vp.width, vp.height),
        });
    }
    let proj = camera.projector();
    let (w, h) = (vp.width as f64, vp.height as f64);
    let marked = snapshot
        .particles
        .iter()
        .enumerate()
        .filter_map(|(idx, p)| {
            let v = proj.to_view(&p.pos())?;
            let (px, py) = proj.to_pixel(&v, vp.width, vp.height);
            if !(px >= 0.0 && px < w && py >= 0.0 && py < h) {
                return None;
            }
            mask.get(px as u32, py as u32).then_some(idx)
        })
        .collect();
    Ok(marked)
}
