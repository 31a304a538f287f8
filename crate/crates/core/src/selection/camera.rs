use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(width: u32, height: u32) -> Self {
        Viewport { width, height }
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }
}

/// Right-handed look-at perspective camera. Pixel coordinates have their
/// origin at the top-left corner of the viewport with y growing downwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub eye: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    /// Degrees.
    pub vertical_fov: f64,
    pub near: f64,
    pub far: f64,
    pub viewport: Viewport,
}

/// A point expressed in the camera frame. `depth` is the distance along the
/// viewing direction, positive in front of the eye.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewPoint {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

impl CameraPose {
    pub fn validate(&self) -> Result<()> {
        let all_finite = self
            .eye
            .iter()
            .chain(&self.look_at)
            .chain(&self.up)
            .chain([&self.vertical_fov, &self.near, &self.far])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidCamera("non-finite camera parameter".into()));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::InvalidCamera(format!(
                "need 0 < near < far, got near={} far={}",
                self.near, self.far
            )));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < 180.0) {
            return Err(Error::InvalidCamera(format!(
                "vertical fov {} outside (0, 180)",
                self.vertical_fov
            )));
        }
        if self.viewport.width == 0 || self.viewport.height == 0 {
            return Err(Error::InvalidCamera("empty viewport".into()));
        }
        let forward = Vec3::from(self.look_at) - Vec3::from(self.eye);
        let up = Vec3::from(self.up);
        if forward.norm() == 0.0 {
            return Err(Error::InvalidCamera("eye coincides with look_at".into()));
        }
        if forward.cross(&up).norm() <= 1e-12 * forward.norm() * up.norm().max(1e-300) {
            return Err(Error::InvalidCamera("up is parallel to the view direction".into()));
        }
        Ok(())
    }

    /// Orthonormal (right, up, forward) basis.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let f = (Vec3::from(self.look_at) - Vec3::from(self.eye)).normalize();
        let s = f.cross(&Vec3::from(self.up)).normalize();
        let u = s.cross(&f);
        (s, u, f)
    }

    pub fn projector(&self) -> Projector {
        let (right, up, forward) = self.basis();
        let tan_half = (self.vertical_fov.to_radians() * 0.5).tan();
        Projector {
            eye: Vec3::from(self.eye),
            right,
            up,
            forward,
            tan_half,
            aspect: self.viewport.aspect(),
            near: self.near,
            far: self.far,
        }
    }

    /// Continuous pixel coordinates of `p` in this camera's viewport, or
    /// `None` when the point is clipped by the near or far plane.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let proj = self.projector();
        let v = proj.to_view(p)?;
        Some(proj.to_pixel(&v, self.viewport.width, self.viewport.height))
    }
}

/// Precomputed view transform for projecting many points.
#[derive(Debug, Clone, Copy)]
pub struct Projector {
    eye: Vec3,
    right: Vec3,
    up: Vec3,
    forward: Vec3,
    tan_half: f64,
    aspect: f64,
    pub near: f64,
    pub far: f64,
}

impl Projector {
    pub fn view(&self, p: &Vec3) -> ViewPoint {
        let d = p - self.eye;
        ViewPoint {
            x: d.dot(&self.right),
            y: d.dot(&self.up),
            depth: d.dot(&self.forward),
        }
    }

    /// Camera-frame point, or `None` outside the near/far slab.
    pub fn to_view(&self, p: &Vec3) -> Option<ViewPoint> {
        let v = self.view(p);
        (v.depth >= self.near && v.depth <= self.far).then_some(v)
    }

    pub fn to_ndc(&self, v: &ViewPoint) -> (f64, f64) {
        (
            v.x / (v.depth * self.tan_half * self.aspect),
            v.y / (v.depth * self.tan_half),
        )
    }

    /// Maps a camera-frame point onto a `width` x `height` pixel buffer that
    /// spans the full field of view.
    pub fn to_pixel(&self, v: &ViewPoint, width: u32, height: u32) -> (f64, f64) {
        let (nx, ny) = self.to_ndc(v);
        ((nx + 1.0) * 0.5 * width as f64, (1.0 - ny) * 0.5 * height as f64)
    }
}
