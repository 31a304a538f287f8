//! Piecewise-linear color tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorMap {
    points: Vec<(f64, Rgb)>,
}

impl ColorMap {
    /// Control points must start at 0, end at 1 and strictly increase.
    pub fn new(points: Vec<(f64, Rgb)>) -> Result<ColorMap> {
        let ok = points.len() >= 2
            && points[0].0 == 0.0
            && points[points.len() - 1].0 == 1.0
            && points.windows(2).all(|w| w[0].0 < w[1].0);
        if !ok {
            return Err(Error::InvalidParams("color map control points must increase from 0 to 1".into()));
        }
        Ok(ColorMap { points })
    }

    /// Cyan, blue, purple, yellow: far past to present.
    pub fn time() -> ColorMap {
        ColorMap {
            points: vec![
                (0.0, [0, 255, 255]),
                (1.0 / 3.0, [0, 0, 255]),
                (2.0 / 3.0, [128, 0, 128]),
                (1.0, [255, 255, 0]),
            ],
        }
    }

    pub fn control_points(&self) -> &[(f64, Rgb)] {
        &self.points
    }

    /// `t` is clamped to [0, 1]. Channels round half down, so the blue to
    /// purple midpoint is (64, 0, 191).
    pub fn lookup(&self, t: f64) -> Rgb {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let k = self
            .points
            .windows(2)
            .position(|w| t <= w[1].0)
            .unwrap_or(self.points.len() - 2);
        let (t0, c0) = self.points[k];
        let (t1, c1) = self.points[k + 1];
        let s = (t - t0) / (t1 - t0);
        let mut out = [0u8; 3];
        for i in 0..3 {
            let v = c0[i] as f64 + s * (c1[i] as f64 - c0[i] as f64);
            out[i] = (v - 0.5).ceil().clamp(0.0, 255.0) as u8;
        }
        out
    }
}

pub fn time_colormap(t: f64) -> Rgb {
    ColorMap::time().lookup(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(time_colormap(0.0), [0, 255, 255]);
        assert_eq!(time_colormap(1.0 / 3.0), [0, 0, 255]);
        assert_eq!(time_colormap(2.0 / 3.0), [128, 0, 128]);
        assert_eq!(time_colormap(1.0), [255, 255, 0]);
        assert_eq!(time_colormap(0.5), [64, 0, 191]);
        assert_eq!(time_colormap(-3.0), time_colormap(0.0));
        assert_eq!(time_colormap(7.0), time_colormap(1.0));
    }

    #[test]
    fn rejects_bad_control_points() {
        assert!(ColorMap::new(vec![(0.0, [0; 3])]).is_err());
        assert!(ColorMap::new(vec![(0.0, [0; 3]), (0.0, [1; 3]), (1.0, [2; 3])]).is_err());
        assert!(ColorMap::new(vec![(0.1, [0; 3]), (1.0, [1; 3])]).is_err());
        assert!(ColorMap::new(vec![(0.0, [0; 3]), (1.0, [1; 3])]).is_ok());
    }
}
