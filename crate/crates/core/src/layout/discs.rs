//! Halo discs: visual encoding, the MDS scatter layout, and picking.

use serde::{Deserialize, Serialize};

use super::colormap::Rgb;
use super::mds::mds_project;
use crate::error::Result;
use crate::geom::{Vec2, Vec3};
use crate::halo::{HaloId, HaloRecord};

pub const PICK_SLACK_PX: f64 = 8.0;
pub const BRIGHTNESS_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscStyle {
    pub min_px: f64,
    pub max_px: f64,
    /// HSV hue in degrees for the lowest and highest dispersion.
    pub hue_ramp: [f64; 2],
}

impl Default for DiscStyle {
    fn default() -> Self {
        DiscStyle {
            min_px: 3.0,
            max_px: 30.0,
            hue_ramp: [240.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributeRanges {
    pub radius: [f64; 2],
    pub dispersion: [f64; 2],
    pub density: [f64; 2],
}

impl AttributeRanges {
    pub fn of<'a>(halos: impl IntoIterator<Item = &'a HaloRecord>) -> AttributeRanges {
        let mut r = AttributeRanges {
            radius: [f64::INFINITY, f64::NEG_INFINITY],
            dispersion: [f64::INFINITY, f64::NEG_INFINITY],
            density: [f64::INFINITY, f64::NEG_INFINITY],
        };
        let grow = |range: &mut [f64; 2], v: f64| {
            range[0] = range[0].min(v);
            range[1] = range[1].max(v);
        };
        for h in halos {
            grow(&mut r.radius, h.radius);
            grow(&mut r.dispersion, h.dispersion);
            grow(&mut r.density, h.density);
        }
        r
    }
}

/// Position of `v` within `range`, clamped to [0, 1]; 0.5 when the range
/// is empty or a single value.
fn unit(v: f64, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

fn hsv_to_rgb(hue: f64) -> Rgb {
    let h = hue.rem_euclid(360.0) / 60.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (c * 255.0).round() as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscAttributes {
    #[serde(rename = "r")]
    pub disc_radius: f64,
    pub color: Rgb,
    pub brightness: f64,
}

pub fn encode_disc(halo: &HaloRecord, ranges: &AttributeRanges, style: &DiscStyle) -> DiscAttributes {
    let [h0, h1] = style.hue_ramp;
    DiscAttributes {
        disc_radius: style.min_px + unit(halo.radius, ranges.radius) * (style.max_px - style.min_px),
        color: hsv_to_rgb(h0 + unit(halo.dispersion, ranges.dispersion) * (h1 - h0)),
        brightness: BRIGHTNESS_FLOOR + unit(halo.density, ranges.density) * (1.0 - BRIGHTNESS_FLOOR),
    }
}

pub fn encode_discs(halos: &[HaloRecord], ranges: &AttributeRanges, style: &DiscStyle) -> Vec<DiscAttributes> {
    halos.iter().map(|h| encode_disc(h, ranges, style)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub halo_id: HaloId,
    pub x: f64,
    pub y: f64,
    #[serde(flatten)]
    pub disc: DiscAttributes,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Layout2D {
    pub width: f64,
    pub height: f64,
    pub entries: Vec<LayoutEntry>,
}

/// MDS of halo centers, scaled uniformly into a `width` x `height` canvas
/// (pixels, y down) with room for the largest disc at the border.
pub fn layout_halos(halos: &[HaloRecord], style: &DiscStyle, width: f64, height: f64) -> Result<Layout2D> {
    let centers: Vec<Vec3> = halos.iter().map(|h| Vec3::from(h.center)).collect();
    let plane = mds_project(&centers)?;
    let ranges = AttributeRanges::of(halos);
    let margin = style.max_px;
    let (lo, hi) = plane.iter().fold(
        (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let span = hi - lo;
    let avail = Vec2::new((width - 2.0 * margin).max(1.0), (height - 2.0 * margin).max(1.0));
    let scale = [avail.x / span.x, avail.y / span.y]
        .into_iter()
        .filter(|s| s.is_finite())
        .fold(f64::INFINITY, f64::min);
    let scale = if scale.is_finite() { scale } else { 1.0 };
    let mid = (lo + hi) / 2.0;
    let entries = halos
        .iter()
        .zip(&plane)
        .map(|(h, p)| LayoutEntry {
            halo_id: h.halo_id,
            x: width / 2.0 + (p.x - mid.x) * scale,
            y: height / 2.0 - (p.y - mid.y) * scale,
            disc: encode_disc(h, &ranges, style),
        })
        .collect();
    Ok(Layout2D { width, height, entries })
}

/// Nearest disc center under Manhattan distance, if within its radius plus
/// the pick slack. Ties go to the lower halo id.
pub fn pick_halo(layout: &Layout2D, cursor: [f64; 2]) -> Option<HaloId> {
    layout
        .entries
        .iter()
        .map(|e| ((e.x - cursor[0]).abs() + (e.y - cursor[1]).abs(), e))
        .filter(|(d, e)| *d <= e.disc.disc_radius + PICK_SLACK_PX)
        .min_by(|(da, a), (db, b)| da.total_cmp(db).then(a.halo_id.cmp(&b.halo_id)))
        .map(|(_, e)| e.halo_id)
}
