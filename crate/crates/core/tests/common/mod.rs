#![allow(dead_code)]

use std::path::Path;

use haloscope::selection::{CameraPose, LassoRegion, Viewport};
use haloscope::synth::{generate_synthetic_dataset, BlobSpec, Merge};

/// Two blobs far apart on the x axis; the left one is wider. Blob 1 merges
/// into blob 0 at `merge_at`.
pub fn two_blob_spec(timesteps: u32, merge_at: u32) -> BlobSpec {
    BlobSpec {
        name: "two-blobs".into(),
        blob_count: 2,
        particles_per_blob: 20_000,
        spreads: vec![3.0, 2.0],
        timesteps,
        merges: vec![Merge {
            into: 0,
            from: 1,
            at: merge_at,
        }],
        centers: Some(vec![[25.0, 50.0, 50.0], [75.0, 50.0, 50.0]]),
        ..Default::default()
    }
}

pub fn generate(dir: &Path, timesteps: u32, merge_at: u32, seed: u64) {
    generate_synthetic_dataset(&two_blob_spec(timesteps, merge_at), seed, dir).unwrap();
}

/// Looks down -z at the middle of the box; both blobs are in view.
pub fn camera() -> CameraPose {
    CameraPose {
        eye: [50.0, 50.0, 150.0],
        look_at: [50.0, 50.0, 50.0],
        up: [0.0, 1.0, 0.0],
        vertical_fov: 40.0,
        near: 1.0,
        far: 1000.0,
        viewport: Viewport::new(800, 600),
    }
}

pub fn both_blobs() -> LassoRegion {
    LassoRegion::Circle {
        center: [400.0, 300.0],
        radius: 290.0,
    }
}

/// Around the left blob only.
pub fn left_blob() -> LassoRegion {
    LassoRegion::Circle {
        center: [194.0, 300.0],
        radius: 80.0,
    }
}

pub fn empty_corner() -> LassoRegion {
    LassoRegion::Circle {
        center: [5.0, 5.0],
        radius: 3.0,
    }
}
