mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use haloscope::halo::{read_catalog_file, write_catalog_file};
use haloscope::selection::{wysiwyg_select, SelectionParams, ThresholdMode};
use haloscope::service::{Dataset, Explorer, ExplorerConfig, SelectRequest};
use haloscope::ErrorKind;

fn request(lasso: haloscope::selection::LassoRegion, grid_n: Option<u32>) -> SelectRequest {
    SelectRequest {
        camera: common::camera(),
        lasso,
        params: grid_n.map(|n| serde_json::json!({ "grid_n": n })),
        timestep: Some(0),
    }
}

fn explorer_on(dir: &std::path::Path) -> (Explorer, String) {
    let ex = Explorer::new(ExplorerConfig::default());
    ex.open_dataset(dir).unwrap();
    let id = ex.create_session(None).unwrap();
    (ex, id)
}

#[test]
fn newer_select_supersedes_older_one() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 2, 1, 4);
    let (ex, id) = explorer_on(dir.path());
    let ex = Arc::new(ex);

    let slow = {
        let (ex, id) = (Arc::clone(&ex), id.clone());
        std::thread::spawn(move || {
            let r = ex.select(&id, &request(common::both_blobs(), Some(256)), false);
            (r, Instant::now())
        })
    };
    std::thread::sleep(Duration::from_millis(20));
    let fast = ex.select(&id, &request(common::both_blobs(), Some(32)), false).unwrap();
    let fast_done = Instant::now();
    let (slow, slow_done) = slow.join().unwrap();
    match slow {
        // finished before the newer request began: delivered first
        Ok(_) => assert!(slow_done < fast_done),
        Err(e) => assert_eq!(e.kind(), ErrorKind::Superseded),
    }
    // the cache holds the newer selection
    let cached = ex.current_selection(&id).unwrap();
    assert_eq!(cached.grid.dims.iter().max(), Some(&32));
    assert_eq!(cached.threshold(), fast.threshold);
}

#[test]
fn rethreshold_equals_fresh_explicit_select() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 2, 1, 5);
    let (ex, id) = explorer_on(dir.path());
    let first = ex.select(&id, &request(common::both_blobs(), None), false).unwrap();
    let snap = ex.session(&id).unwrap().dataset.snapshot(0).unwrap();
    for factor in [0.5, 1.0, 2.0, 8.0] {
        let rho = first.threshold * factor;
        ex.update_threshold(&id, rho, false).unwrap();
        let cached = ex.current_selection(&id).unwrap();
        let params = SelectionParams {
            threshold_mode: ThresholdMode::Explicit(rho),
            ..Default::default()
        };
        let fresh = wysiwyg_select(&snap, &common::camera(), &common::both_blobs(), &params).unwrap();
        assert_eq!(cached.clusters, fresh.clusters, "factor {factor}");
        assert_eq!(cached.projected_pixel_counts, fresh.projected_pixel_counts);
        assert_eq!(cached.primary_cluster_id, fresh.primary_cluster_id);
    }
}

#[test]
fn raised_threshold_never_adds_unmarked_particles() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 2, 1, 6);
    let (ex, id) = explorer_on(dir.path());
    ex.select(&id, &request(common::left_blob(), None), false).unwrap();
    let base = ex.current_selection(&id).unwrap();
    let marked: std::collections::BTreeSet<usize> = base.marked().into_iter().collect();
    let mut prev = usize::MAX;
    for factor in [1.0, 1.5, 3.0, 6.0, 12.0] {
        ex.update_threshold(&id, base.threshold() * factor, false).unwrap();
        let r = ex.current_selection(&id).unwrap();
        let members: Vec<usize> = r.clusters.clusters.iter().flat_map(|c| c.members.iter().copied()).collect();
        assert!(members.iter().all(|m| marked.contains(m)));
        assert!(members.len() <= prev);
        prev = members.len();
    }
}

#[test]
fn descriptor_counts_match_catalog() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 6, 3, 7);
    let ds = Dataset::open(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("halos.csv")).unwrap();
    assert_eq!(ds.descriptor.halo_count, text.lines().count() as u64 - 1);
    assert_eq!(ds.timestep_count(), 6);
    assert_eq!(ds.descriptor.particle_counts, vec![40_000; 6]);
}

#[test]
fn broken_link_fails_open() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 4, 2, 8);
    let path = dir.path().join("halos.csv");
    let mut halos = read_catalog_file(&path).unwrap();
    halos[0].descendant_id = Some(9999);
    write_catalog_file(&path, &halos).unwrap();
    assert_eq!(Dataset::open(dir.path()).unwrap_err().kind(), ErrorKind::BrokenLink);
}

#[test]
fn missing_snapshot_is_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 4, 2, 9);
    std::fs::remove_file(dir.path().join("snap_0002.hsnp")).unwrap();
    assert_eq!(Dataset::open(dir.path()).unwrap_err().kind(), ErrorKind::IncompleteDataset);
}

#[test]
fn generation_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    common::generate(a.path(), 3, 1, 11);
    common::generate(b.path(), 3, 1, 11);
    for name in ["dataset.json", "halos.csv", "snap_0000.hsnp", "snap_0002.hsnp"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn closing_a_dataset_drops_its_sessions_and_trees() {
    let dir = tempfile::tempdir().unwrap();
    common::generate(dir.path(), 2, 1, 12);
    let (ex, id) = explorer_on(dir.path());
    ex.halo_tree(None, 3).unwrap();
    assert_eq!(ex.cached_tree_count(), 1);
    ex.close_dataset("two-blobs").unwrap();
    assert_eq!(ex.cached_tree_count(), 0);
    assert_eq!(ex.session(&id).unwrap_err().kind(), ErrorKind::NoSuchSession);
    assert_eq!(ex.close_dataset("two-blobs").unwrap_err().kind(), ErrorKind::NoSuchDataset);
}
