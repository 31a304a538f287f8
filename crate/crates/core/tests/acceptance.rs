//! Acceptance suite: one PASS/FAIL line per headline criterion.
//!
//! Runs as a plain binary (no libtest harness) so the report is always
//! printed; exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use haloscope::halo::{
    extract_subtree, read_catalog, validate_forest, write_catalog, HaloRecord, MergerForest,
};
use haloscope::layout::{layout_merger_tree, mds_project, DiscStyle, TreeSpacing};
use haloscope::selection::area::sphere_mesh;
use haloscope::selection::{
    classify_particle_in_isosurface, classify_voxels, extract_cluster_surfaces, rank_projected_areas,
    split_clusters, wysiwyg_select, CameraPose, Cluster, ClusterSet, DensityGrid, DepositionMode, MarkedParticle,
    SelectionParams, Side, SplitRule, Viewport,
};
use haloscope::service::{Explorer, ExplorerConfig, SelectRequest};
use haloscope::synth::{generate_forest, BlobSpec, BlobUniverse, ForestSpec};
use haloscope::{ErrorKind, Particle, ParticleSnapshot, Vec3};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn marked(points: &[Vec3]) -> Vec<MarkedParticle> {
    points
        .iter()
        .enumerate()
        .map(|(index, &position)| MarkedParticle { index, position })
        .collect()
}

fn clumpy_points(rng: &mut ChaCha8Rng, n: usize, clumps: usize, extent: f64) -> Vec<Vec3> {
    let centers: Vec<Vec3> = (0..clumps)
        .map(|_| Vec3::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
        .collect();
    let spread = Normal::new(0.0, extent / 10.0).unwrap();
    (0..n)
        .map(|_| {
            let c = centers[rng.random_range(0..clumps)];
            c + Vec3::new(spread.sample(rng), spread.sample(rng), spread.sample(rng))
        })
        .collect()
}

// ---------------------------------------------------------------------------

fn deposition_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000;
    let pts: Vec<Vec3> = (0..n)
        .map(|_| Vec3::new(rng.random_range(0.0..50.0), rng.random_range(0.0..20.0), rng.random_range(0.0..35.0)))
        .collect();
    let mut worst = Duration::ZERO;
    for (mode, per_particle) in [(DepositionMode::AdditivePaper, 12.0), (DepositionMode::MultiplicativeCic, 1.0)] {
        let params = SelectionParams {
            deposition_mode: mode,
            ..Default::default()
        };
        let t0 = Instant::now();
        let grid = DensityGrid::build(marked(&pts), &params).map_err(|e| e.to_string())?;
        let took = t0.elapsed();
        worst = worst.max(took);
        let total: f64 = grid.node_density.iter().sum();
        let expect = per_particle * n as f64;
        let rel = (total - expect).abs() / expect;
        ensure!(rel <= 1e-6, "{mode:?}: sum {total} vs {expect} (rel {rel:e})");
        ensure!(took < Duration::from_secs(1), "{mode:?} took {}", secs(took));
    }
    Ok(format!("sum = 12N and N on 1e5 particles, slowest build {}", secs(worst)))
}

// ---------------------------------------------------------------------------

/// Host cell and local coordinates, computed independently of the library:
/// floor of the scaled offset, with the top face folded into the last cell.
fn oracle_inside(grid: &DensityGrid, rho0: f64, p: &Vec3) -> bool {
    let mut cell = [0usize; 3];
    let mut w = [0.0; 3];
    for a in 0..3 {
        let r = (p[a] - grid.origin[a]) / grid.cell_length;
        let k = (r.floor() as usize).min(grid.dims[a] - 1);
        cell[a] = k;
        w[a] = r - k as f64;
    }
    let mut d = 0.0;
    for dz in 0..2 {
        for dy in 0..2 {
            for dx in 0..2 {
                let node = grid.node_density[grid.node_index(cell[0] + dx, cell[1] + dy, cell[2] + dz)];
                let f = |b: usize, t: f64| if b == 1 { t } else { 1.0 - t };
                d += node * f(dx, w[0]) * f(dy, w[1]) * f(dz, w[2]);
            }
        }
    }
    d >= rho0
}

fn classification_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = SelectionParams {
        grid_n: 16,
        ..Default::default()
    };
    let mut checked = 0usize;
    let mut boundary_hits = 0usize;
    for g in 0..50 {
        let pts = clumpy_points(&mut rng, 3000, 1 + g % 5, 40.0);
        let grid = DensityGrid::build(marked(&pts), &params).map_err(|e| e.to_string())?;
        ensure!(grid.dims.iter().all(|&d| d <= 16), "grid {g} dims {:?}", grid.dims);
        let rho0 = grid.mean_node_density();
        let cls = classify_voxels(&grid, rho0).map_err(|e| e.to_string())?;
        let hi = grid.origin + Vec3::from(grid.dims.map(|d| d as f64)) * grid.cell_length;
        for _ in 0..10_000 {
            let p = Vec3::from(std::array::from_fn(|a| rng.random_range(grid.origin[a]..hi[a])));
            let got = classify_particle_in_isosurface(&grid, rho0, &p).map_err(|e| e.to_string())? == Side::Inside;
            ensure!(got == oracle_inside(&grid, rho0, &p), "grid {g}: mismatch at {p:?}");
            let (v, _) = grid.locate(&p).unwrap();
            if cls.cell_value[v] != 0 && cls.cell_value[v] != 255 {
                boundary_hits += 1;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} particles on 50 grids agree ({boundary_hits} in boundary voxels)"))
}

// ---------------------------------------------------------------------------

/// Plain BFS labelling of voxels with any corner at or above the threshold,
/// components ordered by their smallest voxel index.
fn brute_components(grid: &DensityGrid, rho0: f64) -> Vec<Vec<usize>> {
    let [nx, ny, nz] = grid.dims;
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let active = |i: usize, j: usize, k: usize| {
        (0..8).any(|c| {
            let n = grid.node_index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
            grid.node_density[n] >= rho0
        })
    };
    let mut seen = vec![false; nx * ny * nz];
    let mut out = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if seen[idx(i, j, k)] || !active(i, j, k) {
                    continue;
                }
                let mut comp = Vec::new();
                let mut q = VecDeque::from([(i, j, k)]);
                seen[idx(i, j, k)] = true;
                while let Some((a, b, c)) = q.pop_front() {
                    comp.push(idx(a, b, c));
                    let nbrs = [
                        (a.wrapping_sub(1), b, c),
                        (a + 1, b, c),
                        (a, b.wrapping_sub(1), c),
                        (a, b + 1, c),
                        (a, b, c.wrapping_sub(1)),
                        (a, b, c + 1),
                    ];
                    for (x, y, z) in nbrs {
                        if x < nx && y < ny && z < nz && !seen[idx(x, y, z)] && active(x, y, z) {
                            seen[idx(x, y, z)] = true;
                            q.push_back((x, y, z));
                        }
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Two boxes of dense nodes separated by a single plane of empty nodes: the
/// voxels on either side of the plane touch face to face, but no voxel edge
/// crossing the plane has both ends above threshold.
fn adjacent_boundary_scene() -> Result<(usize, usize), String> {
    let pts: Vec<Vec3> = [[0.0, 0.0, 0.0], [10.0, 4.0, 4.0]].iter().map(|p| Vec3::from(*p)).collect();
    let mut grid = DensityGrid::build(
        marked(&pts),
        &SelectionParams {
            grid_n: 11,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let [nx, ny, nz] = grid.node_dims();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let interior = (1..ny - 1).contains(&j) && (1..nz - 1).contains(&k);
                let blob = interior && i != nx / 2 && (1..nx - 1).contains(&i);
                let n = grid.node_index(i, j, k);
                grid.node_density[n] = if blob { 10.0 } else { 0.0 };
            }
        }
    }
    let cls = classify_voxels(&grid, 5.0).map_err(|e| e.to_string())?;
    let mesh = extract_cluster_surfaces(&grid, &cls);
    let tagged = split_clusters(&grid, &cls, &mesh, SplitRule::Tagged).len();
    let plain = split_clusters(&grid, &cls, &mesh, SplitRule::Untagged).len();
    Ok((tagged, plain))
}

fn flood_fill_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    for g in 0..100 {
        let n = rng.random_range(4..14);
        let pts: Vec<Vec3> = (0..50)
            .map(|_| Vec3::new(rng.random_range(0.0..30.0), rng.random_range(0.0..20.0), rng.random_range(0.0..25.0)))
            .collect();
        let params = SelectionParams {
            grid_n: n,
            split_rule: SplitRule::Untagged,
            ..Default::default()
        };
        let mut grid = DensityGrid::build(marked(&pts), &params).map_err(|e| e.to_string())?;
        let density = rng.random_range(0.05..0.5);
        for d in grid.node_density.iter_mut() {
            *d = if rng.random_bool(density) { rng.random_range(1.0..10.0) } else { 0.0 };
        }
        let rho0 = rng.random_range(0.5..5.0);
        let cls = classify_voxels(&grid, rho0).map_err(|e| e.to_string())?;
        let mesh = extract_cluster_surfaces(&grid, &cls);
        let got: Vec<Vec<usize>> = split_clusters(&grid, &cls, &mesh, SplitRule::Untagged)
            .clusters
            .into_iter()
            .map(|c| c.voxels)
            .collect();
        let expect = brute_components(&grid, rho0);
        ensure!(got == expect, "grid {g}: {} clusters vs oracle {}", got.len(), expect.len());
        total += expect.len();
    }
    let (tagged, plain) = adjacent_boundary_scene()?;
    ensure!(tagged == 2 && plain == 1, "adjacent scene: tagged {tagged}, untagged {plain}");
    Ok(format!("100 grids match 6-connected labelling ({total} components); adjacent scene 2 tagged / 1 untagged"))
}

// ---------------------------------------------------------------------------

/// Area of the perspective image of a sphere, in pixels of a `res` buffer
/// spanning the camera's field of view: the image is a conic section of the
/// tangent cone with the image plane.
fn sphere_image_pixels(cam: &CameraPose, center: Vec3, radius: f64, res: [u32; 2]) -> f64 {
    let eye = Vec3::from(cam.eye);
    let fwd = (Vec3::from(cam.look_at) - eye).normalize();
    let to_c = center - eye;
    let d = to_c.norm();
    let sin_a = radius / d;
    let cos_a = (1.0 - sin_a * sin_a).sqrt();
    let cos_t = to_c.dot(&fwd) / d;
    // area on the plane at unit distance
    let area = std::f64::consts::PI * sin_a * sin_a * cos_a / (cos_t * cos_t - sin_a * sin_a).powf(1.5);
    let half_h = (cam.vertical_fov.to_radians() / 2.0).tan();
    let half_w = half_h * cam.viewport.aspect();
    area / (4.0 * half_w * half_h) * res[0] as f64 * res[1] as f64
}

fn area_ranking() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cam = CameraPose {
        eye: [0.0, 0.0, 60.0],
        look_at: [0.0, 0.0, 0.0],
        up: [0.0, 1.0, 0.0],
        vertical_fov: 45.0,
        near: 0.5,
        far: 500.0,
        viewport: Viewport::new(800, 600),
    };
    let mut worst_err: f64 = 0.0;
    let mut trial = 0;
    while trial < 100 {
        let spheres: Vec<(Vec3, f64)> = (0..2)
            .map(|_| {
                let c = Vec3::new(rng.random_range(-15.0..15.0), rng.random_range(-10.0..10.0), rng.random_range(-20.0..10.0));
                (c, rng.random_range(1.0..6.0))
            })
            .collect();
        let (a, b) = (spheres[0], spheres[1]);
        if (a.0 - b.0).norm() <= a.1 + b.1 {
            continue;
        }
        let analytic: Vec<f64> = spheres.iter().map(|s| sphere_image_pixels(&cam, s.0, s.1, [512, 512])).collect();
        let (lo, hi) = (analytic[0].min(analytic[1]), analytic[0].max(analytic[1]));
        if hi < 1.05 * lo {
            continue;
        }
        trial += 1;
        let set = ClusterSet {
            clusters: spheres
                .iter()
                .enumerate()
                .map(|(i, s)| Cluster {
                    cluster_id: i as u32 + 1,
                    members: vec![],
                    voxels: vec![],
                    surface: sphere_mesh(s.0, s.1, 64, 128),
                })
                .collect(),
        };
        let expect = if analytic[0] >= analytic[1] { 1 } else { 2 };
        let r = rank_projected_areas(&set, &cam, [512, 512]).map_err(|e| e.to_string())?;
        ensure!(r.primary == Some(expect), "trial {trial}: primary {:?}, analytic {analytic:?}, counts {:?}", r.primary, r.pixel_counts);
        for (count, area) in r.pixel_counts.iter().zip(&analytic) {
            worst_err = worst_err.max((*count as f64 - area).abs() / area);
        }
        let doubled = rank_projected_areas(&set, &cam, [1024, 1024]).map_err(|e| e.to_string())?;
        ensure!(doubled.primary == r.primary, "trial {trial}: argmax changed at 1024^2");
    }
    Ok(format!("100/100 trials match the analytic argmax, stable at 1024^2; worst count error {:.2}%", 100.0 * worst_err))
}

// ---------------------------------------------------------------------------

fn random_rotation(rng: &mut ChaCha8Rng) -> nalgebra::Rotation3<f64> {
    let axis = nalgebra::Unit::new_normalize(Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    nalgebra::Rotation3::from_axis_angle(&axis, rng.random_range(0.0..std::f64::consts::TAU))
}

fn pairwise_error(a: &[Vec3], plane: &[nalgebra::Vector2<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            worst = worst.max(((a[i] - a[j]).norm() - (plane[i] - plane[j]).norm()).abs());
        }
    }
    worst
}

/// Top-2 classical-scaling coordinates from a full eigendecomposition of
/// the double-centered squared-distance matrix.
fn eigen_oracle(points: &[Vec3]) -> Vec<[f64; 2]> {
    let n = points.len();
    let d2 = DMatrix::from_fn(n, n, |i, j| (points[i] - points[j]).norm_squared());
    let j = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    let b = -0.5 * &j * d2 * &j;
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let mut out = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k].max(0.0);
        let col: Vec<f64> = eig.eigenvectors.column(k).iter().map(|v| v * lambda.sqrt()).collect();
        let big = col.iter().copied().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            out[i][axis] = sign * col[i];
        }
    }
    out
}

fn mds_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_plane: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(3..60);
        let rot = random_rotation(&mut rng);
        let shift = Vec3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let pts: Vec<Vec3> = (0..n)
            .map(|_| rot * Vec3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), 0.0) + shift)
            .collect();
        let plane = mds_project(&pts).map_err(|e| e.to_string())?;
        let err = pairwise_error(&pts, &plane);
        ensure!(err <= 1e-6, "coplanar set of {n}: pairwise error {err:e}");
        worst_plane = worst_plane.max(err);
    }
    let mut worst_3d: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(4..120);
        let rot = random_rotation(&mut rng);
        let scales = [8.0, 3.0, 1.0];
        let g = Normal::new(0.0, 1.0).unwrap();
        let pts: Vec<Vec3> = (0..n)
            .map(|_| rot * Vec3::new(scales[0] * g.sample(&mut rng), scales[1] * g.sample(&mut rng), scales[2] * g.sample(&mut rng)))
            .collect();
        let got = mds_project(&pts).map_err(|e| e.to_string())?;
        let expect = eigen_oracle(&pts);
        for (p, q) in got.iter().zip(&expect) {
            let err = (p.x - q[0]).abs().max((p.y - q[1]).abs());
            worst_3d = worst_3d.max(err);
        }
        ensure!(worst_3d <= 1e-6, "3D set of {n}: coordinate error {worst_3d:e}");
    }
    Ok(format!("coplanar worst pairwise error {worst_plane:.1e}; 3D worst coordinate error vs eigen oracle {worst_3d:.1e}"))
}

// ---------------------------------------------------------------------------

fn table1_regime() -> Outcome {
    let spec = ForestSpec::default();
    let t0 = Instant::now();
    let generated = generate_forest(&spec, 2012).map_err(|e| e.to_string())?;
    let gen_time = t0.elapsed();
    let t0 = Instant::now();
    let forest = MergerForest::load(generated.halos).map_err(|e| e.to_string())?;
    let load_time = t0.elapsed();
    ensure!(forest.len() == 536_048, "forest has {} halos", forest.len());
    ensure!(forest.timestep_count() == 64, "forest spans {} timesteps", forest.timestep_count());

    let style = DiscStyle::default();
    let spacing = TreeSpacing::default();
    let mut times = Vec::new();
    for (&root, &size) in generated.roots.iter().zip(&spec.tree_sizes) {
        let t0 = Instant::now();
        let subtree = extract_subtree(&forest, root).map_err(|e| e.to_string())?;
        let layout = layout_merger_tree(&subtree, &style, &spacing);
        let took = t0.elapsed();
        ensure!(subtree.len() == size && layout.nodes.len() == size, "root {root}: {} nodes, want {size}", subtree.len());
        ensure!(took < Duration::from_millis(250), "subtree of {size} took {}", secs(took));
        times.push(format!("{size}:{}", secs(took)));
    }

    // 1e6 particles in four blobs, selected through a lasso covering them
    let blobs = BlobSpec {
        blob_count: 4,
        particles_per_blob: 250_000,
        spreads: vec![3.0, 4.0, 2.5, 5.0],
        timesteps: 1,
        centers: Some(vec![[30.0, 40.0, 50.0], [70.0, 45.0, 45.0], [50.0, 65.0, 55.0], [45.0, 30.0, 40.0]]),
        ..Default::default()
    };
    let snap = BlobUniverse::build(&blobs, 9).map_err(|e| e.to_string())?.snapshot(0);
    ensure!(snap.len() == 1_000_000, "snapshot has {} particles", snap.len());
    let params = SelectionParams::default();
    // first run warms the thread pool
    wysiwyg_select(&snap, &common::camera(), &common::both_blobs(), &params).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let r = wysiwyg_select(&snap, &common::camera(), &common::both_blobs(), &params).map_err(|e| e.to_string())?;
    let select_time = t0.elapsed();
    ensure!(r.grid.dims.iter().all(|&d| d <= 64), "grid dims {:?}", r.grid.dims);
    ensure!(select_time < Duration::from_millis(500), "select on 1e6 particles took {}", secs(select_time));
    Ok(format!(
        "536048 halos (generate {}, load {}); subtree+layout {}; 1e6-particle select {} ({} clusters)",
        secs(gen_time),
        secs(load_time),
        times.join(" "),
        secs(select_time),
        r.clusters.len()
    ))
}

// ---------------------------------------------------------------------------

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (timesteps, merge_at) = (64, 32);
    common::generate(dir.path(), timesteps, merge_at, 2012);
    let ex = Explorer::new(ExplorerConfig::default());
    let desc = ex.open_dataset(dir.path()).map_err(|e| e.to_string())?;
    ensure!(desc.timestep_count == 64, "T = {}", desc.timestep_count);
    let session = ex.create_session(Some(&desc.name)).map_err(|e| e.to_string())?;
    let cam = common::camera();
    let req = SelectRequest {
        camera: cam,
        lasso: common::both_blobs(),
        params: None,
        timestep: Some(0),
    };
    let summary = ex.select(&session, &req, false).map_err(|e| e.to_string())?;
    ensure!(summary.cluster_count == 2, "{} clusters", summary.cluster_count);

    // the blob with the larger analytic image must be the primary
    let spec = common::two_blob_spec(timesteps, merge_at);
    let centers = spec.centers.clone().unwrap();
    let images: Vec<f64> = (0..2)
        .map(|b| sphere_image_pixels(&cam, Vec3::from(centers[b]), spec.truncate_sigma * spec.spreads[b], [512, 512]))
        .collect();
    let bigger_blob = if images[0] >= images[1] { 0 } else { 1 };
    let primary = summary.primary_cluster_id.ok_or("no primary")?;
    let sel = ex.current_selection(&session).map_err(|e| e.to_string())?;
    let snap = ex.session(&session).unwrap().dataset.snapshot(0).map_err(|e| e.to_string())?;
    let blob_of = |c: &Cluster| {
        let ids: BTreeSet<u64> = c.members.iter().map(|&i| (snap.particles[i].id - 1) / spec.particles_per_blob as u64).collect();
        ids
    };
    let primary_blobs = blob_of(sel.cluster(primary).unwrap());
    ensure!(primary_blobs == BTreeSet::from([bigger_blob as u64]), "primary cluster holds blobs {primary_blobs:?}");

    // master halos: ids are t * blobs + blob + 1
    ensure!(summary.halos == vec![bigger_blob as u64 + 1], "halos in primary {:?}", summary.halos);
    let other = 3 - primary;
    let forest = &ex.session(&session).unwrap().dataset.forest;
    let other_halos = haloscope::halo::halos_in_selection(forest, 0, &sel, other).map_err(|e| e.to_string())?;
    ensure!(other_halos == vec![2 - bigger_blob as u64], "halos in the other cluster {other_halos:?}");

    // the merged root's tree: two streams that join at the merge step
    let root = (timesteps as u64 - 1) * 2 + 1;
    let tree = ex.halo_tree(None, root).map_err(|e| e.to_string())?;
    let expect_nodes = timesteps as usize + merge_at as usize;
    ensure!(tree.nodes.len() == expect_nodes, "tree has {} nodes, want {expect_nodes}", tree.nodes.len());
    let mut incoming = std::collections::HashMap::new();
    for e in &tree.edges {
        *incoming.entry(e.to).or_insert(0) += 1;
    }
    let joins: Vec<u64> = incoming.iter().filter(|(_, &n)| n == 2).map(|(&id, _)| id).collect();
    ensure!(joins.len() == 1, "{} join points", joins.len());
    let join = tree.node(joins[0]).unwrap();
    ensure!(join.level == merge_at, "streams join at t={}, want {merge_at}", join.level);
    ensure!(incoming.values().all(|&n| n <= 2), "a node has more than two progenitors");
    let leaves: Vec<u32> = tree
        .nodes
        .iter()
        .filter(|n| !incoming.contains_key(&n.halo_id))
        .map(|n| n.level)
        .collect();
    ensure!(leaves == vec![0, 0], "leaf levels {leaves:?}");
    Ok(format!(
        "2 clusters, primary = blob {bigger_blob}, halos {:?}; root {root} tree of {} nodes joins at t={merge_at}",
        summary.halos,
        tree.nodes.len()
    ))
}

// ---------------------------------------------------------------------------

fn random_halos(rng: &mut ChaCha8Rng, n: usize) -> Vec<HaloRecord> {
    (1..=n as u64)
        .map(|id| HaloRecord {
            halo_id: id * 7,
            timestep: rng.random_range(0..64),
            descendant_id: rng.random_bool(0.7).then(|| rng.random_range(1..1_000_000)),
            fof_group_id: rng.random_range(0..u64::MAX),
            is_master: rng.random_bool(0.8),
            center: std::array::from_fn(|_| rng.random_range(-1e3..1e3) * 10f64.powi(rng.random_range(-8..8))),
            radius: rng.random_range(1e-6..1e3),
            mass: 10f64.powf(rng.random_range(-5.0..15.0)),
            dispersion: rng.random_range(0.0..1e4),
            density: if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..1e9) },
        })
        .collect()
}

fn halo(id: u64, t: u32, desc: Option<u64>, fof: u64, master: bool, mass: f64) -> HaloRecord {
    HaloRecord {
        halo_id: id,
        timestep: t,
        descendant_id: desc,
        fof_group_id: fof,
        is_master: master,
        center: [0.0; 3],
        radius: 1.0,
        mass,
        dispersion: 0.0,
        density: 0.0,
    }
}

fn format_roundtrips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..20 {
        let n = rng.random_range(0..5000);
        let snap = ParticleSnapshot::new(
            rng.random(),
            (0..n)
                .map(|_| Particle {
                    id: rng.random(),
                    position: std::array::from_fn(|_| f32::from_bits(rng.random::<u32>() & 0x7f7f_ffff)),
                    velocity: std::array::from_fn(|_| rng.random_range(-1e4..1e4)),
                    mass: rng.random(),
                    dispersion: rng.random(),
                    density: rng.random(),
                })
                .collect(),
        );
        let bytes = snap.to_hsnp_bytes();
        let back = ParticleSnapshot::from_hsnp_bytes(&bytes).map_err(|e| e.to_string())?;
        ensure!(back == snap && back.to_hsnp_bytes() == bytes, "HSNP round {round} differs");
        ensure!(bytes.len() == 20 + 44 * n, "HSNP length {}", bytes.len());

        let count = rng.random_range(0..2000);
        let halos = random_halos(&mut rng, count);
        let mut text = Vec::new();
        write_catalog(&mut text, &halos).map_err(|e| e.to_string())?;
        let back = read_catalog(&text[..]).map_err(|e| e.to_string())?;
        ensure!(back == halos, "catalog round {round} differs");
        ensure!(!text.contains(&b'\r'), "catalog has CR line endings");
    }

    let cases: Vec<(&str, Vec<HaloRecord>, ErrorKind)> = vec![
        (
            "missing descendant",
            vec![halo(1, 0, Some(99), 1, true, 1.0), halo(2, 1, None, 2, true, 1.0)],
            ErrorKind::BrokenLink,
        ),
        (
            "descendant not one step later",
            vec![halo(1, 0, Some(2), 1, true, 1.0), halo(2, 2, None, 2, true, 1.0)],
            ErrorKind::BadLink,
        ),
        (
            "duplicate id",
            vec![halo(1, 0, None, 1, true, 1.0), halo(1, 1, None, 2, true, 1.0)],
            ErrorKind::DuplicateId,
        ),
        (
            "two masters in one group",
            vec![halo(1, 0, None, 5, true, 1.0), halo(2, 0, None, 5, true, 2.0)],
            ErrorKind::FofViolation,
        ),
        (
            "satellite heavier than master",
            vec![halo(1, 0, None, 5, true, 1.0), halo(2, 0, None, 5, false, 2.0)],
            ErrorKind::FofViolation,
        ),
    ];
    for (name, halos, kind) in &cases {
        let mut text = Vec::new();
        write_catalog(&mut text, halos).map_err(|e| e.to_string())?;
        let records = read_catalog(&text[..]).map_err(|e| e.to_string())?;
        let err = MergerForest::load(records.clone()).err().ok_or(format!("{name}: accepted"))?;
        ensure!(err.kind() == *kind, "{name}: {} instead of {kind}", err.kind());
        let v = validate_forest(&MergerForest::from_records(records));
        ensure!(v.len() == 1 && v[0].kind == *kind, "{name}: violations {v:?}");
    }
    // a loop cannot be built from one-step-later links alone, so it shows
    // up together with the bad link that closes it
    let looped = vec![halo(1, 0, Some(2), 1, true, 1.0), halo(2, 1, Some(1), 2, true, 1.0)];
    let v = validate_forest(&MergerForest::from_records(looped));
    ensure!(v.iter().any(|v| v.kind == ErrorKind::Cycle), "loop not reported: {v:?}");

    let bad_lines = [
        "halo_id,timestep\n1,0\n",
        "halo_id,timestep,descendant_id,fof_group_id,is_master,x,y,z,radius,mass,dispersion,density\n1,0,,1,2,0,0,0,1,1,0,0\n",
        "halo_id,timestep,descendant_id,fof_group_id,is_master,x,y,z,radius,mass,dispersion,density\n1,0,,1,1,0,0,0,-1,1,0,0\n",
    ];
    for text in bad_lines {
        let err = read_catalog(text.as_bytes()).err().ok_or("malformed catalog accepted")?;
        ensure!(err.kind() == ErrorKind::Format, "malformed catalog gave {}", err.kind());
    }
    let mut truncated = ParticleSnapshot::new(0, vec![Particle::at(1, [0.0; 3])]).to_hsnp_bytes();
    truncated.pop();
    ensure!(ParticleSnapshot::from_hsnp_bytes(&truncated).is_err(), "truncated HSNP accepted");
    Ok(format!("20 HSNP + 20 catalog round trips exact; {} corrupted forests rejected with their classes", cases.len() + 1))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 8] = [
        ("deposition conservation", deposition_conservation),
        ("classification oracle equivalence", classification_equivalence),
        ("flood-fill correctness", flood_fill_correctness),
        ("area ranking", area_ranking),
        ("MDS recovery", mds_recovery),
        ("Table 1 regime", table1_regime),
        ("end-to-end scenario", end_to_end),
        ("format round-trips", format_roundtrips),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
