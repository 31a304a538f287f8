//! Isosurface extraction and the voxel -> triangle lookup.

use std::io::Write;
use std::ops::Range;

use crate::geom::Vec3;

use super::classify::{VoxelClassification, INNER, OUTER};
use super::grid::DensityGrid;
use super::mc_tables::{CORNERS, EDGE_CORNERS, TRI_TABLE};

pub type Triangle = [Vec3; 3];

/// Triangle soup plus, for each voxel that produced triangles, the range of
/// its triangles (ascending voxel order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IsoSurfaceMesh {
    pub triangles: Vec<Triangle>,
    pub voxel_ranges: Vec<(usize, Range<usize>)>,
}

impl IsoSurfaceMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.triangles.len() * 3
    }

    pub fn voxel_triangles(&self, voxel: usize) -> &[Triangle] {
        match self.voxel_ranges.binary_search_by_key(&voxel, |(v, _)| *v) {
            Ok(i) => &self.triangles[self.voxel_ranges[i].1.clone()],
            Err(_) => &[],
        }
    }

    /// Sub-mesh made of the given voxels' triangles. `voxels` must be sorted.
    pub fn restrict_to(&self, voxels: &[usize]) -> IsoSurfaceMesh {
        let mut out = IsoSurfaceMesh::default();
        for &v in voxels {
            let tris = self.voxel_triangles(v);
            if tris.is_empty() {
                continue;
            }
            let start = out.triangles.len();
            out.triangles.extend_from_slice(tris);
            out.voxel_ranges.push((v, start..out.triangles.len()));
        }
        out
    }

    /// ASCII triangle soup: one `v x y z` line per vertex, one `f i j k` line
    /// per triangle with 1-based vertex indices.
    pub fn write_triangle_soup<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for tri in &self.triangles {
            for v in tri {
                writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
            }
        }
        for t in 0..self.triangles.len() {
            let b = 3 * t + 1;
            writeln!(w, "f {} {} {}", b, b + 1, b + 2)?;
        }
        Ok(())
    }
}

pub fn extract_cluster_surfaces(
    grid: &DensityGrid,
    classification: &VoxelClassification,
) -> IsoSurfaceMesh {
    let rho = classification.threshold;
    let mut mesh = IsoSurfaceMesh::default();
    for (voxel, &case) in classification.cell_value.iter().enumerate() {
        if case == OUTER || case == INNER {
            continue;
        }
        let d = grid.corner_densities(voxel);
        let [i, j, k] = grid.voxel_coords(voxel);
        let corner_pos = |c: usize| {
            let off = CORNERS[c];
            grid.node_position(i + off[0], j + off[1], k + off[2])
        };
        let edge_vertex = |e: usize| {
            let [a, b] = EDGE_CORNERS[e];
            let (da, db) = (d[a], d[b]);
            let t = ((rho - da) / (db - da)).clamp(0.0, 1.0);
            let pa = corner_pos(a);
            pa + (corner_pos(b) - pa) * t
        };
        let start = mesh.triangles.len();
        for tri in TRI_TABLE[case as usize].chunks_exact(3) {
            if tri[0] < 0 {
                break;
            }
            mesh.triangles.push([
                edge_vertex(tri[0] as usize),
                edge_vertex(tri[1] as usize),
                edge_vertex(tri[2] as usize),
            ]);
        }
        if mesh.triangles.len() > start {
            mesh.voxel_ranges.push((voxel, start..mesh.triangles.len()));
        }
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::classify::classify_voxels;
    use crate::selection::grid::{build_density_grid, SelectionParams};
    use std::collections::HashMap;

    /// 5x5x5-voxel grid whose central voxel's 8 nodes are high and every
    /// other node is zero.
    pub(crate) fn single_inner_voxel() -> DensityGrid {
        let pts = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(4.0, 4.0, 4.0)];
        let mut g = build_density_grid(&pts, &SelectionParams { grid_n: 5, ..Default::default() }).unwrap();
        assert_eq!(g.dims, [5, 5, 5]);
        g.node_density.iter_mut().for_each(|d| *d = 0.0);
        for off in &CORNERS {
            let n = g.node_index(2 + off[0], 2 + off[1], 2 + off[2]);
            g.node_density[n] = 10.0;
        }
        g
    }

    /// Independent triangle count for a case whose cube faces are all
    /// unambiguous: walk the iso-polygons around the cube faces and sum
    /// `len - 2` over the polygons.
    fn polygon_triangle_count(case: u8) -> Option<usize> {
        const FACES: [[usize; 4]; 6] = [
            [0, 1, 2, 3],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [3, 2, 6, 7],
            [0, 3, 7, 4],
            [1, 2, 6, 5],
        ];
        let above = |c: usize| case & (1 << c) != 0;
        let edge_of = |a: usize, b: usize| {
            EDGE_CORNERS
                .iter()
                .position(|e| (e[0] == a && e[1] == b) || (e[0] == b && e[1] == a))
                .unwrap()
        };
        // each face contributes segments joining its crossed edges
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for f in FACES {
            let crossed: Vec<usize> = (0..4)
                .filter(|&s| above(f[s]) != above(f[(s + 1) % 4]))
                .map(|s| edge_of(f[s], f[(s + 1) % 4]))
                .collect();
            match crossed.len() {
                0 => {}
                2 => {
                    adj.entry(crossed[0]).or_default().push(crossed[1]);
                    adj.entry(crossed[1]).or_default().push(crossed[0]);
                }
                _ => return None,
            }
        }
        let mut seen = std::collections::HashSet::new();
        let mut total = 0;
        for &start in adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut len = 1;
            let mut stack = vec![start];
            while let Some(e) = stack.pop() {
                for &n in &adj[&e] {
                    if seen.insert(n) {
                        len += 1;
                        stack.push(n);
                    }
                }
            }
            total += len - 2;
        }
        Some(total)
    }

    #[test]
    fn table_matches_polygon_walk_on_unambiguous_cases() {
        let mut checked = 0;
        for case in 1..=254u8 {
            if let Some(expected) = polygon_triangle_count(case) {
                let got = TRI_TABLE[case as usize].iter().take_while(|e| **e >= 0).count() / 3;
                assert_eq!(got, expected, "case {case}");
                checked += 1;
            }
        }
        assert!(checked >= 130, "{checked}");
    }

    #[test]
    fn below_threshold_grid_has_no_surface() {
        let g = single_inner_voxel();
        let c = classify_voxels(&g, 11.0).unwrap();
        assert!(extract_cluster_surfaces(&g, &c).is_empty());
    }

    #[test]
    fn single_inner_voxel_is_enclosed() {
        let g = single_inner_voxel();
        let c = classify_voxels(&g, 5.0).unwrap();
        let mesh = extract_cluster_surfaces(&g, &c);
        // oracle: polygon walk over every boundary voxel around the inner one
        let expected: usize = c
            .cell_value
            .iter()
            .filter(|v| **v != 0 && **v != 255)
            .map(|v| polygon_triangle_count(*v).unwrap())
            .sum();
        assert_eq!(expected, 6 * 2 + 12 * 2 + 8);
        assert_eq!(mesh.triangle_count(), expected);
        assert_eq!(mesh.voxel_ranges.len(), 26);

        // closed: every undirected edge (welded by position) is used twice
        let key = |v: &Vec3| [(v.x * 1e6).round() as i64, (v.y * 1e6).round() as i64, (v.z * 1e6).round() as i64];
        let mut edges: HashMap<([i64; 3], [i64; 3]), usize> = HashMap::new();
        for t in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (key(&t[e]), key(&t[(e + 1) % 3]));
                let k = if a < b { (a, b) } else { (b, a) };
                *edges.entry(k).or_default() += 1;
            }
        }
        assert!(edges.values().all(|n| *n == 2));
    }

    #[test]
    fn vertices_lie_on_the_isosurface() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec3> = (0..3000)
            .map(|_| Vec3::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
            .collect();
        let g = build_density_grid(&pts, &SelectionParams { grid_n: 12, ..Default::default() }).unwrap();
        let rho = g.mean_node_density();
        let c = classify_voxels(&g, rho).unwrap();
        let mesh = extract_cluster_surfaces(&g, &c);
        assert!(!mesh.is_empty());
        for (voxel, range) in &mesh.voxel_ranges {
            let corners = g.corner_densities(*voxel);
            let [i, j, k] = g.voxel_coords(*voxel);
            let base = g.node_position(i, j, k);
            for tri in &mesh.triangles[range.clone()] {
                for v in tri {
                    let local = (v - base) / g.cell_length;
                    let d = crate::selection::grid::trilinear(&corners, [local.x, local.y, local.z]);
                    assert!((d - rho).abs() <= 1e-5 * rho, "{d} vs {rho}");
                }
            }
        }
    }

    #[test]
    fn triangle_soup_format() {
        let g = single_inner_voxel();
        let c = classify_voxels(&g, 5.0).unwrap();
        let mesh = extract_cluster_surfaces(&g, &c).restrict_to(&[0, 31]);
        let mut out = Vec::new();
        mesh.write_triangle_soup(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let v = text.lines().filter(|l| l.starts_with("v ")).count();
        let f: Vec<&str> = text.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(v, mesh.vertex_count());
        assert_eq!(f.len(), mesh.triangle_count());
        assert_eq!(f[0], "f 1 2 3");
    }
}
