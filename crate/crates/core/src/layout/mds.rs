//! Classical (Torgerson) multidimensional scaling into the plane.
//!
//! B = -1/2 J D² J is formed explicitly for small inputs; for large inputs
//! B·v is applied as Xc (Xcᵀ v), which is the same operator for Euclidean
//! distances. Eigenpairs come from power iteration with deflation. Because
//! B of a 3D point set has rank at most 3, a final Rayleigh-Ritz step over
//! the span of the three iterated vectors makes the top pair exact even
//! when eigenvalues are nearly equal and power iteration alone would stall.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};

pub const MDS_ITERATIONS: usize = 200;
pub const MDS_TOLERANCE: f64 = 1e-10;
/// Above this many points B is never materialized.
pub const EXPLICIT_LIMIT: usize = 2048;

enum Operator {
    Explicit(DMatrix<f64>),
    /// Centered coordinates, n x 3.
    Gram(DMatrix<f64>),
}

impl Operator {
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Operator::Explicit(b) => b * v,
            Operator::Gram(xc) => xc * (xc.transpose() * v),
        }
    }
}

fn centered(points: &[Vec3]) -> DMatrix<f64> {
    let n = points.len();
    let mean = points.iter().fold(Vec3::zeros(), |a, p| a + p) / n as f64;
    DMatrix::from_fn(n, 3, |i, k| points[i][k] - mean[k])
}

fn double_centered(points: &[Vec3]) -> DMatrix<f64> {
    let n = points.len();
    let d2 = DMatrix::from_fn(n, n, |i, j| (points[i] - points[j]).norm_squared());
    let row_mean: Vec<f64> = (0..n).map(|i| d2.row(i).sum() / n as f64).collect();
    let all_mean = row_mean.iter().sum::<f64>() / n as f64;
    DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + all_mean))
}

impl Operator {
    fn trace(&self) -> f64 {
        match self {
            Operator::Explicit(b) => b.trace(),
            Operator::Gram(xc) => xc.norm_squared(),
        }
    }
}

/// Deterministic start: normalized all-ones with a small index-dependent
/// perturbation (B annihilates the all-ones vector itself). Later attempts
/// use other perturbations in case a symmetric input leaves the first one
/// orthogonal to a wanted eigenvector.
fn start_vector(n: usize, attempt: usize) -> DVector<f64> {
    let step = 0.618_033_988_75 * (attempt as f64 + 1.0);
    let v = DVector::from_fn(n, |i, _| {
        let k = i as f64 + 1.0;
        1.0 + 0.1 * (k * k * step).fract()
    });
    v.normalize()
}

const START_ATTEMPTS: usize = 4;

fn power_iterate(op: &Operator, found: &[(f64, DVector<f64>)], n: usize) -> (f64, DVector<f64>) {
    let floor = op.trace().abs() * 1e-9;
    let mut best = (0.0, start_vector(n, 0));
    for attempt in 0..START_ATTEMPTS {
        let pair = power_iterate_from(op, found, start_vector(n, attempt));
        if pair.0 > floor {
            return pair;
        }
        if attempt == 0 {
            best = pair;
        }
    }
    best
}

fn power_iterate_from(op: &Operator, found: &[(f64, DVector<f64>)], start: DVector<f64>) -> (f64, DVector<f64>) {
    // (B - sum lambda u u^T) v
    let apply = |v: &DVector<f64>| {
        let mut w = op.apply(v);
        for (lambda, u) in found {
            w -= u * (*lambda * u.dot(v));
        }
        w
    };
    let mut v = start;
    // orthogonalize the start against what is already found
    for (_, u) in found {
        v -= u * u.dot(&v);
    }
    let norm = v.norm();
    if norm == 0.0 {
        return (0.0, v);
    }
    v /= norm;
    let mut lambda = 0.0;
    for _ in 0..MDS_ITERATIONS {
        let w = apply(&v);
        let norm = w.norm();
        if norm < 1e-300 {
            return (0.0, v);
        }
        let next = w / norm;
        lambda = next.dot(&apply(&next));
        let delta = (&next - &v).norm();
        v = next;
        if delta < MDS_TOLERANCE {
            break;
        }
    }
    (lambda, v)
}

/// Projects points into 2D preserving pairwise distances as well as
/// possible. Each output axis is flipped so its largest-magnitude
/// coordinate is positive.
pub fn mds_project(points: &[Vec3]) -> Result<Vec<Vec2>> {
    if let Some(bad) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::InvalidPoint(bad));
    }
    Ok(project_with(points, points.len() <= EXPLICIT_LIMIT))
}

fn project_with(points: &[Vec3], explicit: bool) -> Vec<Vec2> {
    let n = points.len();
    if n <= 1 {
        return vec![Vec2::zeros(); n];
    }
    let op = if explicit {
        Operator::Explicit(double_centered(points))
    } else {
        Operator::Gram(centered(points))
    };

    let mut found: Vec<(f64, DVector<f64>)> = Vec::with_capacity(3);
    for _ in 0..3.min(n) {
        let pair = power_iterate(&op, &found, n);
        found.push(pair);
    }

    // Rayleigh-Ritz over the orthonormalized iterated vectors.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for (_, v) in &found {
        let mut w = v.clone();
        for b in &basis {
            w -= b * b.dot(&w);
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / norm);
        }
    }
    let images: Vec<DVector<f64>> = basis.iter().map(|b| op.apply(b)).collect();
    let m = basis.len();
    if m == 0 {
        return vec![Vec2::zeros(); n];
    }
    let t = DMatrix::from_fn(m, m, |i, j| 0.5 * (basis[i].dot(&images[j]) + basis[j].dot(&images[i])));
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let top = order.first().map_or(0.0, |&i| eig.eigenvalues[i]).max(0.0);
    let mut axes = [DVector::zeros(n), DVector::zeros(n)];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= top * 1e-12 {
            continue;
        }
        let mut u = DVector::zeros(n);
        for (i, b) in basis.iter().enumerate() {
            u += b * eig.eigenvectors[(i, k)];
        }
        let mut coord = u.normalize() * lambda.sqrt();
        let largest = coord.iter().copied().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
        if largest < 0.0 {
            coord = -coord;
        }
        axes[axis] = coord;
    }
    (0..n).map(|i| Vec2::new(axes[0][i], axes[1][i])).collect()
}
