//! Classical multidimensional scaling of a distance matrix.

use crate::linalg::jacobi_eigen;
use crate::prelude::*;
#[allow(unused_imports)]
use num_traits::Float;

/// Embeds an n x n distance matrix into `dim` coordinates.
///
/// The matrix is symmetrized as `(M + M^T) / 2` first (SID matrices may be
/// asymmetric), the squared matrix is double-centered, and the top
/// eigenvectors are scaled by root-eigenvalues with negative eigenvalues
/// clamped to zero. Returns the coordinates row by row.
pub fn classical_mds(n: usize, dist: &[f64], dim: usize) -> Vec<Vec<f64>> {
    assert_eq!(dist.len(), n * n);
    let mut sq = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let s = 0.5 * (dist[i * n + j] + dist[j * n + i]);
            sq[i * n + j] = s * s;
        }
    }
    // double centering: B = -1/2 (I - J/n) D2 (I - J/n)
    let mut row_mean = vec![0.0; n];
    let mut col_mean = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        for j in 0..n {
            row_mean[i] += sq[i * n + j];
            col_mean[j] += sq[i * n + j];
            grand += sq[i * n + j];
        }
    }
    for v in row_mean.iter_mut() {
        *v /= n as f64;
    }
    for v in col_mean.iter_mut() {
        *v /= n as f64;
    }
    grand /= (n * n) as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (sq[i * n + j] - row_mean[i] - col_mean[j] + grand);
        }
    }
    let (vals, vecs) = jacobi_eigen(n, &b);
    // eigenvalues within rounding of zero would otherwise leak eigensolver
    // noise through the square root
    let lmax = vals.first().copied().unwrap_or(0.0).max(0.0);
    let mut coords = vec![vec![0.0; dim]; n];
    for c in 0..dim.min(n) {
        let lam = if vals[c] <= 1e-12 * lmax { 0.0 } else { vals[c] };
        let scale = lam.sqrt();
        for (i, point) in coords.iter_mut().enumerate() {
            point[c] = scale * vecs[i * n + c];
        }
    }
    coords
}
