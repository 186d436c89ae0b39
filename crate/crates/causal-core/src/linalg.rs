//! Small dense linear algebra on row-major `f64` squares.
//!
//! The matrices in this crate are tiny (node counts, not sample counts), so a
//! cyclic Jacobi eigensolver and Cholesky factorization cover everything:
//! Bures roots, Gaussian conditioning, MDS embeddings and Gauss-Hermite rules.

use crate::prelude::*;
use crate::{CoreError, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// C = A * B for n x n row-major matrices.
pub fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn transpose(n: usize, a: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvector `j` stored in
/// column `j` (i.e. `vecs[i * n + j]`), sorted by descending eigenvalue.
pub fn jacobi_eigen(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_owned();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n <= 1 {
        return (m, v);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| m[i * n + i].abs()).fold(1e-300, f64::max);
        if off.sqrt() <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    // sort descending, permuting eigenvector columns along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = vec![0.0; n * n];
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vecs[i * n + newj] = v[i * n + oldj];
        }
    }
    vals = sorted_vals;
    (vals, sorted_vecs)
}

/// Symmetric PSD square root via eigendecomposition.
///
/// Eigenvalues down to `-tol * scale` are clamped to zero; anything below
/// that is reported as a non-PSD input.
pub fn sym_sqrt_psd(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let (vals, vecs) = jacobi_eigen(n, a);
    let scale = vals.iter().cloned().fold(1.0, f64::max);
    let mut root = vec![0.0; n * n];
    for (j, &lam) in vals.iter().enumerate() {
        if lam < -1e-6 * scale {
            return Err(CoreError::Numerical(format!(
                "matrix is not positive semidefinite (eigenvalue {lam:.3e})"
            )));
        }
        let r = lam.max(0.0).sqrt();
        for i in 0..n {
            for k in 0..n {
                root[i * n + k] += r * vecs[i * n + j] * vecs[k * n + j];
            }
        }
    }
    Ok(root)
}

/// Lower-triangular Cholesky factor of a positive-definite matrix.
pub fn cholesky(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves A x = b given the Cholesky factor L of A.
pub fn chol_solve(n: usize, l: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = b.to_owned();
    for i in 0..n {
        for k in 0..i {
            let t = l[i * n + k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = l[k * n + i] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// log det A given its Cholesky factor.
pub fn chol_logdet(n: usize, l: &[f64]) -> f64 {
    (0..n).map(|i| l[i * n + i].ln()).sum::<f64>() * 2.0
}

/// Nodes and weights for E[f(X)], X ~ N(0,1), by Golub-Welsch on the
/// Hermite Jacobi matrix. Weights sum to one.
pub fn gauss_hermite_normal(q: usize) -> Vec<(f64, f64)> {
    assert!(q >= 1);
    let n = q;
    let mut j = vec![0.0; n * n];
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i - 1) * n + i] = b;
        j[i * n + (i - 1)] = b;
    }
    let (vals, vecs) = jacobi_eigen(n, &j);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let node = vals[k] * core::f64::consts::SQRT_2;
            let w = vecs[k]; // first component of eigenvector k
            (node, w * w)
        })
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = out.iter().map(|p| p.1).sum();
    for p in out.iter_mut() {
        p.1 /= total;
    }
    out
}
