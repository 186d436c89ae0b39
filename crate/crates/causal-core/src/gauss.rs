//! Multivariate Gaussians with the closed-form distances between them:
//! the Bures (squared 2-Wasserstein) form and the KL divergence.

use crate::linalg::{chol_logdet, chol_solve, cholesky, jacobi_eigen, matmul, sym_sqrt_psd};
use crate::prelude::*;
use crate::{CoreError, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Mean vector plus symmetric positive-semidefinite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDist {
    mean: Vec<f64>,
    cov: Vec<f64>,
}

impl GaussianDist {
    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.len() != d * d {
            return Err(CoreError::Mismatch(format!(
                "covariance must be {d}x{d}, got {} entries",
                cov.len()
            )));
        }
        let scale = cov
            .iter()
            .map(|v| v.abs())
            .fold(1.0f64, f64::max);
        for i in 0..d {
            for j in (i + 1)..d {
                if (cov[i * d + j] - cov[j * d + i]).abs() > 1e-9 * scale {
                    return Err(CoreError::Numerical(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        // symmetrize exactly and reject clearly negative spectra
        let mut sym = cov;
        for i in 0..d {
            for j in (i + 1)..d {
                let m = 0.5 * (sym[i * d + j] + sym[j * d + i]);
                sym[i * d + j] = m;
                sym[j * d + i] = m;
            }
        }
        let (vals, _) = jacobi_eigen(d, &sym);
        if let Some(&lmin) = vals.last() {
            if lmin < -1e-6 * scale {
                return Err(CoreError::Numerical(format!(
                    "covariance has negative eigenvalue {lmin:.3e}"
                )));
            }
        }
        Ok(GaussianDist { mean, cov: sym })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &[f64] {
        &self.cov
    }

    /// Marginal over a subset of coordinates, in the given order.
    pub fn marginal(&self, coords: &[usize]) -> Result<GaussianDist> {
        let d = self.dim();
        for &c in coords {
            if c >= d {
                return Err(CoreError::Mismatch(format!("coordinate {c} out of range")));
            }
        }
        let m = coords.len();
        let mean = coords.iter().map(|&c| self.mean[c]).collect();
        let mut cov = vec![0.0; m * m];
        for (i, &ci) in coords.iter().enumerate() {
            for (j, &cj) in coords.iter().enumerate() {
                cov[i * m + j] = self.cov[ci * d + cj];
            }
        }
        GaussianDist::new(mean, cov)
    }
}

/// Squared Bures-Wasserstein distance:
/// `||mu_p - mu_q||^2 + tr(S_p + S_q - 2 (S_q^{1/2} S_p S_q^{1/2})^{1/2})`.
pub fn gaussian_w2_squared(p: &GaussianDist, q: &GaussianDist) -> Result<f64> {
    let d = p.dim();
    if q.dim() != d {
        return Err(CoreError::Mismatch(format!(
            "dimension mismatch: {d} vs {}",
            q.dim()
        )));
    }
    if p.mean == q.mean && p.cov == q.cov {
        return Ok(0.0);
    }
    let mean_part: f64 = p
        .mean
        .iter()
        .zip(q.mean.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let rq = sym_sqrt_psd(d, &q.cov)?;
    let inner = matmul(d, &rq, &matmul(d, &p.cov, &rq));
    // inner is symmetric PSD up to rounding
    let cross = sym_sqrt_psd(d, &symmetrize(d, &inner))?;
    let tr_p: f64 = (0..d).map(|i| p.cov[i * d + i]).sum();
    let tr_q: f64 = (0..d).map(|i| q.cov[i * d + i]).sum();
    let tr_cross: f64 = (0..d).map(|i| cross[i * d + i]).sum();
    Ok((mean_part + tr_p + tr_q - 2.0 * tr_cross).max(0.0))
}

fn symmetrize(d: usize, a: &[f64]) -> Vec<f64> {
    let mut s = a.to_owned();
    for i in 0..d {
        for j in (i + 1)..d {
            let m = 0.5 * (s[i * d + j] + s[j * d + i]);
            s[i * d + j] = m;
            s[j * d + i] = m;
        }
    }
    s
}

/// KL(p || q) for Gaussians. Asymmetric; requires a nonsingular `q`
/// covariance. Returns infinity when `p` is singular but `q` is not.
pub fn gaussian_kl(p: &GaussianDist, q: &GaussianDist) -> Result<f64> {
    let d = p.dim();
    if q.dim() != d {
        return Err(CoreError::Mismatch(format!(
            "dimension mismatch: {d} vs {}",
            q.dim()
        )));
    }
    let lq = cholesky(d, &q.cov).ok_or_else(|| {
        CoreError::Numerical("KL divergence needs a nonsingular second covariance".into())
    })?;
    let logdet_q = chol_logdet(d, &lq);
    let logdet_p = match cholesky(d, &p.cov) {
        Some(lp) => chol_logdet(d, &lp),
        None => return Ok(f64::INFINITY),
    };
    // tr(Sq^-1 Sp): solve column by column
    let mut trace = 0.0;
    let mut col = vec![0.0; d];
    for j in 0..d {
        for i in 0..d {
            col[i] = p.cov[i * d + j];
        }
        let x = chol_solve(d, &lq, &col);
        trace += x[j];
    }
    let diff: Vec<f64> = q.mean.iter().zip(p.mean.iter()).map(|(a, b)| a - b).collect();
    let solved = chol_solve(d, &lq, &diff);
    let quad: f64 = diff.iter().zip(solved.iter()).map(|(a, b)| a * b).sum();
    Ok(0.5 * (logdet_q - logdet_p - d as f64 + trace + quad).max(0.0))
}
