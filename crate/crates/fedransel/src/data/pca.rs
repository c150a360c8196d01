//! Principal component analysis via Jacobi eigendecomposition of the sample
//! covariance matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted PCA basis: feature means, top-k orthonormal components (rows) and
/// the explained variance of each, in non-increasing order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    /// Fit on the given rows, keeping the top `k` components.
    pub fn fit<'a, I>(rows: I, n_features: usize, k: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
        I::IntoIter: Clone,
    {
        if k == 0 {
            return Err(Error::config("pca needs at least one component"));
        }
        if k > n_features {
            return Err(Error::config(format!(
                "pca k={k} exceeds feature count {n_features}"
            )));
        }
        let iter = rows.into_iter();
        let n = iter.clone().count();
        if n <= k {
            return Err(Error::config(format!(
                "pca needs more than {k} rows, got {n}"
            )));
        }

        let mut mean = vec![0.0; n_features];
        for row in iter.clone() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }

        // sample covariance
        let mut cov = vec![vec![0.0; n_features]; n_features];
        for row in iter {
            let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
            for i in 0..n_features {
                for j in i..n_features {
                    cov[i][j] += centered[i] * centered[j];
                }
            }
        }
        let denom = (n - 1) as f64;
        for i in 0..n_features {
            for j in i..n_features {
                cov[i][j] /= denom;
                cov[j][i] = cov[i][j];
            }
        }

        let (eigvals, eigvecs) = jacobi_eigen(&cov);
        let components = eigvecs[..k].to_vec();
        let explained_variance = eigvals[..k].to_vec();
        Ok(PcaModel {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Project one row onto the fitted basis.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = row.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.components
            .iter()
            .map(|c| c.iter().zip(&centered).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Map a projection back to feature space.
    pub fn inverse_transform(&self, proj: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (coeff, comp) in proj.iter().zip(&self.components) {
            for (o, c) in out.iter_mut().zip(comp) {
                *o += coeff * c;
            }
        }
        out
    }

    /// Fraction of total variance captured by each kept component.
    pub fn explained_variance_ratio(&self, total_variance: f64) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / total_variance)
            .collect()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors-as-rows), sorted by decreasing value.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let scale: f64 = matrix
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let eigvecs: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| (0..d).map(|k| v[k][i]).collect())
        .collect();
    (eigvals, eigvecs)
}
