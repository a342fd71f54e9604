//! Classical preprocessing ahead of the 2D classifier path: PCA dimension
//! reduction and deflation-based FastICA (g = tanh) for overlap reduction.

use crate::error::{QcbrError, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Rows are orthonormal principal directions, descending variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variances: Vec<f64>,
    /// Set when the covariance rank fell short of the requested dimension;
    /// the missing components are zero rows.
    pub rank_deficient: bool,
}

fn center(data: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let samples = data.len();
    if samples == 0 {
        return Err(QcbrError::invalid("empty data"));
    }
    let d = data[0].len();
    if data.iter().any(|row| row.len() != d) {
        return Err(QcbrError::invalid("ragged data matrix"));
    }
    let mut mean = vec![0.0; d];
    for row in data {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= samples as f64;
    }
    let centered = DMatrix::from_fn(samples, d, |r, c| data[r][c] - mean[c]);
    Ok((mean, centered))
}

/// Eigendecomposition of the sample covariance, eigenpairs sorted by
/// descending eigenvalue, eigenvector signs fixed deterministically.
fn covariance_eig(centered: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let samples = centered.nrows();
    let denom = (samples.max(2) - 1) as f64;
    let cov = centered.transpose() * centered / denom;
    let eig = cov.symmetric_eigen();
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut values = Vec::with_capacity(d);
    let mut vectors = Vec::with_capacity(d);
    for &idx in &order {
        values.push(eig.eigenvalues[idx].max(0.0));
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        // Largest-magnitude entry made positive to pin the sign.
        let lead = v.iter().cloned().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            v = -v;
        }
        vectors.push(v);
    }
    (values, vectors)
}

pub fn pca_fit(data: &[Vec<f64>], out_dim: usize) -> Result<PcaModel> {
    if out_dim < 1 {
        return Err(QcbrError::invalid("out_dim must be >= 1"));
    }
    if data.len() <= out_dim {
        return Err(QcbrError::invalid("need more samples than output dimensions"));
    }
    let (mean, centered) = center(data)?;
    let d = centered.ncols();
    if out_dim > d {
        return Err(QcbrError::invalid("out_dim exceeds data dimension"));
    }
    let (values, vectors) = covariance_eig(&centered);
    let max_value = values.first().copied().unwrap_or(0.0);
    let mut components = Vec::with_capacity(out_dim);
    let mut variances = Vec::with_capacity(out_dim);
    let mut rank_deficient = false;
    for k in 0..out_dim {
        if values[k] > EIG_TOL * max_value.max(1.0) {
            components.push(vectors[k].iter().cloned().collect());
            variances.push(values[k]);
        } else {
            components.push(vec![0.0; d]);
            variances.push(0.0);
            rank_deficient = true;
        }
    }
    Ok(PcaModel { mean, components, explained_variances: variances, rank_deficient })
}

pub fn pca_transform(model: &PcaModel, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = model.mean.len();
    data.iter()
        .map(|row| {
            if row.len() != d {
                return Err(QcbrError::invalid("sample dimension mismatch"));
            }
            Ok(model
                .components
                .iter()
                .map(|comp| {
                    comp.iter()
                        .zip(row.iter().zip(&model.mean))
                        .map(|(c, (v, m))| c * (v - m))
                        .sum()
                })
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcaModel {
    pub mean: Vec<f64>,
    /// Rows map centered data into the whitened space.
    pub whitening: Vec<Vec<f64>>,
    /// Unit-norm unmixing rows in whitened coordinates.
    pub unmixing: Vec<Vec<f64>>,
    /// Per-component convergence of the fixed-point iteration.
    pub converged: Vec<bool>,
}

const ICA_MAX_ITER: usize = 500;
const ICA_TOL: f64 = 1e-6;

/// Deflation FastICA: center, whiten, then per component iterate
/// w ← E[z·g(wᵀz)] − E[g′(wᵀz)]·w with g = tanh, Gram–Schmidt against the
/// rows already extracted, and normalize until the direction stabilizes.
pub fn ica_fit(data: &[Vec<f64>], num_components: usize, seed: u64) -> Result<IcaModel> {
    let d = data.first().map_or(0, |r| r.len());
    if num_components < 1 || num_components > d {
        return Err(QcbrError::invalid("num_components must be in 1..=data dimension"));
    }
    if data.len() < 10 * d {
        return Err(QcbrError::invalid("FastICA needs at least 10·d samples"));
    }
    let (mean, centered) = center(data)?;
    let (values, vectors) = covariance_eig(&centered);
    let max_value = values.first().copied().unwrap_or(0.0);
    let mut whitening_rows = Vec::with_capacity(num_components);
    for k in 0..num_components {
        if values[k] <= EIG_TOL * max_value.max(1.0) {
            return Err(QcbrError::Degenerate(
                "covariance rank below requested component count".into(),
            ));
        }
        let row = vectors[k].clone_owned() / values[k].sqrt();
        whitening_rows.push(row);
    }
    let samples = centered.nrows();
    // z: num_components × samples whitened data.
    let z = DMatrix::from_fn(num_components, samples, |c, s| {
        whitening_rows[c].dot(&centered.row(s).transpose())
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(num_components);
    let mut converged = Vec::with_capacity(num_components);
    for _ in 0..num_components {
        let mut w = DVector::from_fn(num_components, |_, _| rng.gen_range(-1.0..1.0));
        w /= w.norm();
        let mut ok = false;
        for _ in 0..ICA_MAX_ITER {
            let projections = w.transpose() * &z; // 1 × samples
            let mut new_w = DVector::zeros(num_components);
            let mut g_prime_sum = 0.0;
            for s in 0..samples {
                let u = projections[(0, s)];
                let t = u.tanh();
                new_w += z.column(s) * t;
                g_prime_sum += 1.0 - t * t;
            }
            new_w /= samples as f64;
            new_w -= &w * (g_prime_sum / samples as f64);
            for prev in &rows {
                let proj = new_w.dot(prev);
                new_w -= prev * proj;
            }
            let norm = new_w.norm();
            if norm < 1e-12 {
                break;
            }
            new_w /= norm;
            let alignment = new_w.dot(&w).abs();
            w = new_w;
            if alignment > 1.0 - ICA_TOL {
                ok = true;
                break;
            }
        }
        rows.push(w);
        converged.push(ok);
    }
    Ok(IcaModel {
        mean,
        whitening: whitening_rows.iter().map(|r| r.iter().cloned().collect()).collect(),
        unmixing: rows.iter().map(|r| r.iter().cloned().collect()).collect(),
        converged,
    })
}

pub fn ica_transform(model: &IcaModel, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = model.mean.len();
    data.iter()
        .map(|row| {
            if row.len() != d {
                return Err(QcbrError::invalid("sample dimension mismatch"));
            }
            let centered: Vec<f64> = row.iter().zip(&model.mean).map(|(v, m)| v - m).collect();
            let whitened: Vec<f64> = model
                .whitening
                .iter()
                .map(|w| w.iter().zip(&centered).map(|(a, b)| a * b).sum())
                .collect();
            Ok(model
                .unmixing
                .iter()
                .map(|u| u.iter().zip(&whitened).map(|(a, b)| a * b).sum())
                .collect())
        })
        .collect()
}
