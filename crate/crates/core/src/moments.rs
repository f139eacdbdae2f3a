//! Empirical feature expectations `tau` and confidence band `lambda`.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::FittedFeatureMap;
use crate::linalg::Matrix;

/// Default band scale `s`.
pub const DEFAULT_BAND_SCALE: f64 = 0.3;

/// Defines the uncertainty set `{p : |E_p Phi - tau| <= lambda}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub tau: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub n: usize,
    pub s: f64,
}

impl MomentEstimate {
    pub fn dim(&self) -> usize {
        self.tau.len()
    }

    /// Checks lengths, signs and `lambda = s * sigma_hat / sqrt(n)`.
    pub fn validate(&self) -> Result<()> {
        let m = self.tau.len();
        for len in [self.lambda.len(), self.sigma_hat.len()] {
            if len != m {
                return Err(Error::DimensionMismatch { expected: m, found: len });
            }
        }
        if self.n == 0 {
            return Err(Error::Empty("moment sample count"));
        }
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidParameter("band scale must be finite and >= 0".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.tau) || !finite(&self.lambda) || !finite(&self.sigma_hat) {
            return Err(Error::NonFinite("moments"));
        }
        if self.lambda.iter().chain(&self.sigma_hat).any(|&x| x < 0.0) {
            return Err(Error::InvalidParameter("negative band".into()));
        }
        let root_n = libm::sqrt(self.n as f64);
        let consistent = self
            .lambda
            .iter()
            .zip(&self.sigma_hat)
            .all(|(&l, &sh)| l == self.s * sh / root_n);
        if !consistent {
            return Err(Error::InvalidParameter("lambda != s * sigma_hat / sqrt(n)".into()));
        }
        Ok(())
    }
}

/// Moments of `Phi(x_i, y_i)` for a dataset.
pub fn estimate_moments(map: &FittedFeatureMap, ds: &LabeledDataset, s: f64) -> Result<MomentEstimate> {
    let z = map.transform_matrix(ds.instances())?;
    moments_from_transformed(&z, ds.labels(), ds.n_classes(), s)
}

/// Moments from already transformed rows `z_i` and their class indices.
///
/// `tau_j` is the sample mean of coordinate `j` of `Phi`, `sigma_hat_j` its
/// population standard deviation, and `lambda_j = s * sigma_hat_j / sqrt(n)`.
pub fn moments_from_transformed(z: &Matrix, labels: &[usize], k: usize, s: f64) -> Result<MomentEstimate> {
    let n = z.rows();
    if n == 0 {
        return Err(Error::Empty("moments need at least one sample"));
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: labels.len() });
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::ClassCountMismatch { expected: k, found: label + 1 });
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter("band scale must be finite and >= 0".into()));
    }
    let d = z.cols();
    let m = k * d;
    let nf = n as f64;

    let mut tau = vec![0.0; m];
    let mut counts = vec![0usize; k];
    for (row, &y) in z.iter_rows().zip(labels) {
        counts[y] += 1;
        for (t, v) in tau[y * d..(y + 1) * d].iter_mut().zip(row) {
            *t += v;
        }
    }
    tau.iter_mut().for_each(|t| *t /= nf);

    // Phi_ij is z_i in its own block and 0 elsewhere.
    let mut ss = vec![0.0; m];
    for (row, &y) in z.iter_rows().zip(labels) {
        let block = &tau[y * d..(y + 1) * d];
        for ((acc, v), t) in ss[y * d..(y + 1) * d].iter_mut().zip(row).zip(block) {
            *acc += (v - t) * (v - t);
        }
    }
    for y in 0..k {
        let others = (n - counts[y]) as f64;
        for j in y * d..(y + 1) * d {
            ss[j] += others * tau[j] * tau[j];
        }
    }
    let sigma_hat: Vec<f64> = ss.into_iter().map(|v| libm::sqrt(v / nf)).collect();
    let root_n = libm::sqrt(nf);
    let lambda = sigma_hat.iter().map(|&sh| s * sh / root_n).collect();
    Ok(MomentEstimate {
        tau,
        lambda,
        sigma_hat,
        n,
        s,
    })
}
