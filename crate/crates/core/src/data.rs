//! Labeled datasets, standardization, seeded splitting and synthetic blobs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Instances with class indices into a sorted list of original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    instances: Matrix,
    labels: Vec<usize>,
    class_labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(instances: Matrix, labels: Vec<usize>, class_labels: Vec<String>) -> Result<Self> {
        if instances.rows() == 0 {
            return Err(Error::Empty("dataset has no rows"));
        }
        if instances.cols() == 0 {
            return Err(Error::Empty("dataset has no feature columns"));
        }
        if labels.len() != instances.rows() {
            return Err(Error::DimensionMismatch {
                expected: instances.rows(),
                found: labels.len(),
            });
        }
        if class_labels.len() < 2 {
            return Err(Error::TooFewClasses);
        }
        if class_labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "class labels must be strictly ascending".into(),
            ));
        }
        let k = class_labels.len();
        if let Some(&label) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::LabelOutOfRange { label, classes: k });
        }
        if !instances.is_finite() {
            return Err(Error::NonFinite("instances"));
        }
        Ok(Self {
            instances,
            labels,
            class_labels,
        })
    }

    /// Encodes raw labels by ascending sort of their distinct values.
    pub fn from_raw_labels<S: AsRef<str>>(instances: Matrix, raw: &[S]) -> Result<Self> {
        let (labels, class_labels) = encode_labels(raw)?;
        Self::new(instances, labels, class_labels)
    }

    pub fn instances(&self) -> &Matrix {
        &self.instances
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn n_samples(&self) -> usize {
        self.instances.rows()
    }

    pub fn n_features(&self) -> usize {
        self.instances.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    /// Original label strings, row by row.
    pub fn decoded_labels(&self) -> Vec<&str> {
        self.labels
            .iter()
            .map(|&l| self.class_labels[l].as_str())
            .collect()
    }

    /// Same rows with the instance matrix replaced.
    pub fn with_instances(&self, instances: Matrix) -> Result<Self> {
        Self::new(instances, self.labels.clone(), self.class_labels.clone())
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            instances: self.instances.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_labels: self.class_labels.clone(),
        }
    }
}

/// Maps raw labels to indices of their ascending-sorted distinct values.
pub fn encode_labels<S: AsRef<str>>(raw: &[S]) -> Result<(Vec<usize>, Vec<String>)> {
    let mut index: BTreeMap<&str, usize> = raw.iter().map(|s| (s.as_ref(), 0)).collect();
    if index.len() < 2 {
        return Err(Error::TooFewClasses);
    }
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let labels = raw.iter().map(|s| index[s.as_ref()]).collect();
    let classes = index.keys().map(|s| s.to_string()).collect();
    Ok((labels, classes))
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardizationStats {
    pub fn fit(x: &Matrix) -> Result<Self> {
        let n = x.rows();
        if n == 0 {
            return Err(Error::Empty("standardize: no rows"));
        }
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| libm::sqrt(s / n as f64)).collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = if self.std[j] > 0.0 {
                (x[j] - self.mean[j]) / self.std[j]
            } else {
                0.0
            };
        }
        Ok(())
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.cols(),
            });
        }
        for i in 0..x.rows() {
            self.apply_row(x.row(i), out.row_mut(i))?;
        }
        Ok(out)
    }
}

/// Fits standardization on `train` and returns it with the transformed data.
pub fn standardize(train: &Matrix) -> Result<(StandardizationStats, Matrix)> {
    let stats = StandardizationStats::fit(train)?;
    let transformed = stats.apply(train)?;
    Ok((stats, transformed))
}

/// Seeded train/test split.
///
/// The test part gets `floor(n * test_fraction)` rows, clamped to `[1, n-1]`.
/// Both parts keep the original row order.
pub fn split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n = ds.n_samples();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "need at least two rows to split".into(),
        ));
    }
    let n_test = (libm::floor(n as f64 * test_fraction) as usize).clamp(1, n - 1);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test_idx, train_idx) = perm.split_at_mut(n_test);
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((ds.subset(train_idx), ds.subset(test_idx)))
}

/// Gaussian blobs: class `c` is centred `separation` away from the origin
/// with unit-variance spherical noise. Row `i` belongs to class `i % k`.
///
/// Class directions are `+e_0, -e_0, +e_1, -e_1, ...`; once the `2d` axis
/// directions run out, further classes get fixed pseudo-random unit vectors
/// (independent of `seed`).
pub fn gen_blobs(n: usize, k: usize, d: usize, separation: f64, seed: u64) -> Result<LabeledDataset> {
    if k < 2 {
        return Err(Error::TooFewClasses);
    }
    if n < k || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "gen_blobs needs n >= k >= 2 and d >= 1 (n={n}, k={k}, d={d})"
        )));
    }
    if !separation.is_finite() {
        return Err(Error::NonFinite("separation"));
    }
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            blob_direction(c, d)
                .into_iter()
                .map(|v| v * separation)
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        labels.push(c);
        for &center in &centers[c] {
            let noise: f64 = StandardNormal.sample(&mut rng);
            data.push(center + noise);
        }
    }
    let width = format!("{}", k - 1).len();
    let class_labels = (0..k).map(|c| format!("class{c:0width$}")).collect();
    LabeledDataset::new(Matrix::from_vec(n, d, data)?, labels, class_labels)
}

fn blob_direction(c: usize, d: usize) -> Vec<f64> {
    let mut dir = vec![0.0; d];
    if c < 2 * d {
        dir[c / 2] = if c.is_multiple_of(2) { 1.0 } else { -1.0 };
        return dir;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + c as u64);
    loop {
        for v in dir.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let norm = crate::linalg::norm2(&dir);
        if norm > 1e-8 {
            dir.iter_mut().for_each(|v| *v /= norm);
            return dir;
        }
    }
}
