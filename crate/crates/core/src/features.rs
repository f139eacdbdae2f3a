//! Instance feature maps `z(x)` and the instance-label map `Phi(x, y)`.
//!
//! Every map prepends a constant intercept coordinate, so `z(x)[0] == 1`.
//! The random maps draw from `ChaCha8Rng::seed_from_u64(seed)`
//! (`rand_chacha`), with Gaussian entries from `rand_distr::StandardNormal`;
//! fits are therefore reproducible bit-for-bit on every platform.
//!
//! To add a new kind of map, add a variant to [`FeatureMapConfig`] and
//! [`MapParams`], then fill in the three `match`es in `fit`,
//! `output_dim` and `transform_into`. Nothing downstream looks at the kind:
//! objectives and moments only consume transformed rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Rows used by the median heuristic.
pub const MEDIAN_SUBSAMPLE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise distance over a seeded subsample of the training rows.
    Median,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMapConfig {
    Linear,
    Fourier {
        n_components: usize,
        bandwidth: Bandwidth,
        seed: u64,
    },
    Relu {
        n_components: usize,
        seed: u64,
    },
    Threshold {
        n_thresholds: usize,
    },
}

impl FeatureMapConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Fourier { .. } => "fourier",
            Self::Relu { .. } => "relu",
            Self::Threshold { .. } => "threshold",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Fourier {
                n_components,
                bandwidth,
                ..
            } => {
                if n_components == 0 {
                    return Err(Error::InvalidParameter("n_components must be positive".into()));
                }
                if let Bandwidth::Fixed(s) = bandwidth {
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "bandwidth must be positive, got {s}"
                        )));
                    }
                }
            }
            Self::Relu { n_components: 0, .. } => {
                return Err(Error::InvalidParameter("n_components must be positive".into()));
            }
            Self::Threshold { n_thresholds: 0 } => {
                return Err(Error::InvalidParameter("n_thresholds must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Learned parameters of a feature map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapParams {
    Linear,
    /// `weights` is `D x d_in`; `sigma` is the bandwidth that was used.
    Fourier {
        weights: Matrix,
        offsets: Vec<f64>,
        sigma: f64,
    },
    /// `weights` is `D x (d_in + 1)`, the last column multiplying the bias.
    Relu { weights: Matrix },
    /// Sorted thresholds per input dimension.
    Threshold { thresholds: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedFeatureMap {
    d_in: usize,
    params: MapParams,
}

impl FittedFeatureMap {
    /// Learns the map parameters from (standardized) training instances.
    pub fn fit(config: &FeatureMapConfig, x: &Matrix) -> Result<Self> {
        config.validate()?;
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::Empty("feature map fit needs a non-empty matrix"));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("feature map training data"));
        }
        let d_in = x.cols();
        let params = match *config {
            FeatureMapConfig::Linear => MapParams::Linear,
            FeatureMapConfig::Fourier {
                n_components,
                bandwidth,
                seed,
            } => {
                let sigma = match bandwidth {
                    Bandwidth::Fixed(s) => s,
                    Bandwidth::Median => median_heuristic(x, seed),
                };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let weights = gaussian_matrix(&mut rng, n_components, d_in, 1.0 / sigma);
                let offsets = (0..n_components)
                    .map(|_| rng.random_range(0.0..TAU))
                    .collect();
                MapParams::Fourier {
                    weights,
                    offsets,
                    sigma,
                }
            }
            FeatureMapConfig::Relu { n_components, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                MapParams::Relu {
                    weights: gaussian_matrix(&mut rng, n_components, d_in + 1, 1.0),
                }
            }
            FeatureMapConfig::Threshold { n_thresholds } => MapParams::Threshold {
                thresholds: (0..d_in)
                    .map(|j| {
                        let col: Vec<f64> = x.iter_rows().map(|r| r[j]).collect();
                        quantile_midpoints(col, n_thresholds)
                    })
                    .collect(),
            },
        };
        Ok(Self { d_in, params })
    }

    /// Rebuilds a map from stored parameters, checking their shapes.
    pub fn from_parts(d_in: usize, params: MapParams) -> Result<Self> {
        if d_in == 0 {
            return Err(Error::Empty("feature map input dimension"));
        }
        let shape_err = |expected, found| Error::DimensionMismatch { expected, found };
        match &params {
            MapParams::Linear => {}
            MapParams::Fourier {
                weights,
                offsets,
                sigma,
            } => {
                if weights.cols() != d_in {
                    return Err(shape_err(d_in, weights.cols()));
                }
                if offsets.len() != weights.rows() {
                    return Err(shape_err(weights.rows(), offsets.len()));
                }
                if weights.rows() == 0 || !(*sigma > 0.0) {
                    return Err(Error::InvalidParameter("empty or degenerate fourier map".into()));
                }
            }
            MapParams::Relu { weights } => {
                if weights.cols() != d_in + 1 {
                    return Err(shape_err(d_in + 1, weights.cols()));
                }
                if weights.rows() == 0 {
                    return Err(Error::InvalidParameter("empty relu map".into()));
                }
            }
            MapParams::Threshold { thresholds } => {
                if thresholds.len() != d_in {
                    return Err(shape_err(d_in, thresholds.len()));
                }
                if thresholds
                    .iter()
                    .any(|t| t.windows(2).any(|w| !(w[0] < w[1])))
                {
                    return Err(Error::InvalidParameter("thresholds must be strictly increasing".into()));
                }
            }
        }
        let ok = match &params {
            MapParams::Linear => true,
            MapParams::Fourier {
                weights, offsets, ..
            } => weights.is_finite() && offsets.iter().all(|v| v.is_finite()),
            MapParams::Relu { weights } => weights.is_finite(),
            MapParams::Threshold { thresholds } => thresholds.iter().flatten().all(|v| v.is_finite()),
        };
        if !ok {
            return Err(Error::NonFinite("feature map parameters"));
        }
        Ok(Self { d_in, params })
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn kind(&self) -> &'static str {
        match self.params {
            MapParams::Linear => "linear",
            MapParams::Fourier { .. } => "fourier",
            MapParams::Relu { .. } => "relu",
            MapParams::Threshold { .. } => "threshold",
        }
    }

    pub fn input_dim(&self) -> usize {
        self.d_in
    }

    /// Length of `z(x)`, intercept included.
    pub fn output_dim(&self) -> usize {
        1 + match &self.params {
            MapParams::Linear => self.d_in,
            MapParams::Fourier { weights, .. } | MapParams::Relu { weights } => weights.rows(),
            MapParams::Threshold { thresholds } => thresholds.iter().map(Vec::len).sum(),
        }
    }

    pub fn transform_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: x.len(),
            });
        }
        if out.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                found: out.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("instance"));
        }
        out[0] = 1.0;
        let tail = &mut out[1..];
        match &self.params {
            MapParams::Linear => tail.copy_from_slice(x),
            MapParams::Fourier {
                weights, offsets, ..
            } => {
                let scale = libm::sqrt(2.0 / weights.rows() as f64);
                for (i, t) in tail.iter_mut().enumerate() {
                    *t = scale * libm::cos(dot(weights.row(i), x) + offsets[i]);
                }
            }
            MapParams::Relu { weights } => {
                let scale = libm::sqrt(2.0 / weights.rows() as f64);
                for (i, t) in tail.iter_mut().enumerate() {
                    let w = weights.row(i);
                    let a = dot(&w[..self.d_in], x) + w[self.d_in];
                    *t = scale * a.max(0.0);
                }
            }
            MapParams::Threshold { thresholds } => {
                let mut pos = 0;
                for (xd, ts) in x.iter().zip(thresholds) {
                    for &t in ts {
                        tail[pos] = if *xd <= t { 1.0 } else { 0.0 };
                        pos += 1;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.output_dim()];
        self.transform_into(x, &mut out)?;
        Ok(out)
    }

    /// Transforms every row of `x`.
    pub fn transform_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(x.rows(), self.output_dim());
        for i in 0..x.rows() {
            self.transform_into(x.row(i), out.row_mut(i))?;
        }
        Ok(out)
    }
}

/// `Phi(x, y) = e_y (x) z(x)`: `z` copied into block `y` of `k` blocks.
pub fn label_cross(z: &[f64], y: usize, k: usize) -> Result<Vec<f64>> {
    if y >= k {
        return Err(Error::LabelOutOfRange { label: y, classes: k });
    }
    let d = z.len();
    let mut phi = vec![0.0; k * d];
    phi[y * d..(y + 1) * d].copy_from_slice(z);
    Ok(phi)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g * scale
        })
        .collect();
    Matrix::from_vec(rows, cols, data).expect("sized by construction")
}

/// Median pairwise Euclidean distance over at most [`MEDIAN_SUBSAMPLE`]
/// seeded rows; falls back to 1 when that median is zero or undefined.
pub fn median_heuristic(x: &Matrix, seed: u64) -> f64 {
    let n = x.rows();
    let rows: Vec<usize> = if n > MEDIAN_SUBSAMPLE {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut idx = index::sample(&mut rng, n, MEDIAN_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let mut dists = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            let d2: f64 = x
                .row(i)
                .iter()
                .zip(x.row(j))
                .map(|(p, q)| (p - q) * (p - q))
                .sum();
            dists.push(libm::sqrt(d2));
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_unstable_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 0 {
        0.5 * (dists[mid - 1] + dists[mid])
    } else {
        dists[mid]
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// Thresholds for one column: at quantile positions `j / (q + 1)`,
/// `j = 1..=q`, take the midpoint between the value found there and the next
/// larger distinct value. Duplicates are dropped; a constant column gets none.
fn quantile_midpoints(mut col: Vec<f64>, q: usize) -> Vec<f64> {
    col.sort_unstable_by(f64::total_cmp);
    let n = col.len();
    let mut out: Vec<f64> = Vec::with_capacity(q);
    for j in 1..=q {
        let pos = (j * (n - 1)) / (q + 1);
        let v = col[pos];
        // first strictly larger value after `pos`
        let next = col[pos..].partition_point(|&u| u <= v) + pos;
        if next < n {
            out.push(0.5 * (v + col[next]));
        }
    }
    out.sort_unstable_by(f64::total_cmp);
    out.dedup();
    out
}
