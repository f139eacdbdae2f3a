//! Convex objectives of the four classifier variants.
//!
//! With `v(z)_y = z . mu_y` (the block of `mu` for class `y`), the learning
//! problem is `min_mu F(mu)` where
//!
//! ```text
//! 0-1 loss:  F = 1 - tau.mu + lambda.|mu| + agg_rows phi01(v(z))
//! log loss:  F =   - tau.mu + lambda.|mu| + agg_rows logsumexp(v(z))
//! phi01(v) = max over nonempty C of (sum_{y in C} v_y - 1) / |C|
//! ```
//!
//! and `agg_rows` is the max over candidate rows for MRC and their mean for
//! CMRC. Log values are in nats.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, logsumexp, softmax_into, Matrix};
use crate::moments::MomentEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loss {
    ZeroOne,
    Log,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::ZeroOne => "0-1",
            Loss::Log => "log",
        }
    }
}

/// Which uncertainty set the classifier uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Moment constraints only; worst case over candidate instances.
    Mrc,
    /// Instance marginal fixed to the empirical one; average over instances.
    Cmrc,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Mrc => "mrc",
            Variant::Cmrc => "cmrc",
        }
    }
}

/// Instances over which the inner max (MRC) or mean (CMRC) is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    rows: Matrix,
    variant: Variant,
}

impl CandidateSet {
    /// MRC candidates: distinct rows of `z`, in order of first appearance.
    /// CMRC candidates: all rows, duplicates kept.
    pub fn new(z: &Matrix, variant: Variant) -> Result<Self> {
        if z.rows() == 0 || z.cols() == 0 {
            return Err(Error::Empty("candidate set"));
        }
        if !z.is_finite() {
            return Err(Error::NonFinite("candidate rows"));
        }
        let rows = match variant {
            Variant::Cmrc => z.clone(),
            Variant::Mrc => z.select_rows(&first_occurrences(z)),
        };
        Ok(Self { rows, variant })
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.rows() == 0
    }

    /// Distinct rows with multiplicities, in order of first appearance.
    pub fn grouped(&self) -> (Matrix, Vec<usize>) {
        let groups = row_groups(&self.rows);
        let keep: Vec<usize> = groups.iter().map(|g| g.0).collect();
        let counts = groups.iter().map(|g| g.1).collect();
        (self.rows.select_rows(&keep), counts)
    }
}

fn rows_equal(z: &Matrix, a: usize, b: usize) -> bool {
    z.row(a).iter().zip(z.row(b)).all(|(p, q)| p == q)
}

/// `(first index, multiplicity)` of every distinct row, by first index.
fn row_groups(z: &Matrix) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..z.rows()).collect();
    order.sort_by(|&a, &b| {
        z.row(a)
            .iter()
            .zip(z.row(b))
            .map(|(p, q)| p.partial_cmp(q).unwrap_or(core::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && rows_equal(z, order[start], order[end]) {
            end += 1;
        }
        // ties are ordered by index, so the group leader is its first row
        groups.push((order[start], end - start));
        start = end;
    }
    groups.sort_unstable();
    groups
}

/// Indices of the first occurrence of each distinct row, ascending.
fn first_occurrences(z: &Matrix) -> Vec<usize> {
    row_groups(z).into_iter().map(|g| g.0).collect()
}

/// Inner maximization of the 0-1 loss.
///
/// Returns `(value, subset)` where `value = max_C (sum_{y in C} v_y - 1)/|C|`
/// over nonempty `C`, and `subset` lists the maximizing classes in
/// descending order of `v`. The maximizer is always a prefix of `v` sorted
/// in descending order; ties go to the smaller subset, then to smaller class
/// indices.
pub fn best_subset(v: &[f64]) -> Result<(f64, Vec<usize>)> {
    if v.is_empty() {
        return Err(Error::Empty("best_subset needs at least one class"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("best_subset input"));
    }
    let mut order = vec![0usize; v.len()];
    let (value, size) = best_subset_into(v, &mut order);
    order.truncate(size);
    Ok((value, order))
}

/// Allocation-free core of [`best_subset`]: fills `order` with the class
/// indices sorted by descending `v` and returns `(value, prefix_len)`.
pub(crate) fn best_subset_into(v: &[f64], order: &mut [usize]) -> (f64, usize) {
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    // insertion sort: k is small and the order must be stable
    for i in 1..order.len() {
        let cur = order[i];
        let mut j = i;
        while j > 0 && v[order[j - 1]] < v[cur] {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = cur;
    }
    let mut sum = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut size = 0;
    for (j, &y) in order.iter().enumerate() {
        sum += v[y];
        let val = (sum - 1.0) / (j + 1) as f64;
        if val > best {
            best = val;
            size = j + 1;
        }
    }
    (best, size)
}

/// Classification probabilities for one instance given its class scores.
///
/// 0-1 loss: `h_y = max(v_y - c, 0)` with `c` the [`best_subset`] value.
/// Log loss: `h = softmax(v)`.
pub fn predict_proba_rule(loss: Loss, v: &[f64], out: &mut [f64]) {
    match loss {
        Loss::ZeroOne => {
            let mut order = vec![0usize; v.len()];
            let (c, _) = best_subset_into(v, &mut order);
            for (h, &vy) in out.iter_mut().zip(v) {
                *h = (vy - c).max(0.0);
            }
        }
        Loss::Log => {
            softmax_into(v, out);
        }
    }
}

/// Scores `v_y = z . mu_y` for every class.
#[inline]
pub fn class_scores(z: &[f64], mu: &[f64], out: &mut [f64]) {
    let d = z.len();
    for (y, o) in out.iter_mut().enumerate() {
        *o = dot(z, &mu[y * d..(y + 1) * d]);
    }
}

/// Composed objective: loss, candidate set and moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub loss: Loss,
    pub candidates: CandidateSet,
    pub moments: MomentEstimate,
    pub k: usize,
}

impl ObjectiveSpec {
    pub fn new(loss: Loss, candidates: CandidateSet, moments: MomentEstimate, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewClasses);
        }
        let m = k * candidates.rows().cols();
        if moments.tau.len() != m || moments.lambda.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: moments.tau.len(),
            });
        }
        Ok(Self {
            loss,
            candidates,
            moments,
            k,
        })
    }

    pub fn d_out(&self) -> usize {
        self.candidates.rows().cols()
    }

    /// Length of `mu`.
    pub fn dim(&self) -> usize {
        self.k * self.d_out()
    }

    pub fn variant(&self) -> Variant {
        self.candidates.variant()
    }

    /// `F(mu)` at `mu = 0`: `1 - 1/k` for 0-1 loss and `log k` for log loss.
    pub fn value_at_zero(&self) -> f64 {
        match self.loss {
            Loss::ZeroOne => 1.0 - 1.0 / self.k as f64,
            Loss::Log => libm::log(self.k as f64),
        }
    }

    pub fn value(&self, mu: &[f64]) -> Result<f64> {
        self.eval(mu, None)
    }

    /// `F(mu)` together with a subgradient written into `grad`.
    ///
    /// For the max over rows the first maximizing row is used; for the
    /// 0-1 inner max the subset chosen by [`best_subset`].
    pub fn value_subgrad(&self, mu: &[f64], grad: &mut [f64]) -> Result<f64> {
        if grad.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: grad.len(),
            });
        }
        self.eval(mu, Some(grad))
    }

    fn eval(&self, mu: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        if mu.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: mu.len(),
            });
        }
        let tau = &self.moments.tau;
        let lambda = &self.moments.lambda;
        let mut value = match self.loss {
            Loss::ZeroOne => 1.0,
            Loss::Log => 0.0,
        };
        value -= dot(tau, mu);
        value += lambda.iter().zip(mu).map(|(l, x)| l * x.abs()).sum::<f64>();
        let grad = grad.map(|g| {
            for ((gi, &t), (&l, &x)) in g.iter_mut().zip(tau).zip(lambda.iter().zip(mu)) {
                *gi = -t + l * sign(x);
            }
            g
        });
        value += self.row_terms(mu, grad);
        Ok(value)
    }

    /// Aggregated per-row term; adds its subgradient to `grad` if given.
    fn row_terms(&self, mu: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let k = self.k;
        let d = self.d_out();
        let rows = self.candidates.rows();
        let mut v = vec![0.0; k];
        let mut order = vec![0usize; k];
        let mut weights = vec![0.0; k];
        match self.variant() {
            Variant::Mrc => {
                let mut best = f64::NEG_INFINITY;
                let mut best_row = 0;
                for (i, z) in rows.iter_rows().enumerate() {
                    class_scores(z, mu, &mut v);
                    let term = match self.loss {
                        Loss::ZeroOne => best_subset_into(&v, &mut order).0,
                        Loss::Log => logsumexp(&v),
                    };
                    if term.is_nan() {
                        return f64::NAN;
                    }
                    if term > best || i == 0 {
                        best = term;
                        best_row = i;
                    }
                }
                if let Some(g) = grad.as_deref_mut() {
                    let z = rows.row(best_row);
                    class_scores(z, mu, &mut v);
                    self.row_weights(&v, &mut order, &mut weights);
                    for y in 0..k {
                        if weights[y] != 0.0 {
                            axpy(weights[y], z, &mut g[y * d..(y + 1) * d]);
                        }
                    }
                }
                best
            }
            Variant::Cmrc => {
                let r = rows.rows() as f64;
                let mut total = 0.0;
                for z in rows.iter_rows() {
                    class_scores(z, mu, &mut v);
                    let term = match self.loss {
                        Loss::ZeroOne => best_subset_into(&v, &mut order).0,
                        Loss::Log => logsumexp(&v),
                    };
                    total += term;
                    if let Some(g) = grad.as_deref_mut() {
                        self.row_weights(&v, &mut order, &mut weights);
                        for y in 0..k {
                            if weights[y] != 0.0 {
                                axpy(weights[y] / r, z, &mut g[y * d..(y + 1) * d]);
                            }
                        }
                    }
                }
                total / r
            }
        }
    }

    /// Per-class weights of the row subgradient `sum_y w_y e_y (x) z`.
    fn row_weights(&self, v: &[f64], order: &mut [usize], weights: &mut [f64]) {
        match self.loss {
            Loss::ZeroOne => {
                let (_, size) = best_subset_into(v, order);
                weights.iter_mut().for_each(|w| *w = 0.0);
                for &y in &order[..size] {
                    weights[y] = 1.0 / size as f64;
                }
            }
            Loss::Log => {
                softmax_into(v, weights);
            }
        }
    }
}

#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
