//! Fitting, prediction and performance bounds.
//!
//! `fit` runs standardize -> feature map -> moments -> candidate set ->
//! solver. The solver value `F(mu)` is the upper bound. For MRC the lower
//! bound is the smallest expected loss the fitted rule `h` can have under
//! any distribution of the uncertainty set (supported on the candidate
//! rows), which is a linear program in that distribution:
//!
//! ```text
//! minimize   sum_{row,y} p(row,y) * loss(h(.|row), y)
//! s.t.       p >= 0,  sum p = 1,  |sum p Phi - tau| <= lambda
//! ```
//!
//! Because `h` is derived from `mu`, this is at most `F(mu)` for every `mu`,
//! converged or not.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{standardize, LabeledDataset, StandardizationStats};
use crate::error::{Error, Result};
use crate::features::{FeatureMapConfig, FittedFeatureMap};
use crate::linalg::{logsumexp, Matrix};
use crate::moments::{moments_from_transformed, MomentEstimate, DEFAULT_BAND_SCALE};
use crate::objective::{class_scores, predict_proba_rule, sign, CandidateSet, Loss, ObjectiveSpec, Variant};
use crate::solver::lp::LinearProgram;
use crate::solver::exact::MAX_TABLEAU;
use crate::solver::nesterov::accelerated_minimize;
use crate::solver::{self, Backend, SolverConfig};

/// Probability floor used by [`MrcModel::evaluate`] for the log loss.
pub const LOG_LOSS_FLOOR: f64 = 1e-12;
/// Slack allowed when checking bound invariants.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub variant: Variant,
    pub loss: Loss,
    pub feature_map: FeatureMapConfig,
    /// Band scale `s` in `lambda = s * sigma_hat / sqrt(n)`.
    pub s: f64,
    pub solver: SolverConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Mrc,
            loss: Loss::ZeroOne,
            feature_map: FeatureMapConfig::Linear,
            s: DEFAULT_BAND_SCALE,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSummary {
    pub backend: Backend,
    pub iterations: usize,
    pub f_star: f64,
}

/// Upper bound as reported by a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    /// `false` for CMRC, whose objective value does not bound the risk.
    pub is_risk_bound: bool,
}

/// Everything a fitted model consists of. Use [`MrcModel::from_parts`] to
/// turn it back into a model; that checks every invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParts {
    pub variant: Variant,
    pub loss: Loss,
    pub feature_map: FittedFeatureMap,
    pub standardization: StandardizationStats,
    pub moments: MomentEstimate,
    pub mu: Vec<f64>,
    pub class_labels: Vec<String>,
    pub upper_bound: f64,
    pub lower_bound: Option<f64>,
    pub solver: SolverSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrcModel {
    parts: ModelParts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Misclassification rate of the most probable class.
    pub error_rate: f64,
    /// Mean of `1 - h(y|x)`: the 0-1 loss of the probabilistic rule itself,
    /// which is what the bounds are about.
    pub expected_error: f64,
    /// Mean negative log-probability of the true label, in nats.
    pub mean_log_loss: f64,
    /// How many probabilities were raised to [`LOG_LOSS_FLOOR`].
    pub clamped: usize,
    pub n: usize,
}

/// Fits a classifier on `train`.
pub fn fit(config: &FitConfig, train: &LabeledDataset) -> Result<MrcModel> {
    let (standardization, xs) = standardize(train.instances())?;
    let feature_map = FittedFeatureMap::fit(&config.feature_map, &xs)?;
    let z = feature_map.transform_matrix(&xs)?;
    let k = train.n_classes();
    let moments = moments_from_transformed(&z, train.labels(), k, config.s)?;
    let candidates = CandidateSet::new(&z, config.variant)?;
    let spec = ObjectiveSpec::new(config.loss, candidates, moments, k)?;
    let result = solver::minimize(&spec, &config.solver)?;
    let lower_bound = match config.variant {
        Variant::Mrc => Some(lower_bound(&spec, &result.mu, &config.solver)?),
        Variant::Cmrc => None,
    };
    let ObjectiveSpec { moments, .. } = spec;
    MrcModel::from_parts(ModelParts {
        variant: config.variant,
        loss: config.loss,
        feature_map,
        standardization,
        moments,
        mu: result.mu,
        class_labels: train.class_labels().to_vec(),
        upper_bound: result.f_star,
        lower_bound,
        solver: SolverSummary {
            backend: result.backend,
            iterations: result.iterations,
            f_star: result.f_star,
        },
    })
}

/// Minimum expected loss of the rule defined by `mu` over the uncertainty
/// set restricted to the candidate rows of `spec`. MRC only.
///
/// With `p` a distribution over (candidate row, label) pairs and `c` the
/// loss of the rule on each pair, this is the linear program
///
/// ```text
/// minimize c.p  s.t.  p >= 0, sum p = 1, tau - lambda <= sum p Phi <= tau + lambda
/// ```
///
/// The exact backend solves it directly. The accelerated backend maximizes
/// its dual
///
/// ```text
/// G(xi) = tau.xi - lambda.|xi| + min_{i,y} (c_iy - Phi_iy . xi)
/// ```
///
/// whose value at any `xi` is below the program's optimum, so the result is
/// a valid lower bound at every iteration count.
pub fn lower_bound(spec: &ObjectiveSpec, mu: &[f64], solver: &SolverConfig) -> Result<f64> {
    if spec.variant() != Variant::Mrc {
        return Err(Error::LowerBoundUnavailable);
    }
    let m = spec.dim();
    if mu.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: mu.len() });
    }
    let costs = rule_losses(spec, mu)?;
    match solver.backend {
        Backend::Exact => lower_bound_lp(spec, &costs),
        Backend::Nesterov => lower_bound_dual(spec, &costs, solver),
    }
}

/// Loss of the rule on every (candidate row, label) pair, row-major.
fn rule_losses(spec: &ObjectiveSpec, mu: &[f64]) -> Result<Matrix> {
    let k = spec.k;
    let rows = spec.candidates.rows();
    let mut costs = Matrix::zeros(rows.rows(), k);
    let mut v = vec![0.0; k];
    let mut h = vec![0.0; k];
    for (i, z) in rows.iter_rows().enumerate() {
        class_scores(z, mu, &mut v);
        let c = costs.row_mut(i);
        match spec.loss {
            Loss::ZeroOne => {
                predict_proba_rule(Loss::ZeroOne, &v, &mut h);
                for (ci, hi) in c.iter_mut().zip(&h) {
                    *ci = 1.0 - hi;
                }
            }
            Loss::Log => {
                let lse = logsumexp(&v);
                for (ci, vi) in c.iter_mut().zip(&v) {
                    *ci = lse - vi;
                }
            }
        }
    }
    if !costs.is_finite() {
        return Err(Error::NonFinite("lower bound costs"));
    }
    Ok(costs)
}

fn lower_bound_lp(spec: &ObjectiveSpec, costs: &Matrix) -> Result<f64> {
    let k = spec.k;
    let d = spec.d_out();
    let rows = spec.candidates.rows();
    let n_vars = rows.rows() * k;
    let n_rows = 1 + spec.dim();
    if n_rows.saturating_mul(n_vars + n_rows) > MAX_TABLEAU {
        return Err(Error::InvalidParameter(format!(
            "exact lower bound: {n_rows} constraints over {n_vars} variables is too large"
        )));
    }
    let mut lp = LinearProgram::new(costs.as_slice().to_vec());
    lp.add_range(&vec![1.0; n_vars], 1.0, 1.0);
    let tau = &spec.moments.tau;
    let lambda = &spec.moments.lambda;
    let mut coeffs = vec![0.0; n_vars];
    for y in 0..k {
        for t in 0..d {
            let j = y * d + t;
            coeffs.iter_mut().for_each(|c| *c = 0.0);
            for (i, z) in rows.iter_rows().enumerate() {
                coeffs[i * k + y] = z[t];
            }
            lp.add_range(&coeffs, tau[j] - lambda[j], tau[j] + lambda[j]);
        }
    }
    Ok(lp.solve()?.objective)
}

fn lower_bound_dual(spec: &ObjectiveSpec, costs: &Matrix, solver: &SolverConfig) -> Result<f64> {
    let k = spec.k;
    let d = spec.d_out();
    let rows = spec.candidates.rows();
    let tau = &spec.moments.tau;
    let lambda = &spec.moments.lambda;
    let mut v = vec![0.0; k];
    // minimizes -G
    let neg_g = |xi: &[f64], grad: &mut [f64]| -> Result<f64> {
        let mut inner = f64::INFINITY;
        let mut arg = (0, 0);
        for (i, z) in rows.iter_rows().enumerate() {
            class_scores(z, xi, &mut v);
            for (y, (&c, &vy)) in costs.row(i).iter().zip(&v).enumerate() {
                if c - vy < inner {
                    inner = c - vy;
                    arg = (i, y);
                }
            }
        }
        let mut value = -inner;
        for (j, g) in grad.iter_mut().enumerate() {
            value += -tau[j] * xi[j] + lambda[j] * xi[j].abs();
            *g = -tau[j] + lambda[j] * sign(xi[j]);
        }
        let (i, y) = arg;
        for (g, &zt) in grad[y * d..(y + 1) * d].iter_mut().zip(rows.row(i)) {
            *g += zt;
        }
        Ok(value)
    };
    let config = SolverConfig {
        init: None,
        record_history: false,
        ..solver.clone()
    };
    let run = accelerated_minimize(vec![0.0; spec.dim()], &config, neg_g)?;
    Ok(-run.value)
}

impl MrcModel {
    /// Validates and wraps model parts.
    pub fn from_parts(parts: ModelParts) -> Result<Self> {
        let k = parts.class_labels.len();
        if k < 2 {
            return Err(Error::TooFewClasses);
        }
        if parts.class_labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("class labels must be strictly ascending".into()));
        }
        let d_in = parts.feature_map.input_dim();
        let st = &parts.standardization;
        if st.mean.len() != d_in || st.std.len() != d_in {
            return Err(Error::DimensionMismatch { expected: d_in, found: st.mean.len() });
        }
        if st.mean.iter().chain(&st.std).any(|v| !v.is_finite()) || st.std.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidParameter("bad standardization statistics".into()));
        }
        parts.moments.validate()?;
        let m = k * parts.feature_map.output_dim();
        for len in [parts.moments.dim(), parts.mu.len()] {
            if len != m {
                return Err(Error::DimensionMismatch { expected: m, found: len });
            }
        }
        if parts.mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mu"));
        }
        let upper = parts.upper_bound;
        if !upper.is_finite() {
            return Err(Error::NonFinite("upper bound"));
        }
        if parts.solver.f_star.to_bits() != upper.to_bits() {
            return Err(Error::InvalidParameter("solver value differs from upper bound".into()));
        }
        if parts.loss == Loss::ZeroOne {
            let ceiling = 1.0 - 1.0 / k as f64;
            if upper < -BOUND_SLACK || upper > ceiling + BOUND_SLACK {
                return Err(Error::InvalidParameter("0-1 upper bound outside [0, 1 - 1/k]".into()));
            }
        }
        match (parts.variant, parts.lower_bound) {
            (Variant::Cmrc, Some(_)) => {
                return Err(Error::InvalidParameter("CMRC models carry no lower bound".into()));
            }
            (Variant::Mrc, None) => {
                return Err(Error::InvalidParameter("MRC model without lower bound".into()));
            }
            (Variant::Mrc, Some(lower)) => {
                if !lower.is_finite() || lower > upper + BOUND_SLACK {
                    return Err(Error::InvalidParameter("lower bound above upper bound".into()));
                }
                if parts.loss == Loss::ZeroOne && lower < -BOUND_SLACK {
                    return Err(Error::InvalidParameter("negative 0-1 lower bound".into()));
                }
            }
            (Variant::Cmrc, None) => {}
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &ModelParts {
        &self.parts
    }

    pub fn into_parts(self) -> ModelParts {
        self.parts
    }

    pub fn variant(&self) -> Variant {
        self.parts.variant
    }

    pub fn loss(&self) -> Loss {
        self.parts.loss
    }

    pub fn mu(&self) -> &[f64] {
        &self.parts.mu
    }

    pub fn class_labels(&self) -> &[String] {
        &self.parts.class_labels
    }

    pub fn n_classes(&self) -> usize {
        self.parts.class_labels.len()
    }

    pub fn feature_map(&self) -> &FittedFeatureMap {
        &self.parts.feature_map
    }

    pub fn moments(&self) -> &MomentEstimate {
        &self.parts.moments
    }

    pub fn solver_summary(&self) -> &SolverSummary {
        &self.parts.solver
    }

    pub fn upper_bound(&self) -> UpperBound {
        UpperBound {
            value: self.parts.upper_bound,
            is_risk_bound: self.parts.variant == Variant::Mrc,
        }
    }

    pub fn lower_bound(&self) -> Result<f64> {
        self.parts.lower_bound.ok_or(Error::LowerBoundUnavailable)
    }

    /// `z(x)` for a raw (unstandardized) instance.
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut xs = vec![0.0; x.len()];
        self.parts.standardization.apply_row(x, &mut xs)?;
        self.parts.feature_map.transform(&xs)
    }

    /// Class scores `v_y = z(x) . mu_y` for a raw instance.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.features(x)?;
        let mut v = vec![0.0; self.n_classes()];
        class_scores(&z, &self.parts.mu, &mut v);
        Ok(v)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix> {
        let k = self.n_classes();
        let mut out = Matrix::zeros(x.rows(), k);
        for i in 0..x.rows() {
            let v = self.scores(x.row(i))?;
            predict_proba_rule(self.parts.loss, &v, out.row_mut(i));
        }
        Ok(out)
    }

    /// Most probable class index per row; ties go to the smallest index.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let proba = self.predict_proba(x)?;
        Ok(proba.iter_rows().map(argmax).collect())
    }

    pub fn predict_labels(&self, x: &Matrix) -> Result<Vec<&str>> {
        Ok(self
            .predict(x)?
            .into_iter()
            .map(|c| self.parts.class_labels[c].as_str())
            .collect())
    }

    /// Error rate and mean log loss on a labeled dataset.
    pub fn evaluate(&self, test: &LabeledDataset) -> Result<Metrics> {
        let remap = test
            .class_labels()
            .iter()
            .map(|name| {
                self.parts
                    .class_labels
                    .binary_search(name)
                    .map_err(|_| Error::UnseenClass(name.clone()))
            })
            .collect::<Result<Vec<usize>>>()?;
        let proba = self.predict_proba(test.instances())?;
        let mut errors = 0usize;
        let mut clamped = 0usize;
        let mut log_loss = 0.0;
        let mut expected = 0.0;
        for (row, &label) in proba.iter_rows().zip(test.labels()) {
            let truth = remap[label];
            if argmax(row) != truth {
                errors += 1;
            }
            let p = row[truth];
            expected += 1.0 - p;
            if p < LOG_LOSS_FLOOR {
                clamped += 1;
            }
            log_loss -= libm::log(p.max(LOG_LOSS_FLOOR));
        }
        let n = test.n_samples();
        Ok(Metrics {
            error_rate: errors as f64 / n as f64,
            expected_error: expected / n as f64,
            mean_log_loss: log_loss / n as f64,
            clamped,
            n,
        })
    }

    /// Objective of this model over the candidates built from `train`,
    /// using the stored moments. Used to recompute bounds after loading.
    pub fn objective_for(&self, train: &LabeledDataset) -> Result<ObjectiveSpec> {
        if train.n_classes() != self.n_classes() {
            return Err(Error::ClassCountMismatch {
                expected: self.n_classes(),
                found: train.n_classes(),
            });
        }
        let xs = self.parts.standardization.apply(train.instances())?;
        let z = self.parts.feature_map.transform_matrix(&xs)?;
        let candidates = CandidateSet::new(&z, self.parts.variant)?;
        ObjectiveSpec::new(self.parts.loss, candidates, self.parts.moments.clone(), self.n_classes())
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = i;
        }
    }
    best
}
