//! Accelerated subgradient method with best-iterate output.
//!
//! ```text
//! y_k     = mu_k + (k - 1)/(k + 2) * (mu_k - mu_{k-1})
//! mu_{k+1} = y_k - eta / (sqrt(k + 1) * (|g_k| + 1e-12)) * g_k,   g_k in dF(y_k)
//! ```
//!
//! The iteration budget is split into `restarts` stages. Each stage starts
//! again at `k = 0` from the best point found so far, with `eta` multiplied
//! by `restart_shrink`. With `restarts = 1` this is the plain schedule above.
//! The diminishing step alone converges like `1/sqrt(k)`, which is too slow
//! on the polyhedral 0-1 objectives; restarting with a shrinking scale
//! recovers fast local convergence near a sharp minimum.
//!
//! The iterate with the smallest objective value is returned, so the result
//! is an upper bound on `min F` whether or not the run has converged.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{initial_point, Backend, SolverConfig, SolverResult};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::objective::ObjectiveSpec;

pub fn nesterov_minimize(spec: &ObjectiveSpec, config: &SolverConfig) -> Result<SolverResult> {
    let start = initial_point(spec, config)?;
    let run = accelerated_minimize(start, config, |mu, g| spec.value_subgrad(mu, g))?;
    Ok(SolverResult {
        f_star: spec.value(&run.x)?,
        mu: run.x,
        iterations: config.max_iters,
        backend: Backend::Nesterov,
        history: run.history,
    })
}

pub(crate) struct Run {
    pub x: Vec<f64>,
    pub value: f64,
    pub history: Option<Vec<f64>>,
}

/// The restarted schedule on any convex `f` given as value plus
/// subgradient. Returns the best point seen.
pub(crate) fn accelerated_minimize<F>(start: Vec<f64>, config: &SolverConfig, mut f: F) -> Result<Run>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    if !(config.step_scale > 0.0 && config.step_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step scale must be positive, got {}",
            config.step_scale
        )));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    if !(config.restart_shrink > 0.0 && config.restart_shrink <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "restart shrink must be in (0, 1], got {}",
            config.restart_shrink
        )));
    }
    let m = start.len();
    let mut eta = config.step_scale;
    let mut mu = start;
    let mut mu_prev = mu.clone();
    let mut y = vec![0.0; m];
    let mut g = vec![0.0; m];
    let mut best = mu.clone();
    let mut best_f = f64::INFINITY;
    let mut history = config.record_history.then(Vec::new);
    let stage_len = config.max_iters.div_ceil(config.restarts).max(1);

    let mut k = 0usize;
    for it in 0..config.max_iters {
        if it > 0 && it % stage_len == 0 {
            let f_last = f(&mu, &mut g)?;
            if f_last < best_f {
                best_f = f_last;
                best.copy_from_slice(&mu);
            }
            mu.copy_from_slice(&best);
            mu_prev.copy_from_slice(&best);
            eta *= config.restart_shrink;
            k = 0;
        }
        let beta = (k as f64 - 1.0) / (k as f64 + 2.0);
        for ((yi, &a), &b) in y.iter_mut().zip(&mu).zip(&mu_prev) {
            *yi = a + beta * (a - b);
        }
        let fy = f(&y, &mut g)?;
        if !fy.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: it });
        }
        if let Some(h) = history.as_mut() {
            h.push(fy);
        }
        if fy < best_f {
            best_f = fy;
            best.copy_from_slice(&y);
        }
        let step = eta / (libm::sqrt(k as f64 + 1.0) * (norm2(&g) + 1e-12));
        core::mem::swap(&mut mu_prev, &mut mu);
        for ((next, &yi), &gi) in mu.iter_mut().zip(&y).zip(&g) {
            *next = yi - step * gi;
        }
        k += 1;
    }
    let f_last = f(&mu, &mut g)?;
    if f_last < best_f {
        best_f = f_last;
        best.copy_from_slice(&mu);
    }
    if !best_f.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: config.max_iters });
    }
    Ok(Run {
        x: best,
        value: best_f,
        history,
    })
}
