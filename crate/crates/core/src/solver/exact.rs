//! Exact minimization of the 0-1 objectives as a linear program.
//!
//! With `mu = mu_plus - mu_minus` (both nonnegative) the objective becomes
//!
//! ```text
//! minimize  1 - tau.(mu_plus - mu_minus) + lambda.(mu_plus + mu_minus) + nu-term
//! s.t.      sum_{y in C} z.(mu_plus_y - mu_minus_y) - |C| nu_z <= 1
//!           for every candidate row z and nonempty class subset C
//! ```
//!
//! MRC uses a single `nu` shared by all rows (the max); CMRC uses one `nu`
//! per distinct row, weighted by its frequency (the mean).

use alloc::format;
use alloc::vec;

use super::lp::{LinearProgram, Sense};
use super::{Backend, SolverResult};
use crate::error::{Error, Result};
use crate::objective::{Loss, ObjectiveSpec, Variant};

/// Largest class count accepted; each row contributes `2^k - 1` constraints.
pub const MAX_CLASSES: usize = 10;
/// Dense tableau entries the backend is willing to allocate.
pub(crate) const MAX_TABLEAU: usize = 60_000_000;

pub fn exact_minimize_01(spec: &ObjectiveSpec, tol: f64) -> Result<SolverResult> {
    if spec.loss != Loss::ZeroOne {
        return Err(Error::ExactRequiresZeroOne);
    }
    let k = spec.k;
    if k > MAX_CLASSES {
        return Err(Error::TooManyClasses { k, max: MAX_CLASSES });
    }
    let m = spec.dim();
    let d = spec.d_out();
    let (rows, counts) = spec.candidates.grouped();
    let r = rows.rows();
    let n_nu = match spec.variant() {
        Variant::Mrc => 1,
        Variant::Cmrc => r,
    };
    let n_vars = 2 * m + n_nu;
    let n_subsets = (1usize << k) - 1;
    let n_rows = r * n_subsets;
    if n_rows.saturating_mul(n_vars + n_rows) > MAX_TABLEAU {
        return Err(Error::InvalidParameter(format!(
            "exact backend: {n_rows} constraints over {n_vars} variables is too large"
        )));
    }

    let tau = &spec.moments.tau;
    let lambda = &spec.moments.lambda;
    let mut cost = vec![0.0; n_vars];
    for j in 0..m {
        cost[j] = -tau[j] + lambda[j];
        cost[m + j] = tau[j] + lambda[j];
    }
    match spec.variant() {
        Variant::Mrc => cost[2 * m] = 1.0,
        Variant::Cmrc => {
            let total: usize = counts.iter().sum();
            for (g, &c) in counts.iter().enumerate() {
                cost[2 * m + g] = c as f64 / total as f64;
            }
        }
    }
    let mut lp = LinearProgram::new(cost);
    for v in 2 * m..n_vars {
        lp.set_bounds(v, f64::NEG_INFINITY, f64::INFINITY);
    }
    let mut coeffs = vec![0.0; n_vars];
    for (g, z) in rows.iter_rows().enumerate() {
        let nu = match spec.variant() {
            Variant::Mrc => 2 * m,
            Variant::Cmrc => 2 * m + g,
        };
        for mask in 1..=n_subsets {
            coeffs.iter_mut().for_each(|c| *c = 0.0);
            for y in (0..k).filter(|y| mask & (1 << y) != 0) {
                coeffs[y * d..(y + 1) * d].copy_from_slice(z);
                for (c, &zv) in coeffs[m + y * d..m + (y + 1) * d].iter_mut().zip(z) {
                    *c = -zv;
                }
            }
            coeffs[nu] = -(mask.count_ones() as f64);
            lp.add_constraint(&coeffs, Sense::Le, 1.0);
        }
    }

    let sol = lp.solve()?;
    let mu: alloc::vec::Vec<f64> = (0..m).map(|j| sol.x[j] - sol.x[m + j]).collect();
    let f_star = spec.value(&mu)?;
    let lp_value = 1.0 + sol.objective;
    if !f_star.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: sol.iterations });
    }
    if (f_star - lp_value).abs() > tol.max(1e-9) * (1.0 + lp_value.abs()) {
        return Err(Error::Numeric(format!(
            "exact backend: F(mu) = {f_star} disagrees with LP optimum {lp_value}"
        )));
    }
    Ok(SolverResult {
        mu,
        f_star,
        iterations: sol.iterations,
        backend: Backend::Exact,
        history: None,
    })
}
