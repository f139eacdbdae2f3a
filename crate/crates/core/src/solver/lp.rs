//! Small dense linear programs.
//!
//! Primal simplex on a dense tableau with bounded variables and a two-phase
//! start. Every constraint row `lo <= a.x <= hi` gets a bounded slack, so
//! `<=`, `>=`, `=` and ranged rows all cost one tableau row.
//!
//! Pivoting is deterministic. The entering variable is the one with the
//! largest reduced-cost violation and the leaving row comes from Harris'
//! two-pass ratio test. Finite bounds are relaxed by a tiny fixed
//! pseudo-random amount during the solve, which keeps the highly degenerate
//! vertices of the minimax programs from stalling the method; the true
//! bounds are restored before returning. If a run of degenerate pivots
//! happens anyway the solver switches to Bland's smallest-index rule until
//! the objective moves again.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;

/// Reduced-cost and pivot tolerances.
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
/// Relative size of the anti-degeneracy bound perturbation.
const PERTURB: f64 = 1e-7;
const PERTURB_SEED: u64 = 0x6c70;
/// Bound relaxation of the Harris ratio test.
const HARRIS_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before falling back to Bland's rule.
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("malformed problem")]
    Malformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `minimize c.x` subject to row and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    coeffs: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    /// All variables start with bounds `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            coeffs: Vec::new(),
            row_lower: Vec::new(),
            row_upper: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.row_lower.len()
    }

    /// Bounds may be infinite; `lower = -inf, upper = inf` makes a free variable.
    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_constraint(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) {
        let (lo, hi) = match sense {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
            Sense::Eq => (rhs, rhs),
        };
        self.add_range(coeffs, lo, hi);
    }

    /// `lo <= coeffs . x <= hi`.
    pub fn add_range(&mut self, coeffs: &[f64], lo: f64, hi: f64) {
        assert_eq!(coeffs.len(), self.n_vars(), "constraint length");
        self.coeffs.extend_from_slice(coeffs);
        self.row_lower.push(lo);
        self.row_upper.push(hi);
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.validate()?;
        match Tableau::new(self, true).solve(self)? {
            Some(sol) => Ok(sol),
            None => Tableau::new(self, false)
                .solve(self)?
                .ok_or(LpError::Infeasible),
        }
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let n = self.n_vars();
        let mut worst = 0.0f64;
        for i in 0..self.n_rows() {
            let a: f64 = self.coeffs[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum();
            worst = worst.max(self.row_lower[i] - a).max(a - self.row_upper[i]);
        }
        worst
    }

    fn validate(&self) -> Result<(), LpError> {
        let ok_bounds = |lo: &[f64], hi: &[f64]| {
            lo.iter()
                .zip(hi)
                .all(|(l, h)| !l.is_nan() && !h.is_nan() && l <= h && *l < f64::INFINITY && *h > f64::NEG_INFINITY)
        };
        if !ok_bounds(&self.lower, &self.upper) || !ok_bounds(&self.row_lower, &self.row_upper) {
            return Err(LpError::Malformed);
        }
        if self.objective.iter().chain(&self.coeffs).any(|v| !v.is_finite()) {
            return Err(LpError::Malformed);
        }
        Ok(())
    }
}

/// `minimize c.x` s.t. `A x (sense) b` and `lower <= x <= upper`.
pub fn lp_solve(
    c: &[f64],
    a: &Matrix,
    b: &[f64],
    senses: &[Sense],
    lower: &[f64],
    upper: &[f64],
) -> Result<LpSolution, LpError> {
    let n = c.len();
    if a.cols() != n || a.rows() != b.len() || senses.len() != b.len() || lower.len() != n || upper.len() != n {
        return Err(LpError::Malformed);
    }
    let mut lp = LinearProgram::new(c.to_vec());
    for j in 0..n {
        lp.set_bounds(j, lower[j], upper[j]);
    }
    for (i, (&rhs, &sense)) in b.iter().zip(senses).enumerate() {
        lp.add_constraint(a.row(i), sense, rhs);
    }
    lp.solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable sitting at zero.
    Free,
}

struct Tableau {
    m: usize,
    /// structural + slack columns
    ncols: usize,
    t: Vec<f64>,
    /// reduced costs
    d: Vec<f64>,
    /// basic variable per row; `>= ncols` denotes the row's artificial
    basis: Vec<usize>,
    xb: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    orig_lb: Vec<f64>,
    orig_ub: Vec<f64>,
    /// upper bound of artificials: `inf` in phase one, `0` afterwards
    art_ub: f64,
    iterations: usize,
    limit: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram, perturb: bool) -> Self {
        let n = lp.n_vars();
        let m = lp.n_rows();
        let ncols = n + m;
        let mut lb = lp.lower.clone();
        let mut ub = lp.upper.clone();
        lb.extend_from_slice(&lp.row_lower);
        ub.extend_from_slice(&lp.row_upper);
        let (orig_lb, orig_ub) = (lb.clone(), ub.clone());
        // Relax every finite bound by a small pseudo-random amount so that
        // degenerate vertices split apart; undone after phase two.
        let mut rng = ChaCha8Rng::seed_from_u64(PERTURB_SEED);
        for j in (0..ncols).filter(|_| perturb) {
            if lb[j] == ub[j] {
                continue;
            }
            if lb[j].is_finite() {
                lb[j] -= PERTURB * (1.0 + lb[j].abs()) * rng.random_range(1.0..2.0);
            }
            if ub[j].is_finite() {
                ub[j] += PERTURB * (1.0 + ub[j].abs()) * rng.random_range(1.0..2.0);
            }
        }

        let mut x = vec![0.0; ncols];
        let mut state = vec![State::Free; ncols];
        for j in 0..n {
            if lb[j].is_finite() {
                x[j] = lb[j];
                state[j] = State::AtLower;
            } else if ub[j].is_finite() {
                x[j] = ub[j];
                state[j] = State::AtUpper;
            }
        }

        let mut t = vec![0.0; m * ncols];
        let mut basis = vec![0; m];
        let mut xb = vec![0.0; m];
        for i in 0..m {
            let a = &lp.coeffs[i * n..(i + 1) * n];
            let activity: f64 = a.iter().zip(&x[..n]).map(|(p, q)| p * q).sum();
            let row = &mut t[i * ncols..(i + 1) * ncols];
            let slack = n + i;
            if activity >= lb[slack] && activity <= ub[slack] {
                // s_i - a.x = 0 with the slack basic
                for (r, &v) in row[..n].iter_mut().zip(a) {
                    *r = -v;
                }
                row[slack] = 1.0;
                basis[i] = slack;
                xb[i] = activity;
                state[slack] = State::Basic;
            } else {
                let bound = if activity < lb[slack] { lb[slack] } else { ub[slack] };
                x[slack] = bound;
                state[slack] = if activity < lb[slack] { State::AtLower } else { State::AtUpper };
                // art = -(a.x - s) / sigma >= 0
                let residual = activity - bound;
                let sigma = if residual > 0.0 { -1.0 } else { 1.0 };
                for (r, &v) in row[..n].iter_mut().zip(a) {
                    *r = v / sigma;
                }
                row[slack] = -1.0 / sigma;
                basis[i] = ncols + i;
                xb[i] = residual.abs();
            }
        }
        Self {
            m,
            ncols,
            t,
            d: vec![0.0; ncols],
            basis,
            xb,
            x,
            state,
            lb,
            ub,
            orig_lb,
            orig_ub,
            art_ub: f64::INFINITY,
            iterations: 0,
            limit: 20_000 + 50 * (m + ncols),
        }
    }

    /// `None` when the optimal basis of the perturbed problem is infeasible
    /// for the true bounds.
    fn solve(mut self, lp: &LinearProgram) -> Result<Option<LpSolution>, LpError> {
        let n = lp.n_vars();
        if self.basis.iter().any(|&b| b >= self.ncols) {
            // phase one: minimize the sum of artificials
            let mut cost = vec![0.0; self.ncols];
            self.set_costs(&mut cost, 1.0);
            self.run()?;
            self.refresh_basics();
            let infeasibility: f64 = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(&b, _)| b >= self.ncols)
                .map(|(_, &v)| v)
                .sum();
            let scale = 1.0 + lp.row_lower.iter().chain(&lp.row_upper).filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
            if infeasibility > FEAS_TOL * scale {
                return Err(LpError::Infeasible);
            }
            self.art_ub = 0.0;
        }
        let mut cost = vec![0.0; self.ncols];
        cost[..n].copy_from_slice(&lp.objective);
        self.set_costs(&mut cost, 0.0);
        self.run()?;
        if self.unperturb() > FEAS_TOL {
            // the perturbed optimum does not survive the true bounds
            return Ok(None);
        }

        let mut x = self.x[..n].to_vec();
        for (&b, &v) in self.basis.iter().zip(&self.xb) {
            if b < n {
                x[b] = v.clamp(self.lb[b], self.ub[b]);
            }
        }
        let objective = x.iter().zip(&lp.objective).map(|(p, q)| p * q).sum();
        Ok(Some(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        }))
    }

    /// Reduced costs `d_j = c_j - c_B . T_j`, artificials costing `art_cost`.
    fn set_costs(&mut self, cost: &mut [f64], art_cost: f64) {
        for i in 0..self.m {
            let b = self.basis[i];
            let cb = if b >= self.ncols { art_cost } else { cost[b] };
            if cb != 0.0 {
                let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
                for (c, &v) in cost.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
        for i in 0..self.m {
            if self.basis[i] < self.ncols {
                cost[self.basis[i]] = 0.0;
            }
        }
        self.d.copy_from_slice(cost);
    }

    /// Puts nonbasic variables back on their true bounds and recomputes the
    /// basic values. Returns the largest resulting bound violation.
    fn unperturb(&mut self) -> f64 {
        self.lb.copy_from_slice(&self.orig_lb);
        self.ub.copy_from_slice(&self.orig_ub);
        for j in 0..self.ncols {
            match self.state[j] {
                State::AtLower => self.x[j] = self.lb[j],
                State::AtUpper => self.x[j] = self.ub[j],
                _ => {}
            }
        }
        self.refresh_basics();
        let mut worst = 0.0f64;
        for (&b, &v) in self.basis.iter().zip(&self.xb) {
            let (lo, hi) = self.bounds_of(b);
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    /// Recomputes basic values from the nonbasic ones: `x_B = -T_N x_N`.
    fn refresh_basics(&mut self) {
        for i in 0..self.m {
            let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
            let mut v = 0.0;
            for (j, &tij) in row.iter().enumerate() {
                if self.state[j] != State::Basic && tij != 0.0 {
                    v -= tij * self.x[j];
                }
            }
            self.xb[i] = v;
        }
    }

    fn bounds_of(&self, var: usize) -> (f64, f64) {
        if var >= self.ncols {
            (0.0, self.art_ub)
        } else {
            (self.lb[var], self.ub[var])
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let dj = self.d[j];
            let dir = match self.state[j] {
                State::Basic => continue,
                State::AtLower if dj < -OPT_TOL && self.ub[j] > self.lb[j] => 1.0,
                State::AtUpper if dj > OPT_TOL && self.ub[j] > self.lb[j] => -1.0,
                State::Free if dj.abs() > OPT_TOL => -dj.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(&mut self) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let Some((q, dir)) = self.entering(bland) else {
                return Ok(());
            };
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::IterationLimit);
            }

            let (step, leave) = self.ratio_test(q, dir, bland);
            if step.is_infinite() {
                return Err(LpError::Unbounded);
            }
            degenerate = if step <= 1e-12 { degenerate + 1 } else { 0 };

            // move along the edge
            for i in 0..self.m {
                let a = self.t[i * self.ncols + q];
                if a != 0.0 {
                    self.xb[i] -= dir * a * step;
                }
            }
            let entering_value = self.x[q] + dir * step;

            let Some((r, to_upper)) = leave else {
                // bound flip
                self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                self.state[q] = if dir > 0.0 { State::AtUpper } else { State::AtLower };
                continue;
            };

            let out = self.basis[r];
            if out < self.ncols {
                let (lo, hi) = (self.lb[out], self.ub[out]);
                self.x[out] = if to_upper { hi } else { lo };
                self.state[out] = if to_upper { State::AtUpper } else { State::AtLower };
            }
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.x[q] = 0.0;
            self.xb[r] = entering_value;
            self.pivot(r, q);
        }
    }

    /// Step length along the edge of entering `q` and the leaving row
    /// (`None` for a bound flip of `q`), with the side the leaving variable
    /// ends on.
    ///
    /// Outside Bland mode this is Harris' two-pass test: the first pass finds
    /// the longest step with bounds relaxed by `HARRIS_TOL`, the second picks
    /// the largest pivot among rows blocking within it. Bland mode takes the
    /// exact minimum ratio, breaking ties by the smallest basic index.
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> (f64, Option<(usize, bool)>) {
        let flip = if self.lb[q].is_finite() && self.ub[q].is_finite() {
            self.ub[q] - self.lb[q]
        } else {
            f64::INFINITY
        };
        // (row, ratio, relaxed ratio, |pivot|, to_upper)
        let blocking = (0..self.m).filter_map(|i| {
            let a = self.t[i * self.ncols + q];
            if a.abs() < PIVOT_TOL {
                return None;
            }
            let rate = -dir * a;
            let (lo, hi) = self.bounds_of(self.basis[i]);
            if rate < 0.0 {
                lo.is_finite().then(|| {
                    let room = self.xb[i] - lo;
                    (i, room.max(0.0) / -rate, (room + HARRIS_TOL) / -rate, a.abs(), false)
                })
            } else {
                hi.is_finite().then(|| {
                    let room = hi - self.xb[i];
                    (i, room.max(0.0) / rate, (room + HARRIS_TOL) / rate, a.abs(), true)
                })
            }
        });

        if bland {
            let mut step = flip;
            let mut leave: Option<(usize, bool)> = None;
            for (i, ratio, _, _, to_upper) in blocking {
                let better = match leave {
                    _ if ratio < step => true,
                    Some((r, _)) => ratio == step && self.basis[i] < self.basis[r],
                    None => false,
                };
                if better {
                    step = ratio;
                    leave = Some((i, to_upper));
                }
            }
            return (step, leave);
        }

        let candidates: Vec<_> = blocking.collect();
        let relaxed = candidates.iter().fold(f64::INFINITY, |acc, c| acc.min(c.2));
        if flip <= relaxed {
            return (flip, None);
        }
        let mut leave: Option<(usize, bool)> = None;
        let mut step = f64::INFINITY;
        let mut best_pivot = 0.0;
        for &(i, ratio, _, pivot, to_upper) in &candidates {
            if ratio <= relaxed && pivot > best_pivot {
                best_pivot = pivot;
                step = ratio;
                leave = Some((i, to_upper));
            }
        }
        (step, leave)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q];
        let mut pivot_row: Vec<f64> = self.t[r * nc..(r + 1) * nc].iter().map(|v| v / piv).collect();
        pivot_row[q] = 1.0;
        self.t[r * nc..(r + 1) * nc].copy_from_slice(&pivot_row);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * nc..(i + 1) * nc];
            for (v, &p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, &p) in self.d.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
        }
        self.d[q] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lower_bound_row() {
        // min x s.t. x >= 3
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(&[1.0], Sense::Ge, 3.0);
        let sol = lp.solve().unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_corner() {
        // min -x - y s.t. x + y <= 1
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add_constraint(&[1.0, 1.0], Sense::Le, 1.0);
        assert!((lp.solve().unwrap().objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + 2y s.t. x - y = 1, x + y >= -3, x, y free -> y = -2, x = -1
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint(&[1.0, -1.0], Sense::Eq, 1.0);
        lp.add_constraint(&[1.0, 1.0], Sense::Ge, -3.0);
        let sol = lp.solve().unwrap();
        assert!((sol.x[0] + 1.0).abs() < 1e-12 && (sol.x[1] + 2.0).abs() < 1e-12);
        assert!((sol.objective + 5.0).abs() < 1e-12);
    }

    #[test]
    fn boxed_variable_flips_bound() {
        // min -x with 0 <= x <= 2 and no rows
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.set_bounds(0, 0.0, 2.0);
        let sol = lp.solve().unwrap();
        assert_eq!(sol.x, [2.0]);
    }

    #[test]
    fn ranged_row() {
        // min x - y s.t. 1 <= x + y <= 2, 0 <= x, y <= 1.5
        let mut lp = LinearProgram::new(vec![1.0, -1.0]);
        lp.set_bounds(0, 0.0, 1.5);
        lp.set_bounds(1, 0.0, 1.5);
        lp.add_range(&[1.0, 1.0], 1.0, 2.0);
        let sol = lp.solve().unwrap();
        assert!((sol.objective + 1.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_constraint(&[1.0], Sense::Le, -1.0);
        assert_eq!(lp.solve(), Err(LpError::Infeasible));
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.add_constraint(&[1.0], Sense::Ge, 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 written twice
        let mut lp = LinearProgram::new(vec![1.0, 0.5]);
        lp.add_constraint(&[1.0, 1.0], Sense::Eq, 1.0);
        lp.add_constraint(&[2.0, 2.0], Sense::Eq, 2.0);
        let sol = lp.solve().unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matrix_entry_point() {
        let a = Matrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        let sol = lp_solve(&[-1.0, -1.0], &a, &[1.0], &[Sense::Le], &[0.0, 0.0], &[f64::INFINITY; 2]).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-12);
    }
}
