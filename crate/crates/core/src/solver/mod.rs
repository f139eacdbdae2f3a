//! Minimizers for [`ObjectiveSpec`].
//!
//! * [`Backend::Nesterov`]: accelerated first-order method returning the
//!   best iterate seen, so its value is always a valid upper bound.
//! * [`Backend::Exact`]: the 0-1 objectives are polyhedral; this backend
//!   solves their epigraph linear program with the in-crate simplex.

pub mod exact;
pub mod lp;
pub mod nesterov;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;

pub use exact::exact_minimize_01;
pub use nesterov::nesterov_minimize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backend {
    Nesterov,
    Exact,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Nesterov => "nesterov",
            Backend::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub backend: Backend,
    pub max_iters: usize,
    /// Starting point; `None` means zeros.
    pub init: Option<Vec<f64>>,
    /// Step scale `eta` of the accelerated backend.
    pub step_scale: f64,
    /// Number of restart stages of the accelerated backend; 1 disables restarts.
    pub restarts: usize,
    /// Factor applied to the step scale at each restart.
    pub restart_shrink: f64,
    /// Accepted gap between the LP optimum and `F(mu)` (exact backend).
    pub tol: f64,
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Nesterov,
            max_iters: 10_000,
            init: None,
            step_scale: 1.0,
            restarts: 20,
            restart_shrink: 0.6,
            tol: 1e-6,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn exact() -> Self {
        Self {
            backend: Backend::Exact,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub mu: Vec<f64>,
    /// `F(mu)`, evaluated at the returned point.
    pub f_star: f64,
    pub iterations: usize,
    pub backend: Backend,
    pub history: Option<Vec<f64>>,
}

/// Dispatches on `config.backend`.
pub fn minimize(spec: &ObjectiveSpec, config: &SolverConfig) -> Result<SolverResult> {
    match config.backend {
        Backend::Nesterov => nesterov_minimize(spec, config),
        Backend::Exact => exact_minimize_01(spec, config.tol),
    }
}

fn initial_point(spec: &ObjectiveSpec, config: &SolverConfig) -> Result<Vec<f64>> {
    match &config.init {
        None => Ok(alloc::vec![0.0; spec.dim()]),
        Some(init) if init.len() != spec.dim() => Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: init.len(),
        }),
        Some(init) if init.iter().any(|v| !v.is_finite()) => Err(Error::NonFinite("initial point")),
        Some(init) => Ok(init.clone()),
    }
}
