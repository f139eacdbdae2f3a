//! Minimax risk classifiers.
//!
//! A minimax risk classifier (MRC) picks the classification rule that
//! minimizes the worst-case expected loss over every distribution whose
//! feature expectations stay within a confidence band of the empirical ones.
//! Learning reduces to an L1-regularized convex program in the dual
//! parameters `mu`; its optimal value is an upper bound on the expected
//! loss. A second optimization problem, the smallest expected loss of the
//! learned rule over the same uncertainty set, gives a lower bound.
//!
//! Two uncertainty sets are supported: [`Variant::Mrc`] constrains only the
//! feature expectations, while [`Variant::Cmrc`] additionally pins the
//! instance marginal to the empirical one (and therefore gives no bounds).
//! Each can be combined with the 0-1 loss or the log loss.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, CSV ingestion
//! and the command line live in the companion `mrc` crate.
//!
//! All bounds refer to distributions supported on the observed training
//! instances: the worst case over `x` is taken over that finite candidate set.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classifier;
pub mod data;
mod error;
pub mod features;
pub mod linalg;
pub mod moments;
pub mod objective;
pub mod solver;

pub use classifier::{fit, FitConfig, Metrics, MrcModel, SolverSummary, UpperBound};
pub use data::{gen_blobs, split, standardize, LabeledDataset, StandardizationStats};
pub use error::{Error, Result};
pub use features::{label_cross, Bandwidth, FeatureMapConfig, FittedFeatureMap, MapParams};
pub use linalg::Matrix;
pub use moments::{estimate_moments, MomentEstimate};
pub use objective::{best_subset, CandidateSet, Loss, ObjectiveSpec, Variant};
pub use solver::{Backend, SolverConfig, SolverResult};
