//! Model files (`.mrc`).
//!
//! A model file is a JSON document with LF line endings and a fixed key
//! order. Every real number is stored twice: as a `%a` style hex float,
//! which is what loading reads and which reproduces the value bit for bit,
//! and as a decimal for people reading the file. Loading checks that both
//! agree, so a hand edit of only one of them is reported as corruption.
//!
//! ```text
//! {
//!   "format": "mrc-model",
//!   "format_version": 1,
//!   "variant": "mrc", "loss": "0-1",
//!   "class_labels": [...], "feature_names": [...], "label_column": "y",
//!   "standardization": { "mean": R[], "std": R[] },
//!   "feature_map": { "kind": ..., "input_dim": ..., ... },
//!   "moments": { "n": ..., "s": R, "tau": R[], "lambda": R[], "sigma_hat": R[] },
//!   "mu": R[],
//!   "upper_bound": R, "lower_bound": R or null,
//!   "solver": { "backend": ..., "iterations": ..., "f_star": R }
//! }
//! ```
//!
//! where `R` is `{"hex": "0x1.8p+1", "dec": 3.0}` and `R[]` is
//! `{"hex": [...], "dec": [...]}`.

use std::io;
use std::path::{Path, PathBuf};

use mrc_core::classifier::ModelParts;
use mrc_core::{
    Backend, FittedFeatureMap, Loss, MapParams, Matrix, MomentEstimate, MrcModel, SolverSummary, StandardizationStats,
    Variant,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hexfloat;

pub const FORMAT_NAME: &str = "mrc-model";
pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = "mrc";

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot access model file {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: not a model file ({reason})", path.display())]
    Corrupt { path: PathBuf, reason: String },
    #[error("{}: unsupported model format version {found} (expected {FORMAT_VERSION})", path.display())]
    Version { path: PathBuf, found: u64 },
}

/// A model plus the column names it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: MrcModel,
    pub feature_names: Vec<String>,
    pub label_column: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Real {
    hex: String,
    dec: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Reals {
    hex: Vec<String>,
    dec: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealMatrix {
    rows: usize,
    cols: usize,
    hex: Vec<String>,
    dec: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Standardization {
    mean: Reals,
    std: Reals,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FeatureMapFile {
    Linear {
        input_dim: usize,
    },
    Fourier {
        input_dim: usize,
        sigma: Real,
        weights: RealMatrix,
        offsets: Reals,
    },
    Relu {
        input_dim: usize,
        weights: RealMatrix,
    },
    Threshold {
        input_dim: usize,
        thresholds: Vec<Reals>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Moments {
    n: usize,
    s: Real,
    tau: Reals,
    lambda: Reals,
    sigma_hat: Reals,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Solver {
    backend: String,
    iterations: usize,
    f_star: Real,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    format_version: u64,
    variant: String,
    loss: String,
    class_labels: Vec<String>,
    feature_names: Vec<String>,
    label_column: String,
    standardization: Standardization,
    feature_map: FeatureMapFile,
    moments: Moments,
    mu: Reals,
    upper_bound: Real,
    lower_bound: Option<Real>,
    solver: Solver,
}

fn real(x: f64) -> Real {
    Real {
        hex: hexfloat::format(x),
        dec: x,
    }
}

fn reals(xs: &[f64]) -> Reals {
    Reals {
        hex: xs.iter().map(|&x| hexfloat::format(x)).collect(),
        dec: xs.to_vec(),
    }
}

fn real_matrix(m: &Matrix) -> RealMatrix {
    let r = reals(m.as_slice());
    RealMatrix {
        rows: m.rows(),
        cols: m.cols(),
        hex: r.hex,
        dec: r.dec,
    }
}

/// Renders the model file text.
pub fn to_string(saved: &SavedModel) -> String {
    let parts = saved.model.parts();
    let d_in = parts.feature_map.input_dim();
    let feature_map = match parts.feature_map.params() {
        MapParams::Linear => FeatureMapFile::Linear { input_dim: d_in },
        MapParams::Fourier {
            weights,
            offsets,
            sigma,
        } => FeatureMapFile::Fourier {
            input_dim: d_in,
            sigma: real(*sigma),
            weights: real_matrix(weights),
            offsets: reals(offsets),
        },
        MapParams::Relu { weights } => FeatureMapFile::Relu {
            input_dim: d_in,
            weights: real_matrix(weights),
        },
        MapParams::Threshold { thresholds } => FeatureMapFile::Threshold {
            input_dim: d_in,
            thresholds: thresholds.iter().map(|t| reals(t)).collect(),
        },
    };
    let file = ModelFile {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION.into(),
        variant: parts.variant.name().into(),
        loss: parts.loss.name().into(),
        class_labels: parts.class_labels.clone(),
        feature_names: saved.feature_names.clone(),
        label_column: saved.label_column.clone(),
        standardization: Standardization {
            mean: reals(&parts.standardization.mean),
            std: reals(&parts.standardization.std),
        },
        feature_map,
        moments: Moments {
            n: parts.moments.n,
            s: real(parts.moments.s),
            tau: reals(&parts.moments.tau),
            lambda: reals(&parts.moments.lambda),
            sigma_hat: reals(&parts.moments.sigma_hat),
        },
        mu: reals(&parts.mu),
        upper_bound: real(parts.upper_bound),
        lower_bound: parts.lower_bound.map(real),
        solver: Solver {
            backend: parts.solver.backend.name().into(),
            iterations: parts.solver.iterations,
            f_star: real(parts.solver.f_star),
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model file serializes");
    text.push('\n');
    text
}

pub fn save(path: &Path, saved: &SavedModel) -> Result<(), ModelFileError> {
    std::fs::write(path, to_string(saved)).map_err(|source| ModelFileError::Io {
        path: path.into(),
        source,
    })
}

pub fn load(path: &Path) -> Result<SavedModel, ModelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.into(),
        source,
    })?;
    from_str(&text).map_err(|e| match e {
        ParseError::Corrupt(reason) => ModelFileError::Corrupt {
            path: path.into(),
            reason,
        },
        ParseError::Version(found) => ModelFileError::Version {
            path: path.into(),
            found,
        },
    })
}

#[derive(Debug)]
enum ParseError {
    Corrupt(String),
    Version(u64),
}

fn corrupt(reason: impl Into<String>) -> ParseError {
    ParseError::Corrupt(reason.into())
}

fn from_str(text: &str) -> Result<SavedModel, ParseError> {
    // look at the header before the full schema, so that files from other
    // versions are reported as such
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(FORMAT_NAME) {
        return Err(corrupt("missing format marker"));
    }
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(ParseError::Version(v)),
        None => return Err(corrupt("missing format_version")),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;

    let variant = match file.variant.as_str() {
        "mrc" => Variant::Mrc,
        "cmrc" => Variant::Cmrc,
        other => return Err(corrupt(format!("unknown variant '{other}'"))),
    };
    let loss = match file.loss.as_str() {
        "0-1" => Loss::ZeroOne,
        "log" => Loss::Log,
        other => return Err(corrupt(format!("unknown loss '{other}'"))),
    };
    let backend = match file.solver.backend.as_str() {
        "nesterov" => Backend::Nesterov,
        "exact" => Backend::Exact,
        other => return Err(corrupt(format!("unknown solver '{other}'"))),
    };
    let (d_in, params) = match file.feature_map {
        FeatureMapFile::Linear { input_dim } => (input_dim, MapParams::Linear),
        FeatureMapFile::Fourier {
            input_dim,
            sigma,
            weights,
            offsets,
        } => (
            input_dim,
            MapParams::Fourier {
                weights: read_matrix(weights, "feature_map.weights")?,
                offsets: read_reals(offsets, "feature_map.offsets")?,
                sigma: read_real(sigma, "feature_map.sigma")?,
            },
        ),
        FeatureMapFile::Relu { input_dim, weights } => (
            input_dim,
            MapParams::Relu {
                weights: read_matrix(weights, "feature_map.weights")?,
            },
        ),
        FeatureMapFile::Threshold { input_dim, thresholds } => (
            input_dim,
            MapParams::Threshold {
                thresholds: thresholds
                    .into_iter()
                    .map(|t| read_reals(t, "feature_map.thresholds"))
                    .collect::<Result<_, _>>()?,
            },
        ),
    };
    if file.feature_names.len() != d_in {
        return Err(corrupt("feature_names length differs from input_dim"));
    }
    let feature_map = FittedFeatureMap::from_parts(d_in, params).map_err(|e| corrupt(format!("feature_map: {e}")))?;
    let parts = ModelParts {
        variant,
        loss,
        feature_map,
        standardization: StandardizationStats {
            mean: read_reals(file.standardization.mean, "standardization.mean")?,
            std: read_reals(file.standardization.std, "standardization.std")?,
        },
        moments: MomentEstimate {
            tau: read_reals(file.moments.tau, "moments.tau")?,
            lambda: read_reals(file.moments.lambda, "moments.lambda")?,
            sigma_hat: read_reals(file.moments.sigma_hat, "moments.sigma_hat")?,
            n: file.moments.n,
            s: read_real(file.moments.s, "moments.s")?,
        },
        mu: read_reals(file.mu, "mu")?,
        class_labels: file.class_labels,
        upper_bound: read_real(file.upper_bound, "upper_bound")?,
        lower_bound: file.lower_bound.map(|r| read_real(r, "lower_bound")).transpose()?,
        solver: SolverSummary {
            backend,
            iterations: file.solver.iterations,
            f_star: read_real(file.solver.f_star, "solver.f_star")?,
        },
    };
    let model = MrcModel::from_parts(parts).map_err(|e| corrupt(e.to_string()))?;
    Ok(SavedModel {
        model,
        feature_names: file.feature_names,
        label_column: file.label_column,
    })
}

fn read_real(r: Real, field: &str) -> Result<f64, ParseError> {
    let x = hexfloat::parse(&r.hex).ok_or_else(|| corrupt(format!("{field}: bad hex float '{}'", r.hex)))?;
    if x.to_bits() != r.dec.to_bits() {
        return Err(corrupt(format!("{field}: hex {} and decimal {} disagree", r.hex, r.dec)));
    }
    Ok(x)
}

fn read_reals(r: Reals, field: &str) -> Result<Vec<f64>, ParseError> {
    if r.hex.len() != r.dec.len() {
        return Err(corrupt(format!("{field}: hex and decimal lengths differ")));
    }
    r.hex
        .into_iter()
        .zip(r.dec)
        .map(|(hex, dec)| read_real(Real { hex, dec }, field))
        .collect()
}

fn read_matrix(m: RealMatrix, field: &str) -> Result<Matrix, ParseError> {
    let values = read_reals(Reals { hex: m.hex, dec: m.dec }, field)?;
    Matrix::from_vec(m.rows, m.cols, values).map_err(|e| corrupt(format!("{field}: {e}")))
}
