//! The `mrc` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! malformed input, model files included), 3 numerical failure. Every
//! failure prints a single `error: ...` line on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrc_core::classifier::lower_bound;
use mrc_core::{
    fit, gen_blobs, split, Backend, Bandwidth, FeatureMapConfig, FitConfig, LabeledDataset, Loss, Metrics, MrcModel,
    SolverConfig, Variant,
};
use rayon::prelude::*;
use serde_json::json;

use crate::csv_io::{self, DataError};
use crate::persistence::{self, ModelFileError, SavedModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<mrc_core::Error> for CliError {
    fn from(e: mrc_core::Error) -> Self {
        use mrc_core::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter(_) | E::TooManyClasses { .. } | E::ExactRequiresZeroOne | E::LowerBoundUnavailable => {
                CliError::Usage(msg)
            }
            E::NonFiniteObjective { .. } | E::Numeric(_) | E::Lp(_) => CliError::Numeric(msg),
            // non-finite values in the solver output end up here as well as
            // non-finite inputs; inputs are screened while reading, so what
            // reaches this point came out of the arithmetic
            E::NonFinite(_) => CliError::Numeric(msg),
            E::Empty(_)
            | E::DimensionMismatch { .. }
            | E::TooFewClasses
            | E::LabelOutOfRange { .. }
            | E::ClassCountMismatch { .. }
            | E::UnseenClass(_) => CliError::Data(msg),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "mrc", version, about = "Minimax risk classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a classifier and report its bounds
    Train(TrainArgs),
    /// Write class probabilities for every row of a CSV file
    Predict(PredictArgs),
    /// Error rate and mean log loss of a saved model on labeled data
    Eval(EvalArgs),
    /// Print the bounds of a saved model, recomputed when data is given
    Bounds(BoundsArgs),
    /// Sweep a grid of configurations over datasets and seeds
    Benchmark(BenchmarkArgs),
    /// Write a Gaussian blob dataset
    GenData(GenDataArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum VariantArg {
    Mrc,
    Cmrc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum LossArg {
    #[value(name = "0-1")]
    ZeroOne,
    Log,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum PhiArg {
    Linear,
    Fourier,
    Relu,
    Threshold,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SolverArg {
    Nesterov,
    Exact,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Mrc => Variant::Mrc,
            VariantArg::Cmrc => Variant::Cmrc,
        }
    }
}

impl From<LossArg> for Loss {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::ZeroOne => Loss::ZeroOne,
            LossArg::Log => Loss::Log,
        }
    }
}

fn parse_sigma(s: &str) -> Result<Bandwidth, String> {
    if s == "median" {
        return Ok(Bandwidth::Median);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Bandwidth::Fixed(v)),
        _ => Err(format!("expected 'median' or a positive number, got '{s}'")),
    }
}

/// Feature map and solver settings shared by `train` and `benchmark`.
#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Random features for the fourier and relu maps
    #[arg(long, default_value_t = 100)]
    n_components: usize,
    /// Fourier bandwidth: a positive number or "median"
    #[arg(long, default_value = "median", value_parser = parse_sigma, allow_hyphen_values = true)]
    sigma: Bandwidth,
    /// Thresholds per input column for the threshold map
    #[arg(long, default_value_t = 10)]
    n_thresholds: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Nesterov)]
    solver: SolverArg,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

impl ModelArgs {
    fn feature_map(&self, phi: PhiArg, seed: u64) -> FeatureMapConfig {
        match phi {
            PhiArg::Linear => FeatureMapConfig::Linear,
            PhiArg::Fourier => FeatureMapConfig::Fourier {
                n_components: self.n_components,
                bandwidth: self.sigma,
                seed,
            },
            PhiArg::Relu => FeatureMapConfig::Relu {
                n_components: self.n_components,
                seed,
            },
            PhiArg::Threshold => FeatureMapConfig::Threshold {
                n_thresholds: self.n_thresholds,
            },
        }
    }

    fn solver(&self) -> SolverConfig {
        let backend = match self.solver {
            SolverArg::Nesterov => Backend::Nesterov,
            SolverArg::Exact => Backend::Exact,
        };
        SolverConfig {
            backend,
            max_iters: self.max_iters,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Mrc)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = LossArg::ZeroOne)]
    loss: LossArg,
    #[arg(long, value_enum, default_value_t = PhiArg::Linear)]
    phi: PhiArg,
    /// Band scale in lambda = s * sigma_hat / sqrt(n)
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hold out this fraction of rows and report test metrics
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Where to write the model (.mrc)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Label column; defaults to the one the model was trained with
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training data to recompute the bounds on
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Dataset; repeat for several
    #[arg(long, required = true)]
    data: Vec<PathBuf>,
    #[arg(long)]
    label: String,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "mrc,cmrc")]
    variant: Vec<VariantArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "0-1,log")]
    loss: Vec<LossArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "linear")]
    phi: Vec<PhiArg>,
    #[arg(long, value_delimiter = ',', default_value = "0.3", allow_negative_numbers = true)]
    s: Vec<f64>,
    /// Seeds for the split and the random feature maps
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    /// Results table (CSV)
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long, default_value_t = 200)]
    n_samples: usize,
    #[arg(long, default_value_t = 3)]
    n_classes: usize,
    #[arg(long, default_value_t = 2)]
    n_features: usize,
    /// Distance of each class centre from the origin
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the command line with `args` (program name first) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            // clap spreads its message over several lines; keep the
            // substance on one
            let text = e.to_string();
            let line: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", line.join(" "));
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Bounds(a) => bounds(a),
        Command::Benchmark(a) => benchmark(a),
        Command::GenData(a) => gen_data(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message().replace('\n', " "));
            e.exit_code()
        }
    }
}

/// Shortest decimal that reads back to the same value.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn emit(text: &str) -> CliResult {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| CliError::Data(format!("cannot write to stdout: {e}")))
}

fn train(a: TrainArgs) -> CliResult {
    if !(a.s >= 0.0 && a.s.is_finite()) {
        return Err(CliError::Usage(format!("--s must be a nonnegative number, got {}", a.s)));
    }
    let (data, feature_names) = csv_io::load_csv(&a.data, &a.label)?;
    let (train, test) = match a.test_fraction {
        Some(f) => {
            let (train, test) = split(&data, f, a.seed)?;
            (train, Some(test))
        }
        None => (data, None),
    };
    let config = FitConfig {
        variant: a.variant.into(),
        loss: a.loss.into(),
        feature_map: a.model.feature_map(a.phi, a.seed),
        s: a.s,
        solver: a.model.solver(),
    };
    let model = fit(&config, &train)?;
    let test_metrics = test.as_ref().map(|t| model.evaluate(t)).transpose()?;
    let saved = SavedModel {
        model,
        feature_names,
        label_column: a.label,
    };
    if let Some(out) = &a.out {
        persistence::save(out, &saved)?;
    }
    emit(&train_report(&saved.model, train.n_samples(), test_metrics.as_ref(), a.out.as_deref()))
}

/// Human readable report followed by one JSON line with the same facts.
fn train_report(model: &MrcModel, n: usize, test: Option<&Metrics>, out: Option<&Path>) -> String {
    let parts = model.parts();
    let d_out = parts.feature_map.output_dim();
    let upper = model.upper_bound();
    let lower = model.lower_bound().ok();
    let mut s = String::new();
    let _ = writeln!(s, "variant:      {}", parts.variant.name());
    let _ = writeln!(s, "loss:         {}", parts.loss.name());
    let _ = writeln!(s, "feature map:  {}", parts.feature_map.kind());
    let _ = writeln!(s, "n:            {n}");
    let _ = writeln!(s, "d_out:        {d_out}");
    let _ = writeln!(s, "m:            {}", d_out * model.n_classes());
    if upper.is_risk_bound {
        let _ = writeln!(s, "upper bound:  {}", num(upper.value));
    } else {
        let _ = writeln!(s, "objective:    {} (not a risk bound)", num(upper.value));
    }
    if let Some(l) = lower {
        let _ = writeln!(s, "lower bound:  {}", num(l));
    }
    let _ = writeln!(
        s,
        "solver:       {}, {} iterations",
        parts.solver.backend.name(),
        parts.solver.iterations
    );
    if let Some(t) = test {
        let _ = writeln!(s, "test error:   {} ({} rows)", num(t.error_rate), t.n);
        let _ = writeln!(s, "test 0-1 risk of rule: {}", num(t.expected_error));
        let _ = writeln!(s, "test logloss: {}", num(t.mean_log_loss));
    }
    if let Some(p) = out {
        let _ = writeln!(s, "model:        {}", p.display());
    }
    let report = json!({
        "variant": parts.variant.name(),
        "loss": parts.loss.name(),
        "feature_map": parts.feature_map.kind(),
        "n": n,
        "d_out": d_out,
        "m": d_out * model.n_classes(),
        "upper_bound": upper.value,
        "upper_bound_is_risk_bound": upper.is_risk_bound,
        "lower_bound": lower,
        "solver": parts.solver.backend.name(),
        "iterations": parts.solver.iterations,
        "test_error": test.map(|t| t.error_rate),
        "test_expected_error": test.map(|t| t.expected_error),
        "test_log_loss": test.map(|t| t.mean_log_loss),
    });
    let _ = writeln!(s, "{report}");
    s
}

fn predict(a: PredictArgs) -> CliResult {
    let saved = persistence::load(&a.model)?;
    let table = csv_io::read_table(&a.data, None, Some(&saved.feature_names))?;
    let model = &saved.model;
    let proba = model.predict_proba(&table.instances)?;
    let labels = model.predict_labels(&table.instances)?;

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header = ["row".to_owned(), "label".to_owned()]
        .into_iter()
        .chain(model.class_labels().iter().map(|c| format!("p_{c}")));
    let csv_err = |e: csv::Error| CliError::Data(format!("cannot render predictions: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for (i, (row, label)) in proba.iter_rows().zip(&labels).enumerate() {
        let record = [i.to_string(), (*label).to_owned()].into_iter().chain(row.iter().map(|&p| num(p)));
        w.write_record(record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    match &a.out {
        Some(p) => write_file(p, &bytes),
        None => emit(std::str::from_utf8(&bytes).expect("csv output is utf-8")),
    }
}

/// Reads labeled rows against a saved model's columns and classes.
fn load_for_model(saved: &SavedModel, path: &Path, label: Option<&str>) -> CliResult<LabeledDataset> {
    let label = label.unwrap_or(&saved.label_column);
    let table = csv_io::read_table(path, Some(label), Some(&saved.feature_names))?;
    let classes = saved.model.class_labels();
    let labels = table
        .labels
        .expect("label column requested")
        .iter()
        .map(|l| {
            classes
                .binary_search(l)
                .map_err(|_| mrc_core::Error::UnseenClass(l.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LabeledDataset::new(table.instances, labels, classes.to_vec())?)
}

fn eval(a: EvalArgs) -> CliResult {
    let saved = persistence::load(&a.model)?;
    let test = load_for_model(&saved, &a.data, a.label.as_deref())?;
    let m = saved.model.evaluate(&test)?;
    let mut s = String::new();
    let _ = writeln!(s, "n:             {}", m.n);
    let _ = writeln!(s, "error rate:    {}", num(m.error_rate));
    let _ = writeln!(s, "rule 0-1 risk: {}", num(m.expected_error));
    let _ = writeln!(s, "mean log loss: {}", num(m.mean_log_loss));
    let _ = writeln!(s, "clamped:       {}", m.clamped);
    let _ = writeln!(
        s,
        "{}",
        json!({"n": m.n, "error_rate": m.error_rate, "expected_error": m.expected_error, "mean_log_loss": m.mean_log_loss, "clamped": m.clamped})
    );
    emit(&s)
}

fn bounds(a: BoundsArgs) -> CliResult {
    let saved = persistence::load(&a.model)?;
    let model = &saved.model;
    let upper = model.upper_bound();
    let lower = model.lower_bound().ok();
    let mut s = String::new();
    let mut report = json!({
        "variant": model.variant().name(),
        "loss": model.loss().name(),
        "upper_bound": upper.value,
        "upper_bound_is_risk_bound": upper.is_risk_bound,
        "lower_bound": lower,
    });
    if upper.is_risk_bound {
        let _ = writeln!(s, "upper bound: {}", num(upper.value));
    } else {
        let _ = writeln!(s, "objective:   {} (not a risk bound)", num(upper.value));
    }
    match lower {
        Some(l) => {
            let _ = writeln!(s, "lower bound: {}", num(l));
        }
        None => {
            let _ = writeln!(s, "lower bound: unavailable for CMRC");
        }
    }
    match (&a.data, &a.label) {
        (Some(path), label) => {
            let train = load_for_model(&saved, path, label.as_deref())?;
            let spec = model.objective_for(&train)?;
            let upper = spec.value(model.mu())?;
            let solver = match model.solver_summary().backend {
                Backend::Exact => SolverConfig::exact(),
                Backend::Nesterov => SolverConfig::default(),
            };
            let lower = match model.variant() {
                Variant::Mrc => Some(lower_bound(&spec, model.mu(), &solver)?),
                Variant::Cmrc => None,
            };
            let _ = writeln!(s, "recomputed on {} ({} rows):", path.display(), train.n_samples());
            let _ = writeln!(s, "  upper: {}", num(upper));
            if let Some(l) = lower {
                let _ = writeln!(s, "  lower: {}", num(l));
            }
            report["recomputed"] = json!({"upper_bound": upper, "lower_bound": lower});
        }
        (None, Some(_)) => return Err(CliError::Usage("--label needs --data".into())),
        (None, None) => {}
    }
    let _ = writeln!(s, "{report}");
    emit(&s)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    dataset: usize,
    variant: VariantArg,
    loss: LossArg,
    phi: PhiArg,
    s: f64,
    seed: u64,
}

struct CellResult {
    cell: Cell,
    n_train: usize,
    n_test: usize,
    upper: f64,
    lower: Option<f64>,
    metrics: Metrics,
    iterations: usize,
}

const BENCHMARK_HEADER: [&str; 15] = [
    "dataset",
    "variant",
    "loss",
    "phi",
    "s",
    "seed",
    "n_train",
    "n_test",
    "upper_bound",
    "upper_is_risk_bound",
    "lower_bound",
    "test_error",
    "test_expected_error",
    "test_log_loss",
    "iterations",
];

fn benchmark(a: BenchmarkArgs) -> CliResult {
    if let Some(&s) = a.s.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(CliError::Usage(format!("--s must be nonnegative, got {s}")));
    }
    let datasets = a
        .data
        .iter()
        .map(|p| csv_io::load_csv(p, &a.label).map(|(ds, _)| ds))
        .collect::<Result<Vec<_>, _>>()?;

    let mut cells = Vec::new();
    for dataset in 0..datasets.len() {
        for &variant in &a.variant {
            for &loss in &a.loss {
                for &phi in &a.phi {
                    for &s in &a.s {
                        for &seed in &a.seed {
                            cells.push(Cell {
                                dataset,
                                variant,
                                loss,
                                phi,
                                s,
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }
    let mut results = cells
        .par_iter()
        .map(|&cell| {
            let (train, test) = split(&datasets[cell.dataset], a.test_fraction, cell.seed)?;
            let config = FitConfig {
                variant: cell.variant.into(),
                loss: cell.loss.into(),
                feature_map: a.model.feature_map(cell.phi, cell.seed),
                s: cell.s,
                solver: a.model.solver(),
            };
            let model = fit(&config, &train)?;
            Ok(CellResult {
                cell,
                n_train: train.n_samples(),
                n_test: test.n_samples(),
                upper: model.upper_bound().value,
                lower: model.lower_bound().ok(),
                metrics: model.evaluate(&test)?,
                iterations: model.solver_summary().iterations,
            })
        })
        .collect::<Result<Vec<_>, mrc_core::Error>>()?;
    results.sort_by(|x, y| {
        let (p, q) = (&x.cell, &y.cell);
        (p.dataset, p.variant, p.loss, p.phi)
            .cmp(&(q.dataset, q.variant, q.loss, q.phi))
            .then(p.s.total_cmp(&q.s))
            .then(p.seed.cmp(&q.seed))
    });

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Data(format!("cannot render results: {e}"));
    w.write_record(BENCHMARK_HEADER).map_err(csv_err)?;
    for r in &results {
        let c = &r.cell;
        w.write_record([
            a.data[c.dataset].display().to_string(),
            Variant::from(c.variant).name().to_owned(),
            Loss::from(c.loss).name().to_owned(),
            c.phi.to_possible_value().expect("no skipped values").get_name().to_owned(),
            num(c.s),
            c.seed.to_string(),
            r.n_train.to_string(),
            r.n_test.to_string(),
            num(r.upper),
            (c.variant == VariantArg::Mrc).to_string(),
            r.lower.map(num).unwrap_or_default(),
            num(r.metrics.error_rate),
            num(r.metrics.expected_error),
            num(r.metrics.mean_log_loss),
            r.iterations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&a.out, &bytes)?;
    emit(&format!("{} rows written to {}\n", results.len(), a.out.display()))
}

fn gen_data(a: GenDataArgs) -> CliResult {
    if !(a.separation >= 0.0 && a.separation.is_finite()) {
        return Err(CliError::Usage(format!(
            "--separation must be a nonnegative number, got {}",
            a.separation
        )));
    }
    let ds = gen_blobs(a.n_samples, a.n_classes, a.n_features, a.separation, a.seed).map_err(|e| match e {
        // bad sizes are a usage problem here, not a data problem
        mrc_core::Error::Empty(_) | mrc_core::Error::TooFewClasses => CliError::Usage(e.to_string()),
        other => other.into(),
    })?;
    let names: Vec<String> = (0..a.n_features).map(|j| format!("x{j}")).collect();
    let mut bytes = Vec::new();
    csv_io::write_dataset(&mut bytes, &ds, &names, "label")
        .map_err(|e| CliError::Data(format!("cannot render dataset: {e}")))?;
    write_file(&a.out, &bytes)
}
