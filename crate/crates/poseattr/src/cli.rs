//! The `poseattr` command line.
//!
//! Exit codes: 0 on success (including a fit that hit `--max-iters`, which
//! is reported as a warning), 1 for invalid input, flags or I/O, 2 when the
//! solver hits a numerically singular system.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poseattr_core::analysis::ImportanceMetric;
use poseattr_core::data::{generate, split, standardize};
use poseattr_core::model::accuracy;
use poseattr_core::{fit, Dataset, FeatureLayout, Model, SolverConfig, SynthSpec};

use crate::atomic::{check_writable, write_atomic};
use crate::bench::{bench_fit, bench_predict_features, render_table};
use crate::datafile::{load_data, load_dataset, save_dataset, FeatureNames};
use crate::error::{Error, Result};
use crate::fixture::planted_fixture;
use crate::modelfile::{load_model, save_model, ModelFile};
use crate::report::{
    AblationDocument, AblationRow, BenchDocument, FitSummary, ImportanceDocument, Predictions, Selection,
};

#[derive(Debug, Parser)]
#[command(name = "poseattr", version, about = "Activity recognition from skeleton joints and object attributes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a labeled dataset file.
    Train(TrainArgs),
    /// Predict every instance of a dataset file; reports accuracy when labeled.
    #[command(visible_alias = "evaluate")]
    Predict(PredictArgs),
    /// Report per-joint and per-object-attribute importance of a model.
    Analyze(AnalyzeArgs),
    /// Write a synthetic dataset with planted discriminative blocks.
    Synth(SynthArgs),
    /// Measure prediction (and optionally fitting) throughput.
    Bench(BenchArgs),
    /// Train full, skeletal-only and attribute-only models on one split.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ablation {
    Full,
    /// Keeps the skeletal norm only (lambda2 = 0).
    SkeletalOnly,
    /// Keeps the attribute norm only (lambda1 = 0).
    AttributeOnly,
}

impl Ablation {
    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::SkeletalOnly => "skeletal-only",
            Ablation::AttributeOnly => "attribute-only",
        }
    }

    pub fn apply(self, config: &SolverConfig) -> SolverConfig {
        let mut c = config.clone();
        match self {
            Ablation::Full => {}
            Ablation::SkeletalOnly => c.lambda2 = 0.0,
            Ablation::AttributeOnly => c.lambda1 = 0.0,
        }
        c
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standardize every feature to zero mean and unit variance using
    /// training-set statistics; the transform is stored in the model.
    #[arg(long)]
    pub standardize: bool,
}

impl SolverArgs {
    pub fn config(&self) -> Result<SolverConfig> {
        let config = SolverConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            tol: self.tol,
            max_iters: self.max_iters,
            epsilon: self.epsilon,
            seed: self.seed,
        };
        config.validate().map_err(flag_error)?;
        Ok(config)
    }
}

// Names the offending flag instead of the struct field.
fn flag_error(e: poseattr_core::Error) -> Error {
    match e {
        poseattr_core::Error::InvalidConfig { field, reason } => {
            Error::Invalid(format!("--{}: {reason}", field.replace('_', "-")))
        }
        other => other.into(),
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the fit report as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Hold out part of the data and report test accuracy; the model is fit
    /// on the training part only.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long, value_enum, default_value_t = Ablation::Full)]
    pub ablation: Ablation,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Write the predictions JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    BlockNorm,
    SignedSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Write the report JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::BlockNorm)]
    pub metric: Metric,
    /// Joint rows to report, e.g. `0,3,4`.
    #[arg(long, value_delimiter = ',')]
    pub joints: Option<Vec<usize>>,
    /// Object rows to report.
    #[arg(long, value_delimiter = ',')]
    pub objects: Option<Vec<usize>>,
    /// Class columns to report.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<usize>>,
    /// What to print on standard output.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Use the built-in planted fixture; layout and planting flags are ignored.
    #[arg(long)]
    pub fixture: bool,
    #[arg(long, value_delimiter = ',', default_value = "3,3,3,3,3")]
    pub joint_dims: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub objects: usize,
    #[arg(long, value_delimiter = ',', default_value = "3,2")]
    pub modality_dims: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub noise_sigma: f64,
    /// Per-class planted joints: classes separated by `;`, joints by `,`,
    /// e.g. `0;1,2`. Default: class k plants joint k mod J.
    #[arg(long)]
    pub planted_joints: Option<String>,
    /// Per-class planted object:modality pairs, e.g. `0:0;1:1,0:1`. Default:
    /// class k plants (k mod O, (k / O) mod M).
    #[arg(long)]
    pub planted_blocks: Option<String>,
    /// Defaults to 0, or to the fixture's own seed with `--fixture`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the ground-truth weights as a model file.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Minimum measured wall time in seconds.
    #[arg(long, default_value_t = 2.0)]
    pub min_duration: f64,
    /// Also time this many fits on the (labeled) data with the model's
    /// hyperparameters.
    #[arg(long)]
    pub fit_reps: Option<usize>,
    /// Write the result JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Directory receiving full.json, skeletal-only.json and attribute-only.json.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub force: bool,
}

/// Runs one parsed command. Regular output goes to `out`, warnings to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a, out, err),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Ablate(a) => cmd_ablate(&a, out, err),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 1;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn require_file(path: &Path, flag: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{flag}: {} is not a readable file", path.display())))
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("--train-fraction: must lie strictly between 0 and 1, got {f}")))
    }
}

struct Trained {
    file: ModelFile,
    report: poseattr_core::FitReport,
    train_accuracy: f64,
}

// Fit with optional standardization learned on `train`.
fn train_model(train: &Dataset, names: &FeatureNames, config: &SolverConfig, standardized: bool) -> Result<Trained> {
    let (fit_set, standardizer) = if standardized {
        let (ds, s) = standardize(train)?;
        (ds, Some(s))
    } else {
        (train.clone(), None)
    };
    let (model, report) = fit(&fit_set, config)?;
    let train_accuracy = model.predict_batch(&fit_set)?.accuracy;
    Ok(Trained {
        file: ModelFile {
            model,
            names: names.clone(),
            standardizer,
        },
        report,
        train_accuracy,
    })
}

fn evaluate(file: &ModelFile, dataset: &Dataset) -> Result<f64> {
    let data = crate::datafile::DataFile::from_dataset(dataset, file.names.clone());
    let predicted = file.predict_file(&data)?;
    Ok(accuracy(&predicted, dataset.class_indices()))
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let config = a.ablation.apply(&a.solver.config()?);
    if let Some(f) = a.train_fraction {
        check_fraction(f)?;
    }
    require_file(&a.data, "--data")?;
    check_writable(&a.out, a.force)?;
    if let Some(r) = &a.report {
        check_writable(r, a.force)?;
    }

    let (dataset, names) = load_dataset(&a.data)?;
    let (train, test) = match a.train_fraction {
        Some(f) => {
            let s = split(&dataset, f, config.seed).map_err(flag_error)?;
            (s.train, Some(s.test))
        }
        None => (dataset, None),
    };
    let trained = train_model(&train, &names, &config, a.solver.standardize)?;
    let mut summary = FitSummary::new(a.ablation.name(), &config, &trained.report);
    summary.standardized = a.solver.standardize;
    summary.train_instances = train.len();
    summary.train_accuracy = trained.train_accuracy;
    if let Some(test) = &test {
        summary.test_instances = Some(test.len());
        summary.test_accuracy = Some(evaluate(&trained.file, test)?);
    }

    save_model(&trained.file, &a.out, a.force)?;
    let json = to_json(&summary)?;
    if let Some(r) = &a.report {
        write_atomic(r, json.as_bytes(), a.force)?;
    }
    if let Some(w) = &summary.warning {
        let _ = writeln!(err, "warning: {w}");
    }
    write_out(out, &json)
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    require_file(&a.model, "--model")?;
    require_file(&a.data, "--data")?;
    if let Some(p) = &a.out {
        check_writable(p, a.force)?;
    }
    let file = load_model(&a.model)?;
    let data = load_data(&a.data)?;
    let predicted = file.predict_file(&data)?;
    let acc = data.labels.as_ref().map(|truth| accuracy(&predicted, truth));
    let doc = Predictions::new(&predicted, file.model.class_names(), acc);
    let json = to_json(&doc)?;
    match &a.out {
        Some(p) => {
            write_atomic(p, json.as_bytes(), a.force)?;
            if let Some(acc) = acc {
                write_out(out, &format!("accuracy {acc:.6} on {} instances\n", predicted.len()))?;
            }
            Ok(())
        }
        None => write_out(out, &json),
    }
}

pub fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    require_file(&a.model, "--model")?;
    if let Some(p) = &a.out {
        check_writable(p, a.force)?;
    }
    let file = load_model(&a.model)?;
    let selection = Selection {
        joints: a.joints.clone(),
        objects: a.objects.clone(),
        classes: a.classes.clone(),
    };
    selection.validate(&file.model).map_err(Error::Invalid)?;
    let metric = match a.metric {
        Metric::BlockNorm => ImportanceMetric::BlockNorm,
        Metric::SignedSum => ImportanceMetric::SignedSum,
    };
    let doc = ImportanceDocument::new(&file.model, &file.names, metric, selection);
    let json = to_json(&doc)?;
    if let Some(p) = &a.out {
        write_atomic(p, json.as_bytes(), a.force)?;
    }
    match a.format {
        Format::Table => write_out(out, &doc.render_table()),
        Format::Json => write_out(out, &json),
    }
}

fn parse_sets<T>(text: &str, classes: usize, flag: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<Vec<T>>> {
    let sets: Vec<&str> = text.split(';').collect();
    if sets.len() != classes {
        return Err(Error::Invalid(format!(
            "{flag}: expected {classes} `;`-separated class entries, got {}",
            sets.len()
        )));
    }
    sets.iter()
        .map(|set| {
            set.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| item(s).ok_or_else(|| Error::Invalid(format!("{flag}: cannot parse {s:?}"))))
                .collect()
        })
        .collect()
}

pub fn synth_spec(a: &SynthArgs) -> Result<SynthSpec> {
    if a.fixture {
        let mut spec = planted_fixture();
        if let Some(seed) = a.seed {
            spec.seed = seed;
        }
        return Ok(spec);
    }
    let layout = FeatureLayout::new(a.joint_dims.clone(), a.objects, a.modality_dims.clone())?;
    let (j, o, m) = (layout.joint_count(), layout.object_count(), layout.modality_count());
    let planted_joints = match &a.planted_joints {
        Some(text) => parse_sets(text, a.classes, "--planted-joints", |s| s.parse().ok())?,
        None => (0..a.classes).map(|k| vec![k % j]).collect(),
    };
    let planted_blocks = match &a.planted_blocks {
        Some(text) => parse_sets(text, a.classes, "--planted-blocks", |s| {
            let (o, m) = s.split_once(':')?;
            Some((o.trim().parse().ok()?, m.trim().parse().ok()?))
        })?,
        None => (0..a.classes).map(|k| vec![(k % o, (k / o) % m)]).collect(),
    };
    let spec = SynthSpec {
        layout,
        classes: a.classes,
        instances: a.instances,
        noise_sigma: a.noise_sigma,
        planted_joints,
        planted_blocks,
        seed: a.seed.unwrap_or(0),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let spec = synth_spec(a)?;
    check_writable(&a.out, a.force)?;
    if let Some(t) = &a.truth {
        check_writable(t, a.force)?;
    }
    let generated = generate(&spec)?;
    let names = FeatureNames::default();
    save_dataset(&generated.dataset, &names, &a.out, a.force)?;
    if let Some(t) = &a.truth {
        let model = Model::new(
            spec.layout.clone(),
            generated.skeleton_weights.clone(),
            generated.object_weights.clone(),
            generated.dataset.class_names().to_vec(),
            SolverConfig {
                seed: spec.seed,
                ..Default::default()
            },
        )?;
        save_model(&ModelFile::new(model), t, a.force)?;
    }
    let ds = &generated.dataset;
    write_out(
        out,
        &format!(
            "wrote {} instances (d_T = {}, d_O = {}, C = {}) class counts {:?}\n",
            ds.len(),
            ds.layout().skeleton_dim(),
            ds.layout().object_dim(),
            ds.class_count(),
            ds.class_counts()
        ),
    )
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    if !(a.min_duration.is_finite() && a.min_duration >= 0.0) {
        return Err(Error::Invalid(format!(
            "--min-duration: must be a nonnegative number of seconds, got {}",
            a.min_duration
        )));
    }
    if a.fit_reps == Some(0) {
        return Err(Error::Invalid("--fit-reps: must be at least 1".into()));
    }
    require_file(&a.model, "--model")?;
    require_file(&a.data, "--data")?;
    if let Some(p) = &a.out {
        check_writable(p, a.force)?;
    }
    let file = load_model(&a.model)?;
    let data = load_data(&a.data)?;
    if data.layout != *file.model.layout() {
        return Err(Error::Invalid("--data: layout does not match the model layout".into()));
    }
    let mut result = bench_predict_features(
        &file.model,
        &data.skeleton,
        &data.objects,
        Duration::from_secs_f64(a.min_duration),
    )?;
    if let Some(reps) = a.fit_reps {
        let fitted = bench_fit(&data.to_dataset()?, file.model.config(), reps)?;
        result.fit_seconds = fitted.fit_seconds;
        result.fit_iterations = fitted.fit_iterations;
    }
    let json = to_json(&BenchDocument::new(&result))?;
    if let Some(p) = &a.out {
        write_atomic(p, json.as_bytes(), a.force)?;
    }
    match a.format {
        Format::Table => write_out(out, &render_table(&result)),
        Format::Json => write_out(out, &json),
    }
}

pub fn cmd_ablate(a: &AblateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let base = a.solver.config()?;
    check_fraction(a.train_fraction)?;
    require_file(&a.data, "--data")?;
    if a.out.exists() && !a.out.is_dir() {
        return Err(Error::Invalid(format!("--out: {} is not a directory", a.out.display())));
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let modes = [Ablation::Full, Ablation::SkeletalOnly, Ablation::AttributeOnly];
    let paths: Vec<PathBuf> = modes.iter().map(|m| a.out.join(format!("{}.json", m.name()))).collect();
    for p in &paths {
        check_writable(p, a.force)?;
    }
    let summary_path = a.out.join("ablation.json");
    check_writable(&summary_path, a.force)?;

    let (dataset, names) = load_dataset(&a.data)?;
    let s = split(&dataset, a.train_fraction, base.seed).map_err(flag_error)?;
    let mut rows = Vec::new();
    let mut trained_files = Vec::new();
    for mode in modes {
        let config = mode.apply(&base);
        let trained = train_model(&s.train, &names, &config, a.solver.standardize)?;
        if !trained.report.converged {
            let _ = writeln!(err, "warning: {} model did not converge within {} iterations", mode.name(), config.max_iters);
        }
        rows.push(AblationRow {
            mode: mode.name(),
            lambda1: config.lambda1,
            lambda2: config.lambda2,
            train_accuracy: trained.train_accuracy,
            test_accuracy: evaluate(&trained.file, &s.test)?,
            iterations_run: trained.report.iterations_run,
            converged: trained.report.converged,
            model: String::new(),
        });
        trained_files.push(trained.file);
    }
    for ((file, path), row) in trained_files.iter().zip(&paths).zip(rows.iter_mut()) {
        save_model(file, path, a.force)?;
        row.model = path.display().to_string();
    }
    let doc = AblationDocument {
        schema: "poseattr.ablation",
        schema_version: crate::report::SCHEMA_VERSION,
        train_fraction: a.train_fraction,
        seed: base.seed,
        train_instances: s.train.len(),
        test_instances: s.test.len(),
        rows,
    };
    let json = to_json(&doc)?;
    write_atomic(&summary_path, json.as_bytes(), a.force)?;
    match a.format {
        Format::Table => write_out(out, &doc.render_table()),
        Format::Json => write_out(out, &json),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablation_zeroes_the_dropped_norm() {
        let c = SolverConfig::default();
        assert_eq!(Ablation::SkeletalOnly.apply(&c).lambda2, 0.0);
        assert_eq!(Ablation::SkeletalOnly.apply(&c).lambda1, 0.1);
        assert_eq!(Ablation::AttributeOnly.apply(&c).lambda1, 0.0);
        assert_eq!(Ablation::Full.apply(&c), c);
    }

    #[test]
    fn planted_set_parsing() {
        let sets = parse_sets("0;1,2", 2, "--x", |s| s.parse::<usize>().ok()).unwrap();
        assert_eq!(sets, vec![vec![0], vec![1, 2]]);
        assert!(parse_sets("0", 2, "--x", |s| s.parse::<usize>().ok()).is_err());
        assert!(parse_sets("a;1", 2, "--x", |s| s.parse::<usize>().ok()).is_err());
    }

    #[test]
    fn negative_lambda_names_the_flag() {
        let args = SolverArgs {
            lambda1: -1.0,
            lambda2: 0.1,
            tol: 1e-6,
            max_iters: 10,
            epsilon: 1e-8,
            seed: 0,
            standardize: false,
        };
        let e = args.config().unwrap_err();
        assert!(e.to_string().contains("--lambda1"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }
}
