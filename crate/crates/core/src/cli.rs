//! Command-line front end. Exit codes: 0 ok, 1 usage or config, 2 data,
//! 3 internal.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::arch::zoo::Zoo;
use crate::arch::{arch_op_counts, ArchError};
use crate::derive_seed;
use crate::dsp::{featurize, DspConfig, DspError, IdleEstimate};
use crate::experiment::{run_experiment, ExperimentConfig, ExperimentError, NoiseSetting, Task};
use crate::learn::{
    read_feature_csv, train, write_feature_csv, ClassifierKind, ClassifierModel, FeatureRow,
    LabeledDataset, LearnError, TaskMode, TrainConfig,
};
use crate::power::{DevicePowerProfile, PowerError, SparsityConfig, DEFAULT_SAMPLE_RATE};
use crate::report::{read_result, summary, write_bundle, ReportError};
use crate::synth::{synthesize_epoch, EpochPlan, NoiseModel, PowerTrace, SynthError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<ArchError> for CliError {
    fn from(e: ArchError) -> Self {
        match e {
            ArchError::ZooFile { .. } => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PowerError> for CliError {
    fn from(e: PowerError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Io { .. } | SynthError::Format { .. } | SynthError::Trace(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) => CliError::Usage(e.to_string()),
            ExperimentError::Arch(a) => a.into(),
            ExperimentError::Power(p) => p.into(),
            ExperimentError::Synth(s) => s.into(),
            ExperimentError::Learn(l) => l.into(),
            ExperimentError::Dsp { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "dnnsca",
    version,
    about = "Power side-channel fingerprinting of DNN inference"
)]
pub struct Cli {
    /// Model zoo directory [default: built-in, or $DNNSCA_ZOO_DIR]
    #[arg(long, global = true)]
    pub zoo_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the model zoo
    #[command(subcommand)]
    Zoo(ZooCommand),
    /// Synthesize power traces for a zoo entry
    Synth(SynthArgs),
    /// Turn trace CSVs into a feature CSV
    Featurize(FeaturizeArgs),
    /// Train a classifier on a feature CSV
    Train(TrainArgs),
    /// Identify the model behind a trace
    Attack(AttackArgs),
    /// Generate data, train and evaluate, write a report bundle
    RunExperiment(ExperimentArgs),
    /// Re-render a report bundle from its result.json
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum ZooCommand {
    /// Table of entries with layer and operation counts
    List {
        /// Only this family
        #[arg(long)]
        family: Option<String>,
    },
    /// Write the zoo as JSON files
    Export { dir: PathBuf },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub arch: String,
    /// Variant string; the family's base entry when omitted
    #[arg(long)]
    pub variant: Option<String>,
    /// Uniform sparsity for conv and fc layers
    #[arg(long, default_value_t = 1.0)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long, default_value_t = 24)]
    pub images: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Device profile JSON
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Output CSV; with several epochs, `_eNNN` is appended to the stem
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 0.01)]
    pub sigma_current: f64,
    #[arg(long, default_value_t = 0.005)]
    pub sigma_voltage: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_level: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_drift: f64,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub group_size: usize,
    /// Idle power in watts instead of estimating it
    #[arg(long)]
    pub idle: Option<f64>,
    /// Sample rate for CSVs without a sidecar
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    pub sample_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Svm,
    Knn,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Svm => ClassifierKind::MaxMarginLinear,
            KindArg::Knn => ClassifierKind::NearestNeighbor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Coarse,
    Fine,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub features: PathBuf,
    #[arg(long, value_enum, default_value = "coarse")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "svm")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Window size the features were built with
    #[arg(long, default_value_t = 5)]
    pub group_size: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub model: PathBuf,
    pub trace: PathBuf,
    /// Ignored with a warning when it differs from the model's
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    pub sample_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Coarse6,
    Finetune24,
    Sparsity16,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Coarse6 => Task::Coarse6,
            TaskArg::Finetune24 => Task::Finetune24,
            TaskArg::Sparsity16 => Task::Sparsity16,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config JSON; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub windows_per_class: Option<usize>,
    #[arg(long)]
    pub splits: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Per-sample noise as a fraction of the smallest class gap
    #[arg(long)]
    pub noise_fraction: Option<f64>,
    #[arg(long)]
    pub sigma_drift: Option<f64>,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Bundle directory holding result.json
    pub dir: PathBuf,
    /// Write the regenerated bundle here instead of in place
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Model file written by `train`: the classifier plus the window size its
/// features were computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub group_size: usize,
    pub classifier: ClassifierModel,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let zoo = || -> Result<Zoo, CliError> {
        Ok(match &cli.zoo_dir {
            Some(d) => Zoo::load_dir(d)?,
            None => Zoo::from_env()?,
        })
    };
    let w =
        |r: std::io::Result<()>| r.map_err(|e| CliError::Internal(format!("writing output: {e}")));
    match cli.command {
        Command::Zoo(ZooCommand::List { ref family }) => {
            w(cmd_zoo_list(&zoo()?, family.as_deref(), out)?)
        }
        Command::Zoo(ZooCommand::Export { ref dir }) => {
            let z = zoo()?;
            z.write_dir(dir).map_err(io_err(dir))?;
            w(writeln!(
                out,
                "wrote {} entries to {}",
                z.len(),
                dir.display()
            ))
        }
        Command::Synth(ref a) => {
            for p in cmd_synth(&zoo()?, a)? {
                w(writeln!(out, "{}", p.display()))?;
            }
            Ok(())
        }
        Command::Featurize(ref a) => cmd_featurize(a, out),
        Command::Train(ref a) => cmd_train(a, out),
        Command::Attack(ref a) => cmd_attack(a, out),
        Command::RunExperiment(ref a) => cmd_run_experiment(&zoo()?, a, out),
        Command::Report(ref a) => cmd_report(a, out),
    }
}

fn load_profile(path: Option<&Path>) -> Result<DevicePowerProfile, CliError> {
    match path {
        None => Ok(DevicePowerProfile::default()),
        Some(p) => {
            let s = fs::read_to_string(p).map_err(io_err(p))?;
            DevicePowerProfile::from_json(&s)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

pub fn cmd_zoo_list(
    zoo: &Zoo,
    family: Option<&str>,
    out: &mut dyn Write,
) -> Result<std::io::Result<()>, CliError> {
    let entries: Vec<_> = match family {
        Some(f) => {
            let v = zoo.family(f);
            if v.is_empty() {
                return Err(CliError::Usage(format!(
                    "unknown family {f}; valid: {}",
                    zoo.names().join(", ")
                )));
            }
            v
        }
        None => zoo.entries().iter().collect(),
    };
    let mut rows = Vec::with_capacity(entries.len());
    for a in entries {
        let total = arch_op_counts(a)?.totals.total()?;
        rows.push((a.name.clone(), a.variant.clone(), a.layers.len(), total));
    }
    let nw = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(4);
    let vw = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(7);
    Ok((|| {
        writeln!(
            out,
            "{:nw$}  {:vw$}  {:>6}  {:>15}",
            "name", "variant", "layers", "total_ops"
        )?;
        for (n, v, l, t) in &rows {
            writeln!(out, "{n:nw$}  {v:vw$}  {l:>6}  {t:>15}")?;
        }
        Ok(())
    })())
}

/// Output path of epoch `e` out of `n`.
pub fn epoch_path(base: &Path, e: usize, n: usize) -> PathBuf {
    if n == 1 {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    base.with_file_name(format!("{stem}_e{e:03}.{ext}"))
}

pub fn cmd_synth(zoo: &Zoo, a: &SynthArgs) -> Result<Vec<PathBuf>, CliError> {
    if a.epochs == 0 {
        return Err(CliError::Usage("--epochs must be >= 1".into()));
    }
    let arch = match &a.variant {
        Some(v) => zoo.get(&a.arch, v)?,
        None => zoo.base(&a.arch)?,
    };
    let profile = load_profile(a.profile.as_deref())?;
    let arch = profile.prepare(arch.clone());
    let sparsity = SparsityConfig::uniform(a.sparsity);
    let plan = EpochPlan {
        n_images: a.images,
        ..EpochPlan::default()
    };
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut written = Vec::new();
    for e in 0..a.epochs {
        let noise = NoiseModel {
            sigma_current: a.noise.sigma_current,
            sigma_voltage: a.noise.sigma_voltage,
            sigma_level: a.noise.sigma_level,
            sigma_drift: a.noise.sigma_drift,
            seed: derive_seed(a.seed, &[e as u64]),
        };
        let trace = synthesize_epoch(&arch, &profile, &sparsity, &noise, &plan)?;
        let path = epoch_path(&a.out, e, a.epochs);
        trace.write_csv(&path)?;
        written.push(path);
    }
    Ok(written)
}

fn dsp_config(group_size: usize, idle: Option<f64>) -> DspConfig {
    DspConfig {
        group_size,
        idle: idle.map_or(IdleEstimate::Auto, IdleEstimate::Fixed),
        ..DspConfig::default()
    }
}

/// Label carried by a synthetic trace's sidecar.
fn labels_of(trace: &PowerTrace) -> (Option<String>, Option<f64>) {
    match &trace.meta {
        Some(m) => (m.arch.clone(), m.sparsity.map(|s| s.lambda1)),
        None => (None, None),
    }
}

pub fn cmd_featurize(a: &FeaturizeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.group_size == 0 {
        return Err(CliError::Usage("--group-size must be >= 1".into()));
    }
    let cfg = dsp_config(a.group_size, a.idle);
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for path in &a.traces {
        let trace = PowerTrace::read_csv(path, a.sample_rate)?;
        let (arch, sparsity) = labels_of(&trace);
        match featurize(&trace, &cfg) {
            Ok(f) => rows.extend(f.features.into_iter().map(|features| FeatureRow {
                features,
                arch: arch.clone(),
                sparsity,
            })),
            Err(DspError::NoActiveRegion) => {
                log::warn!("{}: no inference activity found, skipped", path.display());
                skipped += 1;
            }
            Err(e) => return Err(CliError::Data(format!("{}: {e}", path.display()))),
        }
    }
    let file = fs::File::create(&a.out).map_err(io_err(&a.out))?;
    write_feature_csv(std::io::BufWriter::new(file), &rows)?;
    writeln!(
        out,
        "traces: {}, windows: {}, skipped: {}",
        a.traces.len(),
        rows.len(),
        skipped
    )
    .map_err(|e| CliError::Internal(e.to_string()))?;
    if rows.is_empty() {
        return Err(CliError::Data("no windows extracted from any trace".into()));
    }
    Ok(())
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = read_feature_csv(&a.features)?;
    let mode = match a.mode {
        ModeArg::Coarse => TaskMode::Coarse,
        ModeArg::Fine => TaskMode::Fine,
    };
    let ds = LabeledDataset::from_feature_rows(mode, &rows)?;
    let mut cfg = TrainConfig {
        kind: a.kind.into(),
        k: a.k,
        standardize: !a.no_standardize,
        seed: a.seed,
        ..TrainConfig::default()
    };
    if let Some(l) = a.lambda {
        cfg.svm.lambda = l;
    }
    if let Some(e) = a.epochs {
        cfg.svm.epochs = e;
    }
    let model = train(&ds, &cfg)?;
    let file = ModelFile {
        group_size: a.group_size,
        classifier: model,
    };
    let text =
        serde_json::to_string_pretty(&file).map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(&a.out, text + "\n").map_err(io_err(&a.out))?;
    writeln!(
        out,
        "trained {:?} on {} rows, {} classes",
        cfg.kind,
        ds.len(),
        file.classifier.classes.len()
    )
    .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn read_model(path: &Path) -> Result<ModelFile, CliError> {
    let s = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&s).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn cmd_attack(a: &AttackArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    if let Some(g) = a.group_size.filter(|&g| g != model.group_size) {
        log::warn!(
            "--group-size {g} differs from the model's {}; using the model's",
            model.group_size
        );
    }
    let trace = PowerTrace::read_csv(&a.trace, a.sample_rate)?;
    let no_activity = || {
        CliError::Data(format!(
            "{}: no inference activity found",
            a.trace.display()
        ))
    };
    let f = match featurize(&trace, &dsp_config(model.group_size, None)) {
        Ok(f) => f,
        Err(DspError::NoActiveRegion) => return Err(no_activity()),
        Err(e) => return Err(CliError::Data(format!("{}: {e}", a.trace.display()))),
    };
    if f.features.is_empty() {
        return Err(no_activity());
    }
    let cm = &model.classifier;
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    let w = |r: std::io::Result<()>| r.map_err(|e| CliError::Internal(e.to_string()));
    for (i, feat) in f.features.iter().enumerate() {
        let k = cm.predict_index(feat);
        *votes.entry(k).or_default() += 1;
        w(writeln!(out, "window {i}: {}", cm.classes[k]))?;
    }
    // most votes; ties go to the lower class index
    let (&best, _) = votes
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .expect("at least one window");
    let label = &cm.classes[best];
    let sparsity = match cm.mode {
        TaskMode::Coarse => 1.0,
        TaskMode::Fine => label.sparsity.map_or(1.0, |s| s.0),
    };
    w(writeln!(
        out,
        "votes: {}",
        votes
            .iter()
            .map(|(k, n)| format!("{}={n}", cm.classes[*k]))
            .collect::<Vec<_>>()
            .join(" ")
    ))?;
    w(writeln!(
        out,
        "prediction: {} sparsity={sparsity:.1}",
        label.arch
    ))
}

/// Config file (if any) with flags applied on top.
pub fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => {
            let s = fs::read_to_string(p).map_err(io_err(p))?;
            ExperimentConfig::from_json(&s)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => match a.task {
            Some(t) => ExperimentConfig::new(t.into()),
            None => {
                return Err(CliError::Usage(
                    "either --config or --task is required".into(),
                ))
            }
        },
    };
    if let Some(t) = a.task {
        cfg.task = t.into();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.windows_per_class {
        cfg.windows_per_class = n;
    }
    if let Some(n) = a.splits {
        cfg.split_repeats = n;
    }
    if let Some(k) = a.kind {
        cfg.classifier.kind = k.into();
    }
    if let Some(k) = a.k {
        cfg.classifier.k = k;
    }
    if a.noise_fraction.is_some() || a.sigma_drift.is_some() {
        let (fraction, sigma_level, sigma_drift) = match cfg.noise_setting() {
            NoiseSetting::RelativeGap {
                fraction,
                sigma_level,
                sigma_drift,
            } => (fraction, sigma_level, sigma_drift),
            NoiseSetting::Fixed { .. } if a.noise_fraction.is_none() => {
                return Err(CliError::Usage(
                    "--sigma-drift needs --noise-fraction with a fixed-noise config".into(),
                ))
            }
            NoiseSetting::Fixed {
                sigma_level,
                sigma_drift,
                ..
            } => (0.0, sigma_level, sigma_drift),
        };
        cfg.noise = Some(NoiseSetting::RelativeGap {
            fraction: a.noise_fraction.unwrap_or(fraction),
            sigma_level,
            sigma_drift: a.sigma_drift.unwrap_or(sigma_drift),
        });
    }
    if let Some(p) = &a.profile {
        cfg.profile_path = Some(p.display().to_string());
    }
    if a.k == Some(0) {
        return Err(CliError::Usage("--k must be >= 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_run_experiment(
    zoo: &Zoo,
    a: &ExperimentArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = experiment_config(a)?;
    let profile = load_profile(cfg.profile_path.as_deref().map(Path::new))?;
    let result = run_experiment(&cfg, zoo, &profile)?;
    write_bundle(&result, &a.out)?;
    out.write_all(summary(&result).as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let result = read_result(&a.dir)?;
    write_bundle(&result, a.out.as_deref().unwrap_or(&a.dir))?;
    out.write_all(summary(&result).as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))
}
