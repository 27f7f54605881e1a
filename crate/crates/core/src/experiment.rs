//! End-to-end experiments: synthesize labeled epochs, featurize, then
//! train and score a classifier over repeated stratified splits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::zoo::Zoo;
use crate::arch::{ArchError, ArchitectureSpec};
use crate::derive_seed;
use crate::dsp::{featurize, DspConfig, DspError, FeatureVector};
use crate::learn::{
    evaluate, split, train, ClassLabel, ConfusionMatrix, LabeledDataset, LearnError, Row,
    SplitRatio, TaskMode, TrainConfig,
};
use crate::power::{DevicePowerProfile, PowerError, SparsityConfig};
use crate::synth::{synthesize_epoch, EpochPlan, NoiseModel, SynthError};

pub const SCHEMA_VERSION: u32 = 1;

// Stream tags keep the seed families apart.
const STREAM_SYNTH: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_TRAIN: u64 = 3;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{source_label}: {error}")]
    Dsp {
        source_label: String,
        error: DspError,
    },
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// The six base models.
    Coarse6,
    /// All catalog entries, labeled by family.
    Finetune24,
    /// Four models at four sparsity scales, labeled by both.
    Sparsity16,
}

impl Task {
    pub fn mode(&self) -> TaskMode {
        match self {
            Task::Sparsity16 => TaskMode::Fine,
            _ => TaskMode::Coarse,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Coarse6 => "coarse6",
            Task::Finetune24 => "finetune24",
            Task::Sparsity16 => "sparsity16",
        }
    }
}

pub const SPARSITY16_MODELS: [&str; 4] = ["Alexnet", "InceptionV3", "Resnet50", "Resnet101"];
pub const DEFAULT_SCALES: [f64; 4] = [1.0, 0.8, 0.6, 0.4];

/// How measurement noise is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseSetting {
    Fixed {
        sigma_current: f64,
        sigma_voltage: f64,
        #[serde(default)]
        sigma_level: f64,
        #[serde(default)]
        sigma_drift: f64,
    },
    /// Per-sample power noise as a fraction of the smallest gap between
    /// noiseless window mean powers of two different classes.
    RelativeGap {
        fraction: f64,
        #[serde(default)]
        sigma_level: f64,
        #[serde(default)]
        sigma_drift: f64,
    },
}

/// Epoch drift that puts sparsity16 fine accuracy near 0.85 with the
/// default classifier while architecture accuracy stays near 0.99.
pub const SPARSITY16_DRIFT: f64 = 0.1;

impl NoiseSetting {
    /// Per-sample noise at 5% of the smallest class gap; sparsity16 adds
    /// epoch drift.
    pub fn default_for(task: Task) -> Self {
        NoiseSetting::RelativeGap {
            fraction: 0.05,
            sigma_level: 0.0,
            sigma_drift: if task == Task::Sparsity16 {
                SPARSITY16_DRIFT
            } else {
                0.0
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub task: Task,
    /// Families to use; empty means the task default.
    #[serde(default)]
    pub models: Vec<String>,
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "default_windows")]
    pub windows_per_class: usize,
    /// Task default when absent.
    #[serde(default)]
    pub noise: Option<NoiseSetting>,
    /// Device profile file; the built-in profile when absent.
    #[serde(default)]
    pub profile_path: Option<String>,
    #[serde(default)]
    pub split: SplitRatio,
    #[serde(default = "default_repeats")]
    pub split_repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub plan: EpochPlan,
    #[serde(default = "default_group")]
    pub group_size: usize,
    #[serde(default)]
    pub classifier: TrainConfig,
}

fn default_scales() -> Vec<f64> {
    DEFAULT_SCALES.to_vec()
}

fn default_windows() -> usize {
    125
}

fn default_repeats() -> usize {
    10
}

fn default_group() -> usize {
    5
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            task,
            models: Vec::new(),
            scales: default_scales(),
            windows_per_class: default_windows(),
            noise: None,
            profile_path: None,
            split: SplitRatio::default(),
            split_repeats: default_repeats(),
            seed: 0,
            plan: EpochPlan::default(),
            group_size: default_group(),
            classifier: TrainConfig::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, ExperimentError> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| ExperimentError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ExperimentError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn noise_setting(&self) -> NoiseSetting {
        self.noise.unwrap_or(NoiseSetting::default_for(self.task))
    }

    /// Checks everything that can be checked without synthesizing.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.windows_per_class == 0 {
            return bad("windows_per_class must be >= 1".into());
        }
        if self.windows_per_class < self.split.train + self.split.test {
            return bad(format!(
                "windows_per_class {} is too small for a {}:{} split",
                self.windows_per_class, self.split.train, self.split.test
            ));
        }
        if self.split.train == 0 || self.split.test == 0 {
            return bad("split terms must be positive".into());
        }
        if self.split_repeats == 0 {
            return bad("split_repeats must be >= 1".into());
        }
        if self.group_size == 0 {
            return bad("group_size must be >= 1".into());
        }
        if self.group_size > self.plan.n_images {
            return bad(format!(
                "group_size {} exceeds images per epoch {}",
                self.group_size, self.plan.n_images
            ));
        }
        self.plan.validate()?;
        match self.noise_setting() {
            NoiseSetting::Fixed {
                sigma_current,
                sigma_voltage,
                sigma_level,
                sigma_drift,
            } => NoiseModel {
                sigma_current,
                sigma_voltage,
                sigma_level,
                sigma_drift,
                seed: 0,
            }
            .validate()?,
            NoiseSetting::RelativeGap {
                fraction,
                sigma_level,
                sigma_drift,
            } => {
                if !(fraction >= 0.0 && fraction.is_finite()) {
                    return bad(format!("noise fraction must be >= 0, got {fraction}"));
                }
                NoiseModel {
                    sigma_level,
                    sigma_drift,
                    ..NoiseModel::none(0)
                }
                .validate()?
            }
        }
        if self.task == Task::Sparsity16 {
            if self.scales.is_empty() {
                return bad("sparsity16 needs at least one scale".into());
            }
            for &s in &self.scales {
                if !(s > 0.0 && s <= 1.0) {
                    return bad(format!("sparsity scale {s} outside (0, 1]"));
                }
            }
            let mut sorted = self.scales.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            if sorted.len() != self.scales.len() {
                return bad("duplicate sparsity scales".into());
            }
        }
        Ok(())
    }
}

/// One data-generating source: a catalog entry at one sparsity, and the
/// label its windows carry.
#[derive(Debug, Clone)]
pub struct Source {
    pub arch: ArchitectureSpec,
    pub sparsity: f64,
    pub label: ClassLabel,
}

/// Expands the task into its sources, in a stable order.
pub fn sources(cfg: &ExperimentConfig, zoo: &Zoo) -> Result<Vec<Source>, ExperimentError> {
    let models: Vec<String> = if cfg.models.is_empty() {
        match cfg.task {
            Task::Sparsity16 => SPARSITY16_MODELS.iter().map(|s| s.to_string()).collect(),
            _ => zoo.names().iter().map(|s| s.to_string()).collect(),
        }
    } else {
        cfg.models.clone()
    };
    let mut out = Vec::new();
    for m in &models {
        let family = zoo.family(m);
        let base = zoo.base(m)?;
        match cfg.task {
            Task::Coarse6 => out.push(Source {
                arch: base.clone(),
                sparsity: 1.0,
                label: ClassLabel::coarse(&base.name),
            }),
            Task::Finetune24 => out.extend(family.into_iter().map(|a| Source {
                arch: a.clone(),
                sparsity: 1.0,
                label: ClassLabel::coarse(&a.name),
            })),
            Task::Sparsity16 => out.extend(cfg.scales.iter().map(|&s| Source {
                arch: base.clone(),
                sparsity: s,
                label: ClassLabel::fine(&base.name, s),
            })),
        }
    }
    let mut labels: Vec<&ClassLabel> = out.iter().map(|s| &s.label).collect();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(ExperimentError::Config(format!(
            "task {} needs at least two classes, got {}",
            cfg.task.name(),
            labels.len()
        )));
    }
    Ok(out)
}

/// Features of one noiseless epoch, first window only.
pub fn noiseless_feature(
    source: &Source,
    profile: &DevicePowerProfile,
    cfg: &ExperimentConfig,
) -> Result<FeatureVector, ExperimentError> {
    let arch = profile.prepare(source.arch.clone());
    let trace = synthesize_epoch(
        &arch,
        profile,
        &SparsityConfig::uniform(source.sparsity),
        &NoiseModel::none(0),
        &cfg.plan,
    )?;
    let f = featurize(&trace, &dsp_config(cfg)).map_err(|error| ExperimentError::Dsp {
        source_label: source_label(source),
        error,
    })?;
    f.features.first().copied().ok_or_else(|| {
        ExperimentError::Config(format!(
            "{}: epoch yields no complete window",
            source_label(source)
        ))
    })
}

fn source_label(s: &Source) -> String {
    format!("{} {} @{}", s.arch.name, s.arch.variant, s.sparsity)
}

fn dsp_config(cfg: &ExperimentConfig) -> DspConfig {
    DspConfig {
        group_size: cfg.group_size,
        ..DspConfig::default()
    }
}

/// Smallest |mean power| difference between noiseless windows of sources
/// with different labels.
pub fn min_class_gap(
    sources: &[Source],
    profile: &DevicePowerProfile,
    cfg: &ExperimentConfig,
) -> Result<f64, ExperimentError> {
    let means = sources
        .par_iter()
        .map(|s| noiseless_feature(s, profile, cfg).map(|f| f.p_mea))
        .collect::<Result<Vec<_>, _>>()?;
    let mut gap = f64::INFINITY;
    for i in 0..sources.len() {
        for j in i + 1..sources.len() {
            if sources[i].label != sources[j].label {
                gap = gap.min((means[i] - means[j]).abs());
            }
        }
    }
    Ok(gap)
}

/// The noise actually used, with seed left at 0.
pub fn resolve_noise(
    cfg: &ExperimentConfig,
    sources: &[Source],
    profile: &DevicePowerProfile,
) -> Result<NoiseModel, ExperimentError> {
    Ok(match cfg.noise_setting() {
        NoiseSetting::Fixed {
            sigma_current,
            sigma_voltage,
            sigma_level,
            sigma_drift,
        } => NoiseModel {
            sigma_current,
            sigma_voltage,
            sigma_level,
            sigma_drift,
            seed: 0,
        },
        NoiseSetting::RelativeGap {
            fraction,
            sigma_level,
            sigma_drift,
        } => {
            let gap = min_class_gap(sources, profile, cfg)?;
            NoiseModel {
                sigma_current: fraction * gap / profile.supply_voltage,
                sigma_voltage: 0.0,
                sigma_level,
                sigma_drift,
                seed: 0,
            }
        }
    })
}

/// Synthesizes and featurizes epochs until every class has
/// `windows_per_class` windows. Each (source, epoch) pair draws its own
/// seed, so the result does not depend on scheduling.
pub fn generate_dataset(
    cfg: &ExperimentConfig,
    sources: &[Source],
    profile: &DevicePowerProfile,
    noise: &NoiseModel,
) -> Result<LabeledDataset, ExperimentError> {
    // Sources sharing a label split the window budget.
    let mut per_label: std::collections::BTreeMap<&ClassLabel, Vec<usize>> = Default::default();
    for (i, s) in sources.iter().enumerate() {
        per_label.entry(&s.label).or_default().push(i);
    }
    let mut quota = vec![0usize; sources.len()];
    for members in per_label.values() {
        let n = members.len();
        for (k, &i) in members.iter().enumerate() {
            quota[i] = cfg.windows_per_class / n + usize::from(k < cfg.windows_per_class % n);
        }
    }
    let per_epoch = cfg.plan.n_images / cfg.group_size;
    let tasks: Vec<(usize, usize)> = sources
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..quota[i].div_ceil(per_epoch)).map(move |e| (i, e)))
        .collect();
    let dsp = dsp_config(cfg);
    let chunks = tasks
        .par_iter()
        .map(|&(i, e)| {
            let src = &sources[i];
            let arch = profile.prepare(src.arch.clone());
            let n = NoiseModel {
                seed: derive_seed(cfg.seed, &[STREAM_SYNTH, i as u64, e as u64]),
                ..*noise
            };
            let trace = synthesize_epoch(
                &arch,
                profile,
                &SparsityConfig::uniform(src.sparsity),
                &n,
                &cfg.plan,
            )?;
            let f = featurize(&trace, &dsp).map_err(|error| ExperimentError::Dsp {
                source_label: source_label(src),
                error,
            })?;
            Ok((i, f.features))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut rows = Vec::new();
    let mut have = vec![0usize; sources.len()];
    for (i, feats) in chunks {
        let src = &sources[i];
        for f in feats {
            if have[i] == quota[i] {
                break;
            }
            have[i] += 1;
            rows.push(Row {
                features: f,
                arch: src.label.arch.clone(),
                sparsity: src.sparsity,
            });
        }
    }
    for (i, src) in sources.iter().enumerate() {
        if have[i] < quota[i] {
            log::warn!(
                "{}: {} of {} windows (missed peaks under noise)",
                source_label(src),
                have[i],
                quota[i]
            );
        }
    }
    Ok(LabeledDataset::new(cfg.task.mode(), rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split_seed: u64,
    pub accuracy: f64,
    pub superclass_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub profile: DevicePowerProfile,
    /// Noise used for synthesis (per-epoch seeds derived from the config).
    pub noise: NoiseModel,
    pub n_windows: usize,
    pub splits: Vec<SplitResult>,
    /// Summed over all splits.
    pub confusion: ConfusionMatrix,
}

impl ExperimentResult {
    pub fn accuracies(&self) -> Vec<f64> {
        self.splits.iter().map(|s| s.accuracy).collect()
    }

    pub fn superclass_accuracies(&self) -> Vec<f64> {
        self.splits.iter().map(|s| s.superclass_accuracy).collect()
    }

    pub fn mean_accuracy(&self) -> f64 {
        mean_std(&self.accuracies()).0
    }

    pub fn mean_superclass_accuracy(&self) -> f64 {
        mean_std(&self.superclass_accuracies()).0
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

/// Trains and scores `config.split_repeats` times on fresh splits.
pub fn evaluate_splits(
    cfg: &ExperimentConfig,
    dataset: &LabeledDataset,
) -> Result<(Vec<SplitResult>, ConfusionMatrix), ExperimentError> {
    let mut total: Option<ConfusionMatrix> = None;
    let mut results = Vec::with_capacity(cfg.split_repeats);
    for r in 0..cfg.split_repeats {
        let split_seed = derive_seed(cfg.seed, &[STREAM_SPLIT, r as u64]);
        let (tr, te) = split(dataset, cfg.split, split_seed)?;
        let tc = TrainConfig {
            seed: derive_seed(cfg.seed, &[STREAM_TRAIN, r as u64]),
            ..cfg.classifier
        };
        let model = train(&tr, &tc)?;
        let cm = evaluate(&model, &te)?;
        results.push(SplitResult {
            split_seed,
            accuracy: cm.accuracy(),
            superclass_accuracy: cm.superclass_accuracy(),
        });
        match &mut total {
            None => total = Some(cm),
            Some(t) => {
                for (a, b) in t
                    .counts
                    .iter_mut()
                    .flatten()
                    .zip(cm.counts.iter().flatten())
                {
                    *a += b;
                }
            }
        }
    }
    Ok((results, total.expect("at least one split")))
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    zoo: &Zoo,
    profile: &DevicePowerProfile,
) -> Result<ExperimentResult, ExperimentError> {
    cfg.validate()?;
    profile.validate()?;
    let srcs = sources(cfg, zoo)?;
    let noise = resolve_noise(cfg, &srcs, profile)?;
    log::info!(
        "{}: {} sources, sigma_current {:.3e} A, sigma_level {}",
        cfg.task.name(),
        srcs.len(),
        noise.sigma_current,
        noise.sigma_level
    );
    let dataset = generate_dataset(cfg, &srcs, profile, &noise)?;
    let (splits, confusion) = evaluate_splits(cfg, &dataset)?;
    Ok(ExperimentResult {
        config: cfg.clone(),
        profile: profile.clone(),
        noise,
        n_windows: dataset.len(),
        splits,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_class_counts() {
        let zoo = Zoo::embedded();
        let n_labels = |t| {
            let mut l: Vec<ClassLabel> = sources(&ExperimentConfig::new(t), &zoo)
                .unwrap()
                .into_iter()
                .map(|s| s.label)
                .collect();
            l.sort();
            l.dedup();
            l.len()
        };
        assert_eq!(n_labels(Task::Coarse6), 6);
        assert_eq!(n_labels(Task::Finetune24), 6);
        assert_eq!(n_labels(Task::Sparsity16), 16);
        assert_eq!(
            sources(&ExperimentConfig::new(Task::Finetune24), &zoo)
                .unwrap()
                .len(),
            24
        );
    }

    #[test]
    fn config_json_round_trip_and_schema() {
        let cfg = ExperimentConfig::new(Task::Sparsity16);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let v2 = cfg
            .to_json()
            .replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            ExperimentConfig::from_json(&v2),
            Err(ExperimentError::Config(_))
        ));
        let minimal =
            ExperimentConfig::from_json(r#"{"schema_version": 1, "task": "coarse6"}"#).unwrap();
        assert_eq!(minimal, ExperimentConfig::new(Task::Coarse6));
    }

    #[test]
    fn inconsistent_configs_rejected() {
        let mut cfg = ExperimentConfig::new(Task::Sparsity16);
        cfg.scales = vec![1.0, 1.2];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(Task::Coarse6);
        cfg.windows_per_class = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(Task::Coarse6);
        cfg.models = vec!["Alexnet".into()];
        assert!(matches!(
            sources(&cfg, &Zoo::embedded()),
            Err(ExperimentError::Config(_))
        ));
    }

    #[test]
    fn mean_std_population() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }
}
