//! Synthetic voltage/current traces of DNN inference.
//!
//! Each layer runs for `ops / throughput` seconds at a constant power of
//! `idle + energy / duration`, so one image inference is a staircase of layer
//! levels above the idle floor. The continuous timeline is sampled by
//! averaging power over each sample period, which keeps the sampled energy
//! equal to the model energy even when layers are far shorter than a sample.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{ArchError, ArchitectureSpec};
use crate::dsp::Segment;
use crate::power::{
    layer_energy, DevicePowerProfile, PowerError, SparsityConfig, DEFAULT_SAMPLE_RATE,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error("trace unresolvable at sample rate: inference lasts {duration_s} s, sample period is {period_s} s")]
    Unresolvable { duration_s: f64, period_s: f64 },
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error("invalid epoch plan: {0}")]
    Plan(String),
    #[error("invalid trace: {0}")]
    Trace(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

/// Measurement noise added to the synthesized samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Std-dev of additive Gaussian noise on current samples, amperes.
    pub sigma_current: f64,
    /// Std-dev of additive Gaussian noise on voltage samples, volts.
    pub sigma_voltage: f64,
    /// Relative std-dev of a per-image multiplicative factor on the
    /// above-idle power. Zero keeps energy exact.
    #[serde(default)]
    pub sigma_level: f64,
    /// Relative std-dev of one multiplicative factor on the above-idle
    /// power shared by a whole epoch (supply or thermal drift).
    #[serde(default)]
    pub sigma_drift: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none(seed: u64) -> Self {
        Self {
            sigma_current: 0.0,
            sigma_voltage: 0.0,
            sigma_level: 0.0,
            sigma_drift: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, v) in [
            ("sigma_current", self.sigma_current),
            ("sigma_voltage", self.sigma_voltage),
            ("sigma_level", self.sigma_level),
            ("sigma_drift", self.sigma_drift),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SynthError::Noise(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    /// Calibrated default: 10 mA current noise, 5 mV voltage noise.
    fn default() -> Self {
        Self {
            sigma_current: 0.01,
            sigma_voltage: 0.005,
            sigma_level: 0.0,
            sigma_drift: 0.0,
            seed: 0,
        }
    }
}

/// Layout of one acquisition epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochPlan {
    pub n_images: usize,
    /// Idle lead-in, seconds.
    pub startup_s: f64,
    /// Idle tail, seconds.
    pub cooldown_s: f64,
    /// Idle time between consecutive inferences, seconds.
    pub inter_image_gap_s: f64,
}

impl Default for EpochPlan {
    fn default() -> Self {
        Self {
            n_images: 24,
            startup_s: 5.0,
            cooldown_s: 5.0,
            inter_image_gap_s: 0.1,
        }
    }
}

impl EpochPlan {
    /// One inference with no idle padding.
    pub fn single() -> Self {
        Self {
            n_images: 1,
            startup_s: 0.0,
            cooldown_s: 0.0,
            inter_image_gap_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_images == 0 {
            return Err(SynthError::Plan("n_images must be >= 1".into()));
        }
        for (name, v) in [
            ("startup_s", self.startup_s),
            ("cooldown_s", self.cooldown_s),
            ("inter_image_gap_s", self.inter_image_gap_s),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SynthError::Plan(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceSource {
    #[default]
    Synthetic,
    Hardware,
}

/// Provenance of a trace. Hardware captures carry only `source` and
/// `sample_rate`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    pub source: TraceSource,
    pub sample_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<SparsityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<EpochPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<DevicePowerProfile>,
    /// Sample span of each inference, end exclusive.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub image_spans: Vec<Segment>,
}

impl TraceMeta {
    pub fn hardware(sample_rate: f64) -> Self {
        Self {
            source: TraceSource::Hardware,
            sample_rate,
            ..Self::default()
        }
    }
}

/// Sampled voltage and current at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    pub voltage: Vec<f64>,
    pub current: Vec<f64>,
    pub sample_rate: f64,
    pub meta: Option<TraceMeta>,
}

impl PowerTrace {
    pub fn new(voltage: Vec<f64>, current: Vec<f64>, sample_rate: f64) -> Result<Self, SynthError> {
        let t = Self {
            voltage,
            current,
            sample_rate,
            meta: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.voltage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltage.is_empty()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.voltage.len() != self.current.len() {
            return Err(SynthError::Trace(format!(
                "voltage has {} samples, current has {}",
                self.voltage.len(),
                self.current.len()
            )));
        }
        if self.voltage.is_empty() {
            return Err(SynthError::Trace("trace is empty".into()));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(SynthError::Trace(format!(
                "sample rate {} must be > 0",
                self.sample_rate
            )));
        }
        if let Some(i) = self
            .voltage
            .iter()
            .position(|&u| !(u.is_finite() && u > 0.0))
        {
            return Err(SynthError::Trace(format!(
                "voltage sample {i} is not positive"
            )));
        }
        if let Some(i) = self.current.iter().position(|x| !x.is_finite()) {
            return Err(SynthError::Trace(format!(
                "current sample {i} is not finite"
            )));
        }
        Ok(())
    }

    /// Writes `sample_index,voltage_v,current_a` rows and, when metadata is
    /// present, a sidecar JSON file (see [`meta_path`]).
    pub fn write_csv(&self, path: &Path) -> Result<(), SynthError> {
        let io = |source| SynthError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = fs::File::create(path).map_err(io)?;
        let mut w = BufWriter::new(file);
        writeln!(w, "sample_index,voltage_v,current_a").map_err(io)?;
        for (i, (u, c)) in self.voltage.iter().zip(&self.current).enumerate() {
            writeln!(w, "{i},{u},{c}").map_err(io)?;
        }
        w.flush().map_err(io)?;
        if let Some(meta) = &self.meta {
            let mpath = meta_path(path);
            let text = serde_json::to_string_pretty(meta).expect("meta serializes");
            fs::write(&mpath, text + "\n").map_err(|source| SynthError::Io {
                path: mpath,
                source,
            })?;
        }
        Ok(())
    }

    /// Reads a trace CSV. Without a sidecar the trace is treated as a
    /// hardware capture sampled at `default_rate`.
    pub fn read_csv(path: &Path, default_rate: f64) -> Result<Self, SynthError> {
        let format = |reason: String| SynthError::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(|e| format(e.to_string()))?;
        let headers = rdr.headers().map_err(|e| format(e.to_string()))?.clone();
        let expected = ["sample_index", "voltage_v", "current_a"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
            return Err(format(format!(
                "expected header {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut voltage, mut current) = (Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| format(e.to_string()))?;
            let num = |i: usize| -> Result<f64, SynthError> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| format(format!("row {row}, column {}: {e}", expected[i])))
            };
            voltage.push(num(1)?);
            current.push(num(2)?);
        }
        let mpath = meta_path(path);
        let meta = match fs::read_to_string(&mpath) {
            Ok(text) => {
                serde_json::from_str::<TraceMeta>(&text).map_err(|e| SynthError::Format {
                    path: mpath.clone(),
                    reason: e.to_string(),
                })?
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => TraceMeta::hardware(default_rate),
            Err(source) => {
                return Err(SynthError::Io {
                    path: mpath,
                    source,
                })
            }
        };
        let trace = Self {
            voltage,
            current,
            sample_rate: meta.sample_rate,
            meta: Some(meta),
        };
        trace.validate().map_err(|e| format(e.to_string()))?;
        Ok(trace)
    }
}

/// Sidecar metadata path: `trace.csv` -> `trace.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// A constant above-idle power level held for a duration.
#[derive(Debug, Clone, Copy)]
struct Piece {
    duration_s: f64,
    power_w: f64,
}

/// Per-layer (duration, above-idle power) for one inference.
fn inference_pieces(
    arch: &ArchitectureSpec,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
) -> Result<Vec<Piece>, SynthError> {
    profile.validate()?;
    sparsity.validate()?;
    let mut pieces = Vec::with_capacity(arch.layers.len());
    for (index, layer) in arch.layers.iter().enumerate() {
        let with_index = |e: ArchError| ArchError::Layer {
            index,
            source: Box::new(e),
        };
        let ops = layer
            .op
            .op_count(arch.stride_mode)
            .and_then(|c| c.total())
            .map_err(with_index)?;
        if ops == 0 {
            continue;
        }
        let energy = layer_energy(&layer.op, arch.stride_mode, profile, sparsity)?;
        let duration_s = ops as f64 / profile.throughput;
        pieces.push(Piece {
            duration_s,
            power_w: energy / duration_s,
        });
    }
    let total: f64 = pieces.iter().map(|p| p.duration_s).sum();
    let period = 1.0 / profile.sample_rate;
    if total < period {
        return Err(SynthError::Unresolvable {
            duration_s: total,
            period_s: period,
        });
    }
    Ok(pieces)
}

/// Box-filter sampling of a piecewise-constant timeline. Returns the mean
/// above-idle power of each sample period and the sample span of each piece
/// marked active.
fn sample_timeline(
    pieces: &[(Piece, Option<usize>)],
    rate: f64,
    n_active: usize,
) -> (Vec<f64>, Vec<Segment>) {
    let total: f64 = pieces.iter().map(|(p, _)| p.duration_s).sum::<f64>() * rate;
    let n = ((total - 1e-9).ceil() as usize).max(1);
    let mut bins = vec![0.0; n];
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); n_active];
    let mut x0 = 0.0f64;
    for (piece, tag) in pieces {
        let x1 = x0 + piece.duration_s * rate;
        if let Some(img) = tag {
            let b = &mut bounds[*img];
            b.0 = b.0.min(x0);
            b.1 = b.1.max(x1);
        }
        if piece.power_w != 0.0 {
            let mut k = (x0.floor() as usize).min(n - 1);
            loop {
                let lo = x0.max(k as f64);
                let hi = x1.min((k + 1) as f64);
                if hi > lo {
                    bins[k] += piece.power_w * (hi - lo);
                }
                if (k + 1) as f64 >= x1 || k + 1 >= n {
                    break;
                }
                k += 1;
            }
        }
        x0 = x1;
    }
    let spans = bounds
        .into_iter()
        .map(|(a, b)| Segment {
            start: (a.floor() as usize).min(n - 1),
            end: ((b - 1e-9).ceil() as usize).clamp(1, n),
        })
        .collect();
    (bins, spans)
}

/// One epoch: idle lead-in, `plan.n_images` inferences separated by idle
/// gaps, idle tail.
pub fn synthesize_epoch(
    arch: &ArchitectureSpec,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
    noise: &NoiseModel,
    plan: &EpochPlan,
) -> Result<PowerTrace, SynthError> {
    noise.validate()?;
    plan.validate()?;
    let image = inference_pieces(arch, profile, sparsity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    let idle = |d: f64| {
        (
            Piece {
                duration_s: d,
                power_w: 0.0,
            },
            None,
        )
    };
    let drift = 1.0 + noise.sigma_drift * normal();
    let mut timeline = Vec::with_capacity(plan.n_images * (image.len() + 1) + 2);
    timeline.push(idle(plan.startup_s));
    for img in 0..plan.n_images {
        if img > 0 {
            timeline.push(idle(plan.inter_image_gap_s));
        }
        // Floor keeps the level strictly above idle.
        let factor = (drift + noise.sigma_level * normal()).max(0.05);
        for p in &image {
            let scaled = Piece {
                duration_s: p.duration_s,
                power_w: p.power_w * factor,
            };
            timeline.push((scaled, Some(img)));
        }
    }
    timeline.push(idle(plan.cooldown_s));

    let (above, spans) = sample_timeline(&timeline, profile.sample_rate, plan.n_images);
    let v_nom = profile.supply_voltage;
    let mut voltage = Vec::with_capacity(above.len());
    let mut current = Vec::with_capacity(above.len());
    for a in above {
        let u = (v_nom + noise.sigma_voltage * normal()).max(1e-6 * v_nom);
        let i = (profile.idle_power + a) / v_nom + noise.sigma_current * normal();
        voltage.push(u);
        current.push(i);
    }
    let meta = TraceMeta {
        source: TraceSource::Synthetic,
        sample_rate: profile.sample_rate,
        arch: Some(arch.name.clone()),
        variant: Some(arch.variant.clone()),
        sparsity: Some(*sparsity),
        noise: Some(*noise),
        plan: Some(*plan),
        profile: Some(profile.clone()),
        image_spans: spans,
    };
    Ok(PowerTrace {
        voltage,
        current,
        sample_rate: profile.sample_rate,
        meta: Some(meta),
    })
}

/// A single inference with no idle padding.
pub fn synthesize_image_inference(
    arch: &ArchitectureSpec,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
    noise: &NoiseModel,
) -> Result<PowerTrace, SynthError> {
    synthesize_epoch(arch, profile, sparsity, noise, &EpochPlan::single())
}

/// Energy above `idle_power` in joules: `sum(max(u*i - idle, 0)) / rate`.
pub fn trace_energy(trace: &PowerTrace, idle_power: f64) -> f64 {
    trace
        .voltage
        .iter()
        .zip(&trace.current)
        .map(|(u, i)| (u * i - idle_power).max(0.0))
        .sum::<f64>()
        / trace.sample_rate
}

/// Default sample rate for traces read without metadata.
pub const HARDWARE_SAMPLE_RATE: f64 = DEFAULT_SAMPLE_RATE;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{ConvLayer, FcLayer};
    use crate::power::arch_energy;
    use approx::assert_relative_eq;

    fn two_layer() -> ArchitectureSpec {
        ArchitectureSpec::new(
            "t",
            "v",
            vec![
                ConvLayer::new(3, 8, 8, 2, 4, 3).into(),
                FcLayer::new(3, 5).into(),
            ],
        )
    }

    #[test]
    fn constant_power_single_layer() {
        // FC{1,1}: 2 ops at 2 ops/s lasts 1 s, 2 J over 1 s.
        let arch = ArchitectureSpec::new("t", "v", vec![FcLayer::new(1, 1).into()]);
        let profile = DevicePowerProfile {
            p_m: 1.0,
            p_a: 1.0,
            throughput: 2.0,
            ..DevicePowerProfile::default()
        };
        let t = synthesize_image_inference(
            &arch,
            &profile,
            &SparsityConfig::default(),
            &NoiseModel::none(1),
        )
        .unwrap();
        assert_eq!(t.len(), 400);
        for (u, i) in t.voltage.iter().zip(&t.current) {
            assert_relative_eq!(u * i, profile.idle_power + 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn staircase_conserves_energy() {
        let arch = two_layer();
        // 3486 ops lasting 0.5 s at 400 Hz
        let profile = DevicePowerProfile {
            throughput: 3486.0 / 0.5,
            ..DevicePowerProfile::default()
        };
        let s = SparsityConfig::default();
        let t = synthesize_image_inference(&arch, &profile, &s, &NoiseModel::none(0)).unwrap();
        let model = arch_energy(&arch, &profile, &s).unwrap().total;
        assert_relative_eq!(model, 5.229e-6, max_relative = 1e-12);
        let measured = trace_energy(&t, profile.idle_power);
        assert!(
            ((measured - model) / model).abs() < 0.01,
            "{measured} vs {model}"
        );
        let busy = t
            .voltage
            .iter()
            .zip(&t.current)
            .filter(|(u, i)| *u * *i > profile.idle_power * (1.0 + 1e-9))
            .count();
        assert_eq!(busy, 200);
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let arch = two_layer();
        let profile = DevicePowerProfile {
            throughput: 3486.0,
            ..DevicePowerProfile::default()
        };
        let noise = NoiseModel {
            sigma_current: 0.05,
            sigma_voltage: 0.01,
            sigma_level: 0.1,
            sigma_drift: 0.05,
            seed: 42,
        };
        let s = SparsityConfig::default();
        let a = synthesize_image_inference(&arch, &profile, &s, &noise).unwrap();
        let b = synthesize_image_inference(&arch, &profile, &s, &noise).unwrap();
        assert_eq!(a, b);
        let c = synthesize_image_inference(&arch, &profile, &s, &NoiseModel { seed: 43, ..noise })
            .unwrap();
        assert_ne!(a.current, c.current);
    }

    #[test]
    fn too_short_is_unresolvable() {
        let arch = ArchitectureSpec::new("t", "v", vec![FcLayer::new(1, 1).into()]);
        let r = synthesize_image_inference(
            &arch,
            &DevicePowerProfile::default(),
            &SparsityConfig::default(),
            &NoiseModel::none(0),
        );
        assert!(matches!(r, Err(SynthError::Unresolvable { .. })));
    }

    #[test]
    fn single_image_plan_is_image_inference() {
        let arch = two_layer();
        let profile = DevicePowerProfile {
            throughput: 3486.0 / 0.3,
            ..DevicePowerProfile::default()
        };
        let noise = NoiseModel::default();
        let s = SparsityConfig::uniform(0.6);
        let a = synthesize_image_inference(&arch, &profile, &s, &noise).unwrap();
        let b = synthesize_epoch(&arch, &profile, &s, &noise, &EpochPlan::single()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epoch_repeats_image_energy() {
        let arch = two_layer();
        let profile = DevicePowerProfile {
            throughput: 3486.0 / 0.37,
            ..DevicePowerProfile::default()
        };
        let s = SparsityConfig::default();
        let quiet = NoiseModel::none(3);
        let one = trace_energy(
            &synthesize_image_inference(&arch, &profile, &s, &quiet).unwrap(),
            2.0,
        );
        let plan = EpochPlan {
            n_images: 24,
            startup_s: 1.0,
            cooldown_s: 1.0,
            inter_image_gap_s: 0.1,
        };
        let epoch = synthesize_epoch(&arch, &profile, &s, &quiet, &plan).unwrap();
        assert_relative_eq!(trace_energy(&epoch, 2.0), 24.0 * one, max_relative = 0.01);
        let spans = &epoch.meta.as_ref().unwrap().image_spans;
        assert_eq!(spans.len(), 24);
        assert_eq!(spans[0].start, 400);
        assert!(spans.windows(2).all(|w| w[0].end <= w[1].start));
    }

    #[test]
    fn trace_energy_examples() {
        let t = PowerTrace::new(vec![5.0; 400], vec![0.4; 400], 400.0).unwrap();
        assert_eq!(trace_energy(&t, 2.0), 0.0);
        let t = PowerTrace::new(vec![5.0; 400], vec![0.6; 400], 400.0).unwrap();
        assert_relative_eq!(trace_energy(&t, 2.0), 1.0, max_relative = 1e-12);
        let t = PowerTrace::new(vec![5.0; 40], vec![0.3; 40], 400.0).unwrap();
        assert_eq!(trace_energy(&t, 2.0), 0.0);
    }

    #[test]
    fn invalid_traces() {
        assert!(PowerTrace::new(vec![1.0], vec![], 400.0).is_err());
        assert!(PowerTrace::new(vec![], vec![], 400.0).is_err());
        assert!(PowerTrace::new(vec![0.0], vec![1.0], 400.0).is_err());
        assert!(PowerTrace::new(vec![1.0], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn csv_round_trip_with_and_without_meta() {
        let dir = tempfile::tempdir().unwrap();
        let arch = two_layer();
        let profile = DevicePowerProfile {
            throughput: 3486.0 / 0.2,
            ..DevicePowerProfile::default()
        };
        let t = synthesize_image_inference(
            &arch,
            &profile,
            &SparsityConfig::default(),
            &NoiseModel::default(),
        )
        .unwrap();
        let path = dir.path().join("trace.csv");
        t.write_csv(&path).unwrap();
        assert!(dir.path().join("trace.meta.json").exists());
        let back = PowerTrace::read_csv(&path, 400.0).unwrap();
        assert_eq!(back, t);

        let hw = dir.path().join("capture.csv");
        fs::write(
            &hw,
            "sample_index,voltage_v,current_a\n0,5,0.4\n1,5.01,0.9\n",
        )
        .unwrap();
        let back = PowerTrace::read_csv(&hw, 1000.0).unwrap();
        assert_eq!(back.meta.unwrap().source, TraceSource::Hardware);
        assert_eq!(back.sample_rate, 1000.0);
        assert_eq!(back.current, vec![0.4, 0.9]);

        fs::write(&hw, "t,u,i\n0,5,0.4\n").unwrap();
        assert!(matches!(
            PowerTrace::read_csv(&hw, 400.0),
            Err(SynthError::Format { .. })
        ));
    }
}
