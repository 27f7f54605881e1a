//! Per-operation energy model: operation counts times device costs, with
//! sparsity scaling of convolution and fully connected layers.
//!
//! Costs are joules per operation, so every function here returns the energy
//! of one inference pass. Instantaneous power only appears once the synth
//! module spreads that energy over a duration.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{
    ActivationLayer, AlphaTable, ArchError, ArchitectureSpec, ConvLayer, FcLayer, LayerOp,
    PoolLayer, StrideMode,
};

#[derive(Debug, Error)]
pub enum PowerError {
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error("invalid device profile: {0}")]
    Profile(String),
    #[error("invalid sparsity: {0}")]
    Sparsity(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Default acquisition rate of the measurement card, in hertz.
pub const DEFAULT_SAMPLE_RATE: f64 = 400.0;

fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE
}

/// Energy costs and electrical characteristics of the target device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevicePowerProfile {
    /// Joules per multiplication.
    pub p_m: f64,
    /// Joules per addition.
    pub p_a: f64,
    /// Joules per comparison.
    pub p_c: f64,
    /// Joules per activation operation.
    pub p_ac: f64,
    /// Baseline draw in watts.
    pub idle_power: f64,
    /// Volts.
    pub supply_voltage: f64,
    /// Operations per second.
    pub throughput: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    /// Overrides the activation coefficients of architectures run on this device.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_alpha: Option<AlphaTable>,
}

impl Default for DevicePowerProfile {
    /// Calibration values: a default-profile Alexnet inference takes about
    /// 0.54 s at 400 Hz sampling.
    fn default() -> Self {
        Self {
            p_m: 2e-9,
            p_a: 1e-9,
            p_c: 1e-9,
            p_ac: 1e-9,
            idle_power: 2.0,
            supply_voltage: 5.0,
            throughput: DEFAULT_THROUGHPUT,
            sample_rate: DEFAULT_SAMPLE_RATE,
            activation_alpha: None,
        }
    }
}

/// Operations per second of the default profile.
pub const DEFAULT_THROUGHPUT: f64 = 4.7e9;

impl DevicePowerProfile {
    pub fn validate(&self) -> Result<(), PowerError> {
        let positive = [
            ("p_m", self.p_m),
            ("p_a", self.p_a),
            ("p_c", self.p_c),
            ("p_ac", self.p_ac),
            ("supply_voltage", self.supply_voltage),
            ("throughput", self.throughput),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(PowerError::Profile(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.idle_power.is_finite() && self.idle_power >= 0.0) {
            return Err(PowerError::Profile(format!(
                "idle_power must be >= 0, got {}",
                self.idle_power
            )));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, PowerError> {
        let p: Self = serde_json::from_str(s).map_err(|e| PowerError::Profile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Applies [`Self::activation_alpha`] to `arch` when set.
    pub fn prepare(&self, arch: ArchitectureSpec) -> ArchitectureSpec {
        match &self.activation_alpha {
            Some(t) => arch.with_alpha_table(t),
            None => arch,
        }
    }
}

/// Pruning coefficients: `lambda1` scales every convolution, `lambda2`
/// every fully connected layer. `1.0` means unpruned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityConfig {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for SparsityConfig {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl SparsityConfig {
    pub fn uniform(lambda: f64) -> Self {
        Self {
            lambda1: lambda,
            lambda2: lambda,
        }
    }

    pub fn validate(&self) -> Result<(), PowerError> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(PowerError::Sparsity(format!(
                    "{name} must be in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub fn conv_energy(
    layer: &ConvLayer,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
) -> Result<f64, PowerError> {
    conv_energy_with(layer, StrideMode::Strict, profile, sparsity)
}

fn conv_energy_with(
    layer: &ConvLayer,
    mode: StrideMode,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
) -> Result<f64, PowerError> {
    let ops = layer.op_count(mode)?;
    Ok(sparsity.lambda1 * (profile.p_m * ops.mul as f64 + profile.p_a * ops.add as f64))
}

/// Pooling is not affected by pruning.
pub fn pool_energy(layer: &PoolLayer, profile: &DevicePowerProfile) -> Result<f64, PowerError> {
    pool_energy_with(layer, StrideMode::Strict, profile)
}

fn pool_energy_with(
    layer: &PoolLayer,
    mode: StrideMode,
    profile: &DevicePowerProfile,
) -> Result<f64, PowerError> {
    Ok(profile.p_c * layer.op_count(mode)?.cmp as f64)
}

pub fn fc_energy(
    layer: &FcLayer,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
) -> Result<f64, PowerError> {
    let ops = layer.op_count()?;
    Ok(sparsity.lambda2 * (profile.p_m * ops.mul as f64 + profile.p_a * ops.add as f64))
}

/// Activation energy is left unscaled by sparsity.
pub fn act_energy(
    layer: &ActivationLayer,
    profile: &DevicePowerProfile,
) -> Result<f64, PowerError> {
    act_energy_with(layer, StrideMode::Strict, profile)
}

fn act_energy_with(
    layer: &ActivationLayer,
    mode: StrideMode,
    profile: &DevicePowerProfile,
) -> Result<f64, PowerError> {
    Ok(profile.p_ac * layer.op_count(mode)?.act as f64)
}

/// Energy of a single layer under the given stride mode.
pub fn layer_energy(
    op: &LayerOp,
    mode: StrideMode,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
) -> Result<f64, PowerError> {
    match op {
        LayerOp::Conv(l) => conv_energy_with(l, mode, profile, sparsity),
        LayerOp::Pool(l) => pool_energy_with(l, mode, profile),
        LayerOp::Fc(l) => fc_energy(l, profile, sparsity),
        LayerOp::Activation(l) => act_energy_with(l, mode, profile),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerEnergy {
    pub index: usize,
    pub kind: String,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub per_layer: Vec<LayerEnergy>,
    /// Joules; the sum of `per_layer`.
    pub total: f64,
}

impl EnergyBreakdown {
    /// `layer_index,kind,energy_joules` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), PowerError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["layer_index", "kind", "energy_joules"])?;
        for e in &self.per_layer {
            w.write_record([e.index.to_string(), e.kind.clone(), e.energy.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Energy of one inference pass over `arch`, layer by layer.
pub fn arch_energy(
    arch: &ArchitectureSpec,
    profile: &DevicePowerProfile,
    sparsity: &SparsityConfig,
) -> Result<EnergyBreakdown, PowerError> {
    profile.validate()?;
    sparsity.validate()?;
    let mut per_layer = Vec::with_capacity(arch.layers.len());
    for (index, layer) in arch.layers.iter().enumerate() {
        let energy =
            layer_energy(&layer.op, arch.stride_mode, profile, sparsity).map_err(|e| match e {
                PowerError::Arch(a) => PowerError::Arch(ArchError::Layer {
                    index,
                    source: Box::new(a),
                }),
                other => other,
            })?;
        per_layer.push(LayerEnergy {
            index,
            kind: layer.op.kind_name().to_string(),
            energy,
        });
    }
    let total = per_layer.iter().map(|e| e.energy).sum();
    Ok(EnergyBreakdown { per_layer, total })
}
