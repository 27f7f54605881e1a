//! Runs the measurement pipeline on one epoch: power, peaks, five-image
//! windows, (mean, median, std) features.

use dnnsca::arch::zoo::Zoo;
use dnnsca::dsp::{
    compute_power, estimate_threshold, featurize, DetectorConfig, DspConfig, IdleEstimate,
};
use dnnsca::power::{DevicePowerProfile, SparsityConfig};
use dnnsca::synth::{synthesize_epoch, EpochPlan, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let zoo = Zoo::embedded();
    let profile = DevicePowerProfile::default();
    let trace = synthesize_epoch(
        zoo.base("Alexnet")?,
        &profile,
        &SparsityConfig::default(),
        &NoiseModel {
            seed: 1,
            ..NoiseModel::default()
        },
        &EpochPlan::default(),
    )?;

    let series = compute_power(&trace)?;
    let th = estimate_threshold(&series, IdleEstimate::Auto, &DetectorConfig::default());
    println!("idle {:.3} W, threshold {:.3} W", th.idle, th.level());

    let out = featurize(&trace, &DspConfig::default())?;
    println!("{} peaks", out.peaks.len());
    for (i, f) in out.features.iter().enumerate() {
        println!(
            "window {i}: mean {:.4}  median {:.4}  std {:.4}",
            f.p_mea, f.p_mid, f.p_std
        );
    }
    Ok(())
}
