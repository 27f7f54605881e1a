//! Synthesizes a 24-image epoch and writes it as trace CSV plus sidecar.
//!
//!     cargo run --example synthesize_epoch -- /tmp/resnet50.csv

use std::path::PathBuf;

use dnnsca::arch::zoo::Zoo;
use dnnsca::power::{arch_energy, DevicePowerProfile, SparsityConfig};
use dnnsca::synth::{synthesize_epoch, trace_energy, EpochPlan, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("resnet50_epoch.csv"));
    let zoo = Zoo::embedded();
    let arch = zoo.base("Resnet50")?;
    let profile = DevicePowerProfile::default();
    let sparsity = SparsityConfig::default();
    let plan = EpochPlan::default();

    let clean = synthesize_epoch(arch, &profile, &sparsity, &NoiseModel::none(0), &plan)?;
    let per_image = arch_energy(arch, &profile, &sparsity)?.total;
    println!(
        "{} samples ({:.1} s); energy above idle {:.3} J vs {:.3} J expected",
        clean.len(),
        clean.len() as f64 / clean.sample_rate,
        trace_energy(&clean, profile.idle_power),
        per_image * plan.n_images as f64
    );

    let noisy = synthesize_epoch(
        arch,
        &profile,
        &sparsity,
        &NoiseModel {
            seed: 7,
            ..NoiseModel::default()
        },
        &plan,
    )?;
    noisy.write_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
