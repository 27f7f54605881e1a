//! End to end: train on labeled epochs, then name the model behind an
//! unseen trace by majority vote over its windows.

use dnnsca::arch::zoo::Zoo;
use dnnsca::dsp::{featurize, DspConfig};
use dnnsca::learn::{predict, train, LabeledDataset, Row, TaskMode, TrainConfig};
use dnnsca::power::{DevicePowerProfile, SparsityConfig};
use dnnsca::synth::{synthesize_epoch, EpochPlan, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let zoo = Zoo::embedded();
    let profile = DevicePowerProfile::default();
    let plan = EpochPlan::default();
    let dsp = DspConfig::default();
    let noise = |seed| NoiseModel {
        seed,
        ..NoiseModel::default()
    };

    let mut rows = Vec::new();
    for (i, name) in zoo.names().into_iter().enumerate() {
        for e in 0..3 {
            let t = synthesize_epoch(
                zoo.base(name)?,
                &profile,
                &SparsityConfig::default(),
                &noise(100 * i as u64 + e),
                &plan,
            )?;
            for f in featurize(&t, &dsp)?.features {
                rows.push(Row {
                    features: f,
                    arch: name.to_string(),
                    sparsity: 1.0,
                });
            }
        }
    }
    let model = train(
        &LabeledDataset::new(TaskMode::Coarse, rows)?,
        &TrainConfig::default(),
    )?;

    let victim = synthesize_epoch(
        zoo.base("MobilenetV1")?,
        &profile,
        &SparsityConfig::default(),
        &noise(9999),
        &plan,
    )?;
    for f in featurize(&victim, &dsp)?.features {
        println!("{:?}", predict(&model, &f));
    }
    Ok(())
}
