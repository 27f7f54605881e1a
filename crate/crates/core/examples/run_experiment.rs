//! A reduced coarse-6 experiment written as a report bundle.
//!
//!     cargo run --release --example run_experiment -- /tmp/coarse6

use std::path::PathBuf;

use dnnsca::arch::zoo::Zoo;
use dnnsca::experiment::{run_experiment, ExperimentConfig, Task};
use dnnsca::power::DevicePowerProfile;
use dnnsca::report::{summary, write_bundle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dnnsca_coarse6"));
    let mut cfg = ExperimentConfig::new(Task::Coarse6);
    cfg.windows_per_class = 40;
    cfg.split_repeats = 3;

    let result = run_experiment(&cfg, &Zoo::embedded(), &DevicePowerProfile::default())?;
    print!("{}", summary(&result));
    for p in write_bundle(&result, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
