//! Per-layer energy of AlexNet and how it falls with sparsity.

use dnnsca::arch::zoo::Zoo;
use dnnsca::power::{arch_energy, DevicePowerProfile, SparsityConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let zoo = Zoo::embedded();
    let alexnet = zoo.base("Alexnet")?;
    let profile = DevicePowerProfile::default();

    let dense = arch_energy(alexnet, &profile, &SparsityConfig::default())?;
    dense.write_csv(std::io::stdout().lock())?;

    for lambda in [1.0, 0.8, 0.6, 0.4] {
        let e = arch_energy(alexnet, &profile, &SparsityConfig::uniform(lambda))?;
        println!("lambda={lambda:.1}  {:.4} J per image", e.total);
    }
    // pruning only the classifier head barely matters
    let head = SparsityConfig {
        lambda1: 1.0,
        lambda2: 0.4,
    };
    println!(
        "fc-only 0.4: {:.4} J",
        arch_energy(alexnet, &profile, &head)?.total
    );
    Ok(())
}
