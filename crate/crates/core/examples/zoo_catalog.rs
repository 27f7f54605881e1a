//! Prints every catalog entry with its per-kind operation totals.
//!
//!     cargo run --example zoo_catalog

use dnnsca::arch::arch_op_counts;
use dnnsca::arch::zoo::Zoo;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // DNNSCA_ZOO_DIR points this at a directory of JSON files instead
    let zoo = Zoo::from_env()?;
    println!(
        "{:12} {:16} {:>6} {:>14} {:>12} {:>12}",
        "model", "variant", "layers", "mul", "cmp", "act"
    );
    for arch in zoo.entries() {
        let t = arch_op_counts(arch)?.totals;
        println!(
            "{:12} {:16} {:>6} {:>14} {:>12} {:>12}",
            arch.name,
            arch.variant,
            arch.layers.len(),
            t.mul,
            t.cmp,
            t.act
        );
    }
    Ok(())
}
