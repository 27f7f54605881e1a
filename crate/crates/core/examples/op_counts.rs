//! Operation counts of hand-built layers and a tiny network.

use dnnsca::arch::{
    arch_op_counts, ActivationKind, ActivationLayer, AlphaTable, ArchitectureSpec, ConvLayer,
    FcLayer, PoolLayer, StrideMode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let conv = ConvLayer::new(3, 224, 224, 4, 96, 11);
    println!("conv 11x11/4: {:?}", conv.op_count(StrideMode::Strict)?);

    // 7 is not divisible by 2: strict mode refuses, permissive floors
    let odd = ConvLayer::new(8, 7, 7, 2, 8, 3);
    println!("strict:     {:?}", odd.op_count(StrideMode::Strict).err());
    println!("permissive: {:?}", odd.op_count(StrideMode::Permissive)?);

    let net = ArchitectureSpec::new(
        "tiny",
        "demo",
        vec![
            ConvLayer::new(3, 32, 32, 1, 16, 3).into(),
            ActivationLayer::new(ActivationKind::Relu, 16, 32, 32, &AlphaTable::default()).into(),
            PoolLayer::new(16, 32, 32, 2, 2).into(),
            FcLayer::new(16 * 16 * 16, 10).into(),
        ],
    );
    let counts = arch_op_counts(&net)?;
    for (i, c) in &counts.per_layer {
        println!("layer {i}: {c:?}");
    }
    println!("total ops: {}", counts.totals.total()?);
    Ok(())
}
