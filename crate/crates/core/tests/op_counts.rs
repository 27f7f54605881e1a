//! Analytic operation counts against loop-enumeration oracles.

use dnnsca::arch::zoo::Zoo;
use dnnsca::arch::{
    act_op_count, arch_op_counts, conv_op_count, fc_op_count, pool_op_count, validate_arch,
    ActivationLayer, ArchitectureSpec, ConvLayer, FcLayer, Layer, LayerOp, OpCount, PoolLayer,
    StrideMode,
};
use proptest::prelude::*;

mod common;
use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn conv_matches_oracle(layer in conv_layer()) {
        prop_assert_eq!(conv_op_count(&layer).unwrap(), conv_oracle(&layer));
    }

    #[test]
    fn grouped_rectangular_conv_matches_oracle(
        layer in conv_layer(),
        g in 1u64..=8,
        fw in 1u64..=7,
    ) {
        let mut layer = layer;
        let g = (1..=g).rev().find(|d| layer.c % d == 0 && layer.n % d == 0).unwrap();
        layer.groups = g;
        layer.fw = Some(fw.min(layer.w));
        prop_assert_eq!(layer.op_count(StrideMode::Strict).unwrap(), conv_oracle(&layer));
    }

    #[test]
    fn pool_matches_oracle(layer in pool_layer()) {
        prop_assert_eq!(pool_op_count(&layer).unwrap(), pool_oracle(&layer));
    }

    #[test]
    fn fc_matches_oracle(x in 1u64..=256, y in 1u64..=256) {
        let layer = FcLayer::new(x, y);
        prop_assert_eq!(fc_op_count(&layer).unwrap(), fc_oracle(&layer));
    }

    #[test]
    fn activation_matches_oracle(c in 1u64..=8, l in 1u64..=32, w in 1u64..=32, alpha in 0u64..=4) {
        let layer = ActivationLayer::other(c, l, w, alpha as f64);
        prop_assert_eq!(act_op_count(&layer).unwrap(), act_oracle(c, l, w, alpha));
    }

    #[test]
    fn conv_monotone(layer in conv_layer()) {
        let base = conv_op_count(&layer).unwrap().mul;
        for grown in [
            ConvLayer { c: layer.c + 1, ..layer },
            ConvLayer { n: layer.n + 1, ..layer },
        ] {
            prop_assert!(conv_op_count(&grown).unwrap().mul >= base);
        }
        if layer.f < layer.l.min(layer.w) {
            let taller = ConvLayer { f: layer.f + 1, ..layer };
            prop_assert!(conv_op_count(&taller).unwrap().mul >= base);
        }
        // doubling the stride on a grid it divides
        let wider = ConvLayer { s: layer.s * 2, l: layer.l * 2, w: layer.w * 2, ..layer };
        let same_grid = ConvLayer { l: layer.l * 2, w: layer.w * 2, ..layer };
        prop_assert!(conv_op_count(&wider).unwrap().mul <= conv_op_count(&same_grid).unwrap().mul);
    }

    #[test]
    fn totals_are_fieldwise_sums_in_any_order(
        convs in prop::collection::vec(conv_layer(), 1..4),
        pools in prop::collection::vec(pool_layer(), 0..3),
        rotate in 0usize..8,
    ) {
        // branch layers skip the shape chain, so any order is valid
        let mut layers: Vec<Layer> = convs.iter().map(|c| Layer { op: LayerOp::Conv(*c), branch: true })
            .chain(pools.iter().map(|p| Layer { op: LayerOp::Pool(*p), branch: true }))
            .collect();
        let n = layers.len();
        layers.rotate_left(rotate % n);
        let arch = ArchitectureSpec::new("p", "v", layers);
        let counts = arch_op_counts(&arch).unwrap();
        let mut sum = OpCount::default();
        for (_, c) in &counts.per_layer {
            sum = sum.checked_add(c).unwrap();
        }
        prop_assert_eq!(counts.totals, sum);
        let direct: u64 = convs.iter().map(|c| conv_oracle(c).mul).sum();
        prop_assert_eq!(counts.totals.mul, direct);
        let cmp: u64 = pools.iter().map(|p| pool_oracle(p).cmp).sum();
        prop_assert_eq!(counts.totals.cmp, cmp);
    }
}

#[test]
fn hand_examples() {
    assert_eq!(conv_oracle(&ConvLayer::new(3, 8, 8, 2, 4, 3)).mul, 1728);
    assert_eq!(
        conv_oracle(&ConvLayer::new(3, 224, 224, 4, 96, 11)).mul,
        109_283_328
    );
    assert_eq!(pool_oracle(&PoolLayer::new(96, 56, 56, 2, 3)).cmp, 677_376);
    assert_eq!(fc_oracle(&FcLayer::new(4096, 1000)).add, 4_096_000);
}

#[test]
fn every_zoo_entry_validates() {
    let zoo = Zoo::embedded();
    assert_eq!(zoo.len(), 24);
    for arch in zoo.entries() {
        let v = validate_arch(arch);
        assert!(v.is_valid(), "{}: {:?}", arch.label(), v.errors);
    }
}
