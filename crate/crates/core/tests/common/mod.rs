//! Loop-enumeration oracles and layer strategies shared by the test targets.

#![allow(dead_code)]

use dnnsca::arch::{ConvLayer, FcLayer, OpCount, PoolLayer};
use proptest::prelude::*;

/// Visits every output position, kernel and kernel tap; one multiply and
/// one add per tap, no separate bias add.
pub fn conv_oracle(l: &ConvLayer) -> OpCount {
    let mut c = OpCount::default();
    let group_in = l.c / l.groups;
    for _n in 0..l.n {
        for _y in (0..l.l).step_by(l.s as usize) {
            for _x in (0..l.w).step_by(l.s as usize) {
                for _ch in 0..group_in {
                    for _ky in 0..l.f {
                        for _kx in 0..l.kernel_width() {
                            c.mul += 1;
                            c.add += 1;
                        }
                    }
                }
            }
        }
    }
    c
}

/// One comparison per element of every pooling window.
pub fn pool_oracle(l: &PoolLayer) -> OpCount {
    let mut c = OpCount::default();
    for _ch in 0..l.c {
        for _y in (0..l.l).step_by(l.s as usize) {
            for _x in (0..l.w).step_by(l.s as usize) {
                for _ky in 0..l.f {
                    for _kx in 0..l.f {
                        c.cmp += 1;
                    }
                }
            }
        }
    }
    c
}

/// One multiply-add per (input, output) neuron pair.
pub fn fc_oracle(l: &FcLayer) -> OpCount {
    let mut c = OpCount::default();
    for _i in 0..l.x {
        for _o in 0..l.y {
            c.mul += 1;
            c.add += 1;
        }
    }
    c
}

/// Integral alpha: alpha ops per element.
pub fn act_oracle(c: u64, l: u64, w: u64, alpha: u64) -> OpCount {
    let mut out = OpCount::default();
    for _ in 0..c * l * w {
        out.act += alpha;
    }
    out
}

/// (s, l, w) with s dividing both sides, sides at most 32.
pub fn grid() -> impl Strategy<Value = (u64, u64, u64)> {
    (1u64..=4).prop_flat_map(|s| {
        (
            Just(s),
            (1..=32 / s).prop_map(move |k| k * s),
            (1..=32 / s).prop_map(move |k| k * s),
        )
    })
}

pub fn conv_layer() -> impl Strategy<Value = ConvLayer> {
    (grid(), 1u64..=8, 1u64..=8).prop_flat_map(|((s, l, w), c, n)| {
        (1..=l.min(w).min(7)).prop_map(move |f| ConvLayer::new(c, l, w, s, n, f))
    })
}

pub fn pool_layer() -> impl Strategy<Value = PoolLayer> {
    (grid(), 1u64..=8).prop_flat_map(|((s, l, w), c)| {
        (1..=l.min(w).min(5)).prop_map(move |f| PoolLayer::new(c, l, w, s, f))
    })
}
