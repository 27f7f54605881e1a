//! Power side-channel fingerprinting of DNN accelerators: operation counts,
//! an energy model, synthetic traces, peak segmentation, and classifiers
//! that recover the architecture from power features.

pub mod arch;
pub mod cli;
pub mod dsp;
pub mod experiment;
pub mod learn;
pub mod power;
pub mod report;
pub mod synth;

/// Mixes `parts` into `seed` so that independent streams never share state.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(seed), |acc, &p| {
        mix(acc ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15))
    })
}
