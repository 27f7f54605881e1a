//! One-vs-rest linear soft-margin classifiers trained by stochastic
//! subgradient descent on the regularized hinge loss, with step size
//! `1 / (lambda * t)` and averaging over the second half of the iterates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Regularization strength.
    pub lambda: f64,
    /// Passes over the training set per binary classifier.
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-6,
            epochs: 1000,
        }
    }
}

/// Weight vector with the bias as a fourth component on a constant input.
type Augmented = [f64; 4];

fn dot(w: &Augmented, x: &[f64; 3]) -> f64 {
    w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + w[3]
}

/// `lambda/2 * (|w|^2 + b^2) + mean(max(0, 1 - y (w.x + b)))`.
pub fn hinge_objective(w: &[f64; 3], b: f64, x: &[[f64; 3]], y: &[f64], lambda: f64) -> f64 {
    let aug = [w[0], w[1], w[2], b];
    let reg = 0.5 * lambda * aug.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (1.0 - yi * dot(&aug, xi)).max(0.0))
        .sum();
    reg + loss / x.len() as f64
}

/// Binary classifier for labels in {-1, +1}; returns the suffix-averaged
/// iterate.
pub(crate) fn train_binary(
    x: &[[f64; 3]],
    y: &[f64],
    params: &SvmParams,
    seed: u64,
) -> ([f64; 3], f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Augmented = [0.0; 4];
    let mut avg: Augmented = [0.0; 4];
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t = 0u64;
    let total = (params.epochs * x.len()) as u64;
    // average the second half only; early iterates are far off
    let burn_in = total / 2;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64);
            let margin = y[i] * dot(&w, &x[i]);
            let shrink = 1.0 - eta * params.lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                let step = eta * y[i];
                for j in 0..3 {
                    w[j] += step * x[i][j];
                }
                w[3] += step;
            }
            if t <= burn_in {
                continue;
            }
            let inv = 1.0 / (t - burn_in) as f64;
            for j in 0..4 {
                avg[j] += (w[j] - avg[j]) * inv;
            }
        }
    }
    ([avg[0], avg[1], avg[2]], avg[3])
}

/// One binary classifier per class, each with its own sample-order stream.
pub(crate) fn train_ovr(
    x: &[[f64; 3]],
    labels: &[usize],
    n_classes: usize,
    params: &SvmParams,
    seed: u64,
) -> (Vec<[f64; 3]>, Vec<f64>) {
    (0..n_classes)
        .map(|k| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == k { 1.0 } else { -1.0 })
                .collect();
            train_binary(x, &y, params, crate::derive_seed(seed, &[k as u64]))
        })
        .unzip()
}
