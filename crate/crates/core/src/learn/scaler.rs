use serde::{Deserialize, Serialize};

use super::{LabeledDataset, LearnError, FEATURE_NAMES};
use crate::dsp::FeatureVector;

/// Per-feature standardization fitted on training rows only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: [f64; 3],
    /// Population standard deviation, all components > 0.
    pub std: [f64; 3],
}

impl Scaler {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }

    pub fn apply(&self, f: &FeatureVector) -> [f64; 3] {
        let x = f.to_array();
        std::array::from_fn(|j| (x[j] - self.mean[j]) / self.std[j])
    }
}

pub fn fit_scaler(train: &LabeledDataset) -> Result<Scaler, LearnError> {
    if train.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let n = train.len() as f64;
    let mut mean = [0.0; 3];
    for r in &train.rows {
        for (m, x) in mean.iter_mut().zip(r.features.to_array()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 3];
    for r in &train.rows {
        for (j, x) in r.features.to_array().into_iter().enumerate() {
            var[j] += (x - mean[j]).powi(2);
        }
    }
    let mut std = [0.0; 3];
    for j in 0..3 {
        std[j] = (var[j] / n).sqrt();
        // relative test: constant columns can leave rounding residue
        let floor = 1e-12 * mean[j].abs().max(f64::MIN_POSITIVE);
        if std[j].is_nan() || std[j] <= floor {
            return Err(LearnError::ZeroVariance {
                feature: FEATURE_NAMES[j],
            });
        }
    }
    Ok(Scaler { mean, std })
}

pub fn apply_scaler(scaler: &Scaler, f: &FeatureVector) -> [f64; 3] {
    scaler.apply(f)
}
