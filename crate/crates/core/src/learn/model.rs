use serde::{Deserialize, Serialize};

use super::knn::knn_vote;
use super::svm::{train_ovr, SvmParams};
use super::{fit_scaler, ClassLabel, LabeledDataset, LearnError, Scaler, TaskMode};
use crate::dsp::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    #[default]
    MaxMarginLinear,
    NearestNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub svm: SvmParams,
    /// Neighbors consulted by the nearest-neighbor kind.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Standardize features with training-set statistics.
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::MaxMarginLinear,
            svm: SvmParams::default(),
            k: default_k(),
            standardize: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    MaxMarginLinear {
        /// One weight vector per class, in class order.
        weights: Vec<[f64; 3]>,
        bias: Vec<f64>,
    },
    NearestNeighbor {
        k: usize,
        /// Scaled training points.
        points: Vec<[f64; 3]>,
        /// Class index of each point.
        labels: Vec<usize>,
    },
}

/// A trained classifier. Predicts only labels in `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub mode: TaskMode,
    pub classes: Vec<ClassLabel>,
    pub scaler: Scaler,
    pub params: ModelParams,
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ModelParams::MaxMarginLinear { .. } => ClassifierKind::MaxMarginLinear,
            ModelParams::NearestNeighbor { .. } => ClassifierKind::NearestNeighbor,
        }
    }

    /// Index into [`Self::classes`] of the predicted label.
    pub fn predict_index(&self, feature: &FeatureVector) -> usize {
        let x = self.scaler.apply(feature);
        match &self.params {
            ModelParams::MaxMarginLinear { weights, bias } => {
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for (k, (w, b)) in weights.iter().zip(bias).enumerate() {
                    let s = w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + b;
                    // strict: ties keep the earlier class
                    if s > best_score {
                        best = k;
                        best_score = s;
                    }
                }
                best
            }
            ModelParams::NearestNeighbor { k, points, labels } => knn_vote(points, labels, *k, &x),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LearnError> {
        serde_json::from_str(s).map_err(|e| LearnError::Format {
            path: "<model json>".into(),
            reason: e.to_string(),
        })
    }
}

/// Predicted architecture and sparsity. Coarse models report sparsity 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub arch: String,
    pub sparsity: f64,
}

pub fn train(
    train_set: &LabeledDataset,
    config: &TrainConfig,
) -> Result<ClassifierModel, LearnError> {
    let classes = train_set.class_space();
    if classes.len() < 2 {
        return Err(LearnError::SingleClass(classes.len()));
    }
    if config.kind == ClassifierKind::NearestNeighbor && config.k == 0 {
        return Err(LearnError::Config("k must be >= 1".into()));
    }
    if config.kind == ClassifierKind::MaxMarginLinear
        && !(config.svm.lambda > 0.0 && config.svm.epochs > 0)
    {
        return Err(LearnError::Config(
            "svm lambda and epochs must be positive".into(),
        ));
    }
    let scaler = if config.standardize {
        fit_scaler(train_set)?
    } else {
        Scaler::identity()
    };
    let x: Vec<[f64; 3]> = train_set
        .rows
        .iter()
        .map(|r| scaler.apply(&r.features))
        .collect();
    let labels: Vec<usize> = train_set
        .rows
        .iter()
        .map(|r| {
            classes
                .binary_search(&train_set.label_of(r))
                .expect("label from class space")
        })
        .collect();
    let params = match config.kind {
        ClassifierKind::MaxMarginLinear => {
            let (weights, bias) = train_ovr(&x, &labels, classes.len(), &config.svm, config.seed);
            ModelParams::MaxMarginLinear { weights, bias }
        }
        ClassifierKind::NearestNeighbor => ModelParams::NearestNeighbor {
            k: config.k,
            points: x,
            labels,
        },
    };
    Ok(ClassifierModel {
        mode: train_set.mode,
        classes,
        scaler,
        params,
    })
}

pub fn predict(model: &ClassifierModel, feature: &FeatureVector) -> Prediction {
    let label = &model.classes[model.predict_index(feature)];
    Prediction {
        arch: label.arch.clone(),
        sparsity: match model.mode {
            TaskMode::Coarse => 1.0,
            TaskMode::Fine => label.sparsity.map_or(1.0, |s| s.0),
        },
    }
}
