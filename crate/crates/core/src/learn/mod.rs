//! The attack classifier: labeled feature datasets, stratified splitting,
//! feature standardization, one-vs-rest linear max-margin and nearest
//! neighbor classifiers, and confusion-matrix evaluation.

mod dataset;
mod knn;
mod metrics;
mod model;
mod scaler;
mod svm;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    read_feature_csv, split, write_feature_csv, FeatureRow, LabeledDataset, Row, SplitRatio,
};
pub use metrics::{evaluate, ConfusionMatrix};
pub use model::{
    predict, train, ClassifierKind, ClassifierModel, ModelParams, Prediction, TrainConfig,
};
pub use scaler::{apply_scaler, fit_scaler, Scaler};
pub use svm::{hinge_objective, SvmParams};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least two classes, found {0}")]
    SingleClass(usize),
    #[error("class {class} has {have} row(s), need at least {need}")]
    TooFewRows {
        class: String,
        have: usize,
        need: usize,
    },
    #[error("feature {feature} has zero variance in the training set")]
    ZeroVariance { feature: &'static str },
    #[error("label {0} is not in the model's class space")]
    UnseenLabel(String),
    #[error("row {row}: missing label")]
    MissingLabel { row: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

/// Names of the three features, in vector order.
pub const FEATURE_NAMES: [&str; 3] = ["p_mea", "p_mid", "p_std"];

/// Coarse tasks predict the architecture only; fine tasks predict the
/// (architecture, sparsity) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    Coarse,
    Fine,
}

/// Sparsity coefficient usable as an ordered map key.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sparsity(pub f64);

impl PartialEq for Sparsity {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Sparsity {}

impl PartialOrd for Sparsity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sparsity {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for Sparsity {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for Sparsity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.0)
    }
}

/// A class in the label space. `sparsity` is `None` for coarse tasks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassLabel {
    pub arch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<Sparsity>,
}

impl ClassLabel {
    pub fn coarse(arch: impl Into<String>) -> Self {
        Self {
            arch: arch.into(),
            sparsity: None,
        }
    }

    pub fn fine(arch: impl Into<String>, sparsity: f64) -> Self {
        Self {
            arch: arch.into(),
            sparsity: Some(Sparsity(sparsity)),
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sparsity {
            Some(s) => write!(f, "{}@{s}", self.arch),
            None => write!(f, "{}", self.arch),
        }
    }
}
