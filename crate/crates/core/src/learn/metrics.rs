use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ClassLabel, ClassifierModel, LabeledDataset, LearnError, TaskMode};

/// `counts[true][predicted]` over a fixed class ordering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<ClassLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<ClassLabel>) -> Self {
        let n = classes.len();
        Self {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Diagonal over total; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    pub fn row_total(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    /// Recall of each class; `None` for classes absent from the test set.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        (0..self.classes.len())
            .map(|i| match self.row_total(i) {
                0 => None,
                n => Some(self.counts[i][i] as f64 / n as f64),
            })
            .collect()
    }

    /// Merges classes sharing an architecture.
    pub fn collapse_to_arch(&self) -> ConfusionMatrix {
        let mut archs: Vec<ClassLabel> = self
            .classes
            .iter()
            .map(|c| ClassLabel::coarse(&c.arch))
            .collect();
        archs.sort();
        archs.dedup();
        let index = |c: &ClassLabel| {
            archs
                .binary_search(&ClassLabel::coarse(&c.arch))
                .expect("arch present")
        };
        let mut out = ConfusionMatrix::new(archs.clone());
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                out.counts[index(&self.classes[i])][index(&self.classes[j])] += n;
            }
        }
        out
    }

    /// Accuracy after merging classes by architecture.
    pub fn superclass_accuracy(&self) -> f64 {
        self.collapse_to_arch().accuracy()
    }

    /// Header `true\predicted,<labels>` then one row per true class.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.classes.iter().map(|c| c.to_string()));
        w.write_record(&header)?;
        for (c, row) in self.classes.iter().zip(&self.counts) {
            let mut rec = vec![c.to_string()];
            rec.extend(row.iter().map(|n| n.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// Scores `model` on every row of `test_set`. The test set is read in the
/// model's task mode; labels outside the model's class space are an error.
pub fn evaluate(
    model: &ClassifierModel,
    test_set: &LabeledDataset,
) -> Result<ConfusionMatrix, LearnError> {
    if test_set.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let as_model = LabeledDataset {
        mode: model.mode,
        rows: Vec::new(),
    };
    let mut cm = ConfusionMatrix::new(model.classes.clone());
    for row in &test_set.rows {
        let label = as_model.label_of(row);
        let truth = model
            .classes
            .binary_search(&label)
            .map_err(|_| LearnError::UnseenLabel(label.to_string()))?;
        cm.record(truth, model.predict_index(&row.features));
    }
    Ok(cm)
}

impl TaskMode {
    pub fn name(&self) -> &'static str {
        match self {
            TaskMode::Coarse => "coarse",
            TaskMode::Fine => "fine",
        }
    }
}
