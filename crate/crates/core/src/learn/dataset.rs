use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassLabel, LearnError, TaskMode};
use crate::dsp::FeatureVector;

/// One labeled feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub features: FeatureVector,
    pub arch: String,
    pub sparsity: f64,
}

/// Feature rows under a task mode that fixes the label space.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub mode: TaskMode,
    pub rows: Vec<Row>,
}

impl LabeledDataset {
    pub fn new(mode: TaskMode, rows: Vec<Row>) -> Result<Self, LearnError> {
        if rows.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        Ok(Self { mode, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label_of(&self, row: &Row) -> ClassLabel {
        match self.mode {
            TaskMode::Coarse => ClassLabel::coarse(&row.arch),
            TaskMode::Fine => ClassLabel::fine(&row.arch, row.sparsity),
        }
    }

    /// Distinct labels in sorted order.
    pub fn class_space(&self) -> Vec<ClassLabel> {
        let mut labels: Vec<ClassLabel> = self.rows.iter().map(|r| self.label_of(r)).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// Row indices grouped by label, in label order.
    pub fn by_class(&self) -> BTreeMap<ClassLabel, Vec<usize>> {
        let mut map: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            map.entry(self.label_of(r)).or_default().push(i);
        }
        map
    }

    /// Requires every row to carry an architecture label; a missing sparsity
    /// label reads as 1.0.
    pub fn from_feature_rows(mode: TaskMode, rows: &[FeatureRow]) -> Result<Self, LearnError> {
        let rows = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(Row {
                    features: r.features,
                    arch: r.arch.clone().ok_or(LearnError::MissingLabel { row: i })?,
                    sparsity: r.sparsity.unwrap_or(1.0),
                })
            })
            .collect::<Result<Vec<_>, LearnError>>()?;
        Self::new(mode, rows)
    }

    pub fn to_feature_rows(&self) -> Vec<FeatureRow> {
        self.rows
            .iter()
            .map(|r| FeatureRow {
                features: r.features,
                arch: Some(r.arch.clone()),
                sparsity: Some(r.sparsity),
            })
            .collect()
    }
}

/// `train:test` proportions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatio {
    pub train: usize,
    pub test: usize,
}

impl Default for SplitRatio {
    fn default() -> Self {
        Self { train: 4, test: 1 }
    }
}

/// Stratified random split: within each class, `floor(n * train / (train +
/// test))` rows go to training and the rest to testing. Rows keep their
/// original relative order in both halves.
pub fn split(
    dataset: &LabeledDataset,
    ratio: SplitRatio,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset), LearnError> {
    if ratio.train == 0 || ratio.test == 0 {
        return Err(LearnError::Config(
            "split ratio terms must be positive".into(),
        ));
    }
    let need = ratio.train + ratio.test;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; dataset.len()];
    for (label, mut idx) in dataset.by_class() {
        if idx.len() < need {
            return Err(LearnError::TooFewRows {
                class: label.to_string(),
                have: idx.len(),
                need,
            });
        }
        idx.shuffle(&mut rng);
        let n_train = idx.len() * ratio.train / need;
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (row, &t) in dataset.rows.iter().zip(&in_train) {
        if t {
            train.push(row.clone());
        } else {
            test.push(row.clone());
        }
    }
    Ok((
        LabeledDataset::new(dataset.mode, train)?,
        LabeledDataset::new(dataset.mode, test)?,
    ))
}

/// A feature CSV row; labels are absent for unlabeled attack inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub features: FeatureVector,
    pub arch: Option<String>,
    pub sparsity: Option<f64>,
}

pub const FEATURE_CSV_HEADER: &str = "p_mea,p_mid,p_std,arch_label,sparsity_label";

/// Writes rows under the header `p_mea,p_mid,p_std,arch_label,sparsity_label`.
pub fn write_feature_csv<W: Write>(out: W, rows: &[FeatureRow]) -> Result<(), LearnError> {
    let fmt_err = |e: csv::Error| LearnError::Format {
        path: "<feature csv>".into(),
        reason: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FEATURE_CSV_HEADER.split(','))
        .map_err(fmt_err)?;
    for r in rows {
        let f = r.features;
        w.write_record([
            f.p_mea.to_string(),
            f.p_mid.to_string(),
            f.p_std.to_string(),
            r.arch.clone().unwrap_or_default(),
            r.sparsity.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(fmt_err)?;
    }
    w.flush().map_err(|e| fmt_err(e.into()))?;
    Ok(())
}

pub fn read_feature_csv(path: &Path) -> Result<Vec<FeatureRow>, LearnError> {
    let err = |reason: String| LearnError::Format {
        path: path.display().to_string(),
        reason,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.join(",") != FEATURE_CSV_HEADER {
        return Err(err(format!(
            "expected header {FEATURE_CSV_HEADER}, got {}",
            headers.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |j: usize| {
            rec[j]
                .trim()
                .parse::<f64>()
                .map_err(|e| err(format!("row {i}, column {j}: {e}")))
        };
        let opt = |j: usize| Some(rec[j].trim()).filter(|s| !s.is_empty());
        rows.push(FeatureRow {
            features: FeatureVector {
                p_mea: num(0)?,
                p_mid: num(1)?,
                p_std: num(2)?,
            },
            arch: opt(3).map(str::to_string),
            sparsity: opt(4)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| err(format!("row {i}, sparsity_label: {e}")))
                })
                .transpose()?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(per_class: &[(&str, usize)]) -> Vec<Row> {
        let mut out = Vec::new();
        for (c, n) in per_class {
            for i in 0..*n {
                out.push(Row {
                    features: FeatureVector::from_array([i as f64, 0.0, 0.0]),
                    arch: c.to_string(),
                    sparsity: 1.0,
                });
            }
        }
        out
    }

    #[test]
    fn four_to_one() {
        let ds = LabeledDataset::new(TaskMode::Coarse, rows(&[("a", 100)])).unwrap();
        let (tr, te) = split(&ds, SplitRatio::default(), 7).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
    }

    #[test]
    fn one_to_one_minimum() {
        let ds = LabeledDataset::new(TaskMode::Coarse, rows(&[("a", 2)])).unwrap();
        let (tr, te) = split(&ds, SplitRatio { train: 1, test: 1 }, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (1, 1));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let ds = LabeledDataset::new(TaskMode::Coarse, rows(&[("a", 50), ("b", 30)])).unwrap();
        let a = split(&ds, SplitRatio::default(), 11).unwrap();
        let b = split(&ds, SplitRatio::default(), 11).unwrap();
        assert_eq!(a, b);
        let c = split(&ds, SplitRatio::default(), 12).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn too_few_rows_names_class() {
        let ds = LabeledDataset::new(TaskMode::Coarse, rows(&[("a", 10), ("tiny", 3)])).unwrap();
        match split(&ds, SplitRatio::default(), 0) {
            Err(LearnError::TooFewRows { class, have, need }) => {
                assert_eq!((class.as_str(), have, need), ("tiny", 3, 5))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fine_mode_class_space() {
        let mut r = rows(&[("a", 2), ("b", 2)]);
        r[1].sparsity = 0.4;
        let ds = LabeledDataset::new(TaskMode::Fine, r.clone()).unwrap();
        let labels: Vec<String> = ds.class_space().iter().map(|l| l.to_string()).collect();
        assert_eq!(labels, vec!["a@0.4", "a@1.0", "b@1.0"]);
        let ds = LabeledDataset::new(TaskMode::Coarse, r).unwrap();
        assert_eq!(ds.class_space().len(), 2);
    }

    #[test]
    fn csv_round_trip_and_unlabeled_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let rows = vec![
            FeatureRow {
                features: FeatureVector::from_array([0.1 + 0.2, 1e-300, 3.0]),
                arch: Some("Resnet50".into()),
                sparsity: Some(0.8),
            },
            FeatureRow {
                features: FeatureVector::from_array([1.0, 2.0, 0.0]),
                arch: None,
                sparsity: None,
            },
        ];
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p_mea,p_mid,p_std,arch_label,sparsity_label\n"));
        assert!(text.ends_with("1,2,0,,\n"));
        fs::write(&path, &text).unwrap();
        assert_eq!(read_feature_csv(&path).unwrap(), rows);
        assert!(matches!(
            LabeledDataset::from_feature_rows(TaskMode::Coarse, &rows),
            Err(LearnError::MissingLabel { row: 1 })
        ));
    }
}
