//! Report bundle: everything a finished experiment leaves on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::experiment::{mean_std, ExperimentResult};
use crate::learn::ConfusionMatrix;

pub const CONFIG_FILE: &str = "config.json";
pub const RESULT_FILE: &str = "result.json";
pub const CONFUSION_CSV: &str = "confusion_matrix.csv";
pub const SUPERCLASS_CSV: &str = "confusion_matrix_superclass.csv";
pub const PER_CLASS_CSV: &str = "per_class_accuracy.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const CONFUSION_SVG: &str = "confusion_matrix.svg";

/// Files every bundle must contain.
pub const REQUIRED: [&str; 4] = [CONFIG_FILE, CONFUSION_CSV, SUMMARY_FILE, CONFUSION_SVG];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the bundle into `dir`, creating it if needed. Returns the paths
/// written, in a fixed order.
pub fn write_bundle(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<(), ReportError> {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(io(&p))?;
        written.push(p);
        Ok(())
    };
    put(CONFIG_FILE, (result.config.to_json() + "\n").into_bytes())?;
    put(
        RESULT_FILE,
        (serde_json::to_string_pretty(result).expect("result serializes") + "\n").into_bytes(),
    )?;
    put(CONFUSION_CSV, matrix_csv(&result.confusion))?;
    if result
        .confusion
        .classes
        .iter()
        .any(|c| c.sparsity.is_some())
    {
        put(
            SUPERCLASS_CSV,
            matrix_csv(&result.confusion.collapse_to_arch()),
        )?;
    }
    put(PER_CLASS_CSV, per_class_csv(&result.confusion).into_bytes())?;
    put(SUMMARY_FILE, summary(result).into_bytes())?;
    put(CONFUSION_SVG, confusion_svg(&result.confusion).into_bytes())?;
    Ok(written)
}

/// Reads `result.json` from a bundle directory.
pub fn read_result(dir: &Path) -> Result<ExperimentResult, ReportError> {
    let p = dir.join(RESULT_FILE);
    let s = fs::read_to_string(&p).map_err(io(&p))?;
    serde_json::from_str(&s).map_err(|e| ReportError::Format {
        path: p,
        reason: e.to_string(),
    })
}

fn matrix_csv(cm: &ConfusionMatrix) -> Vec<u8> {
    let mut buf = Vec::new();
    cm.write_csv(&mut buf).expect("in-memory write");
    buf
}

/// `class,accuracy,test_rows` summed over all splits; empty accuracy for
/// classes that never reached a test set.
pub fn per_class_csv(cm: &ConfusionMatrix) -> String {
    let mut out = String::from("class,accuracy,test_rows\n");
    for (i, acc) in cm.per_class_accuracy().into_iter().enumerate() {
        let acc = acc.map(|a| format!("{a:.6}")).unwrap_or_default();
        writeln!(out, "{},{acc},{}", cm.classes[i], cm.row_total(i)).unwrap();
    }
    out
}

pub fn summary(r: &ExperimentResult) -> String {
    let (m, s) = mean_std(&r.accuracies());
    let (sm, ss) = mean_std(&r.superclass_accuracies());
    let mut out = String::new();
    writeln!(out, "task: {}", r.config.task.name()).unwrap();
    writeln!(out, "classes: {}", r.confusion.classes.len()).unwrap();
    writeln!(out, "windows: {}", r.n_windows).unwrap();
    writeln!(
        out,
        "noise: sigma_current={:.6e} A sigma_voltage={:.6e} V sigma_level={} sigma_drift={}",
        r.noise.sigma_current, r.noise.sigma_voltage, r.noise.sigma_level, r.noise.sigma_drift
    )
    .unwrap();
    writeln!(
        out,
        "classifier: {:?} (lambda={}, epochs={}, k={})",
        r.config.classifier.kind,
        r.config.classifier.svm.lambda,
        r.config.classifier.svm.epochs,
        r.config.classifier.k
    )
    .unwrap();
    writeln!(
        out,
        "splits: {} at {}:{}",
        r.splits.len(),
        r.config.split.train,
        r.config.split.test
    )
    .unwrap();
    writeln!(out, "accuracy: {m:.4} +/- {s:.4}").unwrap();
    writeln!(out, "superclass accuracy: {sm:.4} +/- {ss:.4}").unwrap();
    for (i, sp) in r.splits.iter().enumerate() {
        writeln!(
            out,
            "  split {i}: accuracy {:.4} superclass {:.4}",
            sp.accuracy, sp.superclass_accuracy
        )
        .unwrap();
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Row-normalized heat map, darker is more.
pub fn confusion_svg(cm: &ConfusionMatrix) -> String {
    let n = cm.classes.len();
    let cell = 28;
    let margin = 130;
    let size = margin + n * cell + 10;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="10">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, row) in cm.counts.iter().enumerate() {
        let total = row.iter().sum::<u64>().max(1) as f64;
        for (j, &c) in row.iter().enumerate() {
            let frac = c as f64 / total;
            let shade = (255.0 * (1.0 - frac)).round() as u8;
            let (x, y) = (margin + j * cell, margin + i * cell);
            writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#ccc"/>"##
            )
            .unwrap();
            if c > 0 {
                let fill = if frac > 0.5 { "white" } else { "black" };
                writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle" fill="{fill}">{c}</text>"#,
                    x + cell / 2,
                    y + cell / 2 + 4
                )
                .unwrap();
            }
        }
    }
    for (k, c) in cm.classes.iter().enumerate() {
        let label = xml_escape(&c.to_string());
        let mid = margin + k * cell + cell / 2;
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{label}</text>"#,
            margin - 4,
            mid + 4
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{mid}" y="{}" text-anchor="start" transform="rotate(-60 {mid} {})">{label}</text>"#,
            margin - 4,
            margin - 4
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="4" y="12">rows: true, columns: predicted</text>"#
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
