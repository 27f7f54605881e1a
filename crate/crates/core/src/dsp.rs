//! Measurement processing: power from voltage and current, idle/active
//! segmentation, per-inference peak detection, grouping of consecutive
//! inferences into windows, and the (mean, median, std) power features.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synth::PowerTrace;

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("invalid trace: {0}")]
    Trace(String),
    #[error("no active region")]
    NoActiveRegion,
    #[error("empty window")]
    EmptyWindow,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Sample range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Instantaneous power samples in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub power: Vec<f64>,
    pub sample_rate: f64,
}

impl PowerSeries {
    pub fn new(power: Vec<f64>, sample_rate: f64) -> Self {
        Self { power, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn slice(&self, seg: Segment) -> PowerSeries {
        PowerSeries::new(self.power[seg.start..seg.end].to_vec(), self.sample_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub p_mea: f64,
    pub p_mid: f64,
    pub p_std: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 3] {
        [self.p_mea, self.p_mid, self.p_std]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            p_mea: a[0],
            p_mid: a[1],
            p_std: a[2],
        }
    }
}

/// Where the idle level comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdleEstimate {
    /// Median of the first and last edge fraction of the series.
    #[default]
    Auto,
    Fixed(f64),
}

/// Thresholding parameters for activity detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Multiple of the robust idle noise std added to the idle level.
    pub threshold_k: f64,
    /// Lower bound on the margin, watts.
    pub min_margin: f64,
    /// Runs shorter than this many samples are glitches.
    pub min_width: usize,
    /// Fraction of samples at each end used to estimate idle.
    pub edge_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold_k: 3.0,
            min_margin: 1e-6,
            min_width: 10,
            edge_fraction: 0.05,
        }
    }
}

/// Resolved idle level and activation margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub idle: f64,
    pub margin: f64,
}

impl Threshold {
    pub fn level(&self) -> f64 {
        self.idle + self.margin
    }
}

/// Element-wise `u * i`.
pub fn compute_power(trace: &PowerTrace) -> Result<PowerSeries, DspError> {
    if trace.voltage.len() != trace.current.len() {
        return Err(DspError::Trace(format!(
            "voltage has {} samples, current has {}",
            trace.voltage.len(),
            trace.current.len()
        )));
    }
    let power = trace
        .voltage
        .iter()
        .zip(&trace.current)
        .map(|(u, i)| u * i)
        .collect();
    Ok(PowerSeries::new(power, trace.sample_rate))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Idle level and margin `max(k * 1.4826 * MAD, min_margin)` from the edge
/// samples of the series.
pub fn estimate_threshold(
    series: &PowerSeries,
    idle: IdleEstimate,
    cfg: &DetectorConfig,
) -> Threshold {
    let n = series.len();
    if n == 0 {
        return Threshold {
            idle: 0.0,
            margin: cfg.min_margin,
        };
    }
    let edge = ((n as f64 * cfg.edge_fraction).ceil() as usize).clamp(1, n);
    let mut edges: Vec<f64> = series.power[..edge].to_vec();
    if n > edge {
        edges.extend_from_slice(&series.power[n - edge.min(n - edge)..]);
    }
    let center = median(&mut edges.clone());
    let idle_level = match idle {
        IdleEstimate::Auto => center,
        IdleEstimate::Fixed(v) => v,
    };
    let mut dev: Vec<f64> = edges.iter().map(|x| (x - center).abs()).collect();
    let robust_std = 1.4826 * median(&mut dev);
    Threshold {
        idle: idle_level,
        margin: (cfg.threshold_k * robust_std).max(cfg.min_margin),
    }
}

fn above_runs(series: &PowerSeries, level: f64) -> Vec<Segment> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &p) in series.power.iter().enumerate() {
        match (p > level, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(Segment { start: s, end: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(Segment {
            start: s,
            end: series.len(),
        });
    }
    runs
}

/// Smallest segment holding every sample above the activity threshold.
pub fn segment_active(series: &PowerSeries, idle: IdleEstimate) -> Result<Segment, DspError> {
    segment_active_with(series, idle, &DetectorConfig::default())
}

pub fn segment_active_with(
    series: &PowerSeries,
    idle: IdleEstimate,
    cfg: &DetectorConfig,
) -> Result<Segment, DspError> {
    let level = estimate_threshold(series, idle, cfg).level();
    let first = series.power.iter().position(|&p| p > level);
    let last = series.power.iter().rposition(|&p| p > level);
    match (first, last) {
        (Some(a), Some(b)) => Ok(Segment {
            start: a,
            end: b + 1,
        }),
        _ => Err(DspError::NoActiveRegion),
    }
}

/// One segment per inference: maximal above-threshold runs at least
/// `min_width` samples long.
pub fn detect_peaks(series: &PowerSeries, idle: IdleEstimate) -> Vec<Segment> {
    detect_peaks_with(series, idle, &DetectorConfig::default())
}

pub fn detect_peaks_with(
    series: &PowerSeries,
    idle: IdleEstimate,
    cfg: &DetectorConfig,
) -> Vec<Segment> {
    let level = estimate_threshold(series, idle, cfg).level();
    above_runs(series, level)
        .into_iter()
        .filter(|r| r.len() >= cfg.min_width)
        .collect()
}

/// What a grouped window contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowContents {
    /// Every sample from the first peak's start to the last peak's end,
    /// valleys included.
    #[default]
    Span,
    /// Only the samples inside the peaks.
    PeaksOnly,
}

/// Groups consecutive peaks `group_size` at a time; a trailing incomplete
/// group is dropped.
pub fn group_windows(
    series: &PowerSeries,
    peaks: &[Segment],
    group_size: usize,
) -> Vec<PowerSeries> {
    group_windows_with(series, peaks, group_size, WindowContents::Span)
}

pub fn group_windows_with(
    series: &PowerSeries,
    peaks: &[Segment],
    group_size: usize,
    contents: WindowContents,
) -> Vec<PowerSeries> {
    if group_size == 0 {
        return Vec::new();
    }
    if peaks.len() < group_size {
        log::warn!(
            "{} peak(s) found, fewer than the group size {group_size}; no windows",
            peaks.len()
        );
    }
    peaks
        .chunks_exact(group_size)
        .map(|group| match contents {
            WindowContents::Span => series.slice(Segment {
                start: group[0].start,
                end: group[group.len() - 1].end,
            }),
            WindowContents::PeaksOnly => PowerSeries::new(
                group
                    .iter()
                    .flat_map(|s| series.power[s.start..s.end].iter().copied())
                    .collect(),
                series.sample_rate,
            ),
        })
        .collect()
}

/// Mean, `sort(P)[n/2]` (zero-based, upper middle for even `n`), and the
/// population standard deviation.
pub fn extract_features(window: &PowerSeries) -> Result<FeatureVector, DspError> {
    let n = window.len();
    if n == 0 {
        return Err(DspError::EmptyWindow);
    }
    let nf = n as f64;
    let p_mea = window.power.iter().sum::<f64>() / nf;
    let mut sorted = window.power.clone();
    sorted.sort_by(f64::total_cmp);
    let p_mid = sorted[n / 2];
    let var = window
        .power
        .iter()
        .map(|p| (p - p_mea).powi(2))
        .sum::<f64>()
        / nf;
    Ok(FeatureVector {
        p_mea,
        p_mid,
        p_std: var.sqrt(),
    })
}

/// Settings for the whole trace-to-features pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DspConfig {
    pub idle: IdleEstimate,
    pub detector: DetectorConfig,
    pub group_size: usize,
    pub contents: WindowContents,
    /// Subtract the idle level from every sample before featurizing.
    pub baseline_subtract: bool,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            idle: IdleEstimate::Auto,
            detector: DetectorConfig::default(),
            group_size: 5,
            contents: WindowContents::Span,
            baseline_subtract: false,
        }
    }
}

/// Output of [`featurize`]: one feature vector per window, plus the peaks
/// it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurized {
    pub peaks: Vec<Segment>,
    pub features: Vec<FeatureVector>,
}

/// Trace to per-window features.
pub fn featurize(trace: &PowerTrace, cfg: &DspConfig) -> Result<Featurized, DspError> {
    if cfg.group_size == 0 {
        return Err(DspError::Config("group_size must be >= 1".into()));
    }
    let mut series = compute_power(trace)?;
    let threshold = estimate_threshold(&series, cfg.idle, &cfg.detector);
    let peaks: Vec<Segment> = above_runs(&series, threshold.level())
        .into_iter()
        .filter(|r| r.len() >= cfg.detector.min_width)
        .collect();
    if peaks.is_empty() {
        return Err(DspError::NoActiveRegion);
    }
    if cfg.baseline_subtract {
        for p in &mut series.power {
            *p -= threshold.idle;
        }
    }
    let features = group_windows_with(&series, &peaks, cfg.group_size, cfg.contents)
        .iter()
        .map(extract_features)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Featurized { peaks, features })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series(p: Vec<f64>) -> PowerSeries {
        PowerSeries::new(p, 400.0)
    }

    fn two_level(idle: usize, high: usize, tail: usize) -> PowerSeries {
        let mut p = vec![2.0; idle];
        p.extend(vec![5.0; high]);
        p.extend(vec![2.0; tail]);
        series(p)
    }

    #[test]
    fn power_examples() {
        let t = PowerTrace::new(vec![2.0], vec![3.0], 400.0).unwrap();
        assert_eq!(compute_power(&t).unwrap().power, vec![6.0]);
        let t = PowerTrace::new(vec![5.0, 5.0], vec![0.4, 0.6], 400.0).unwrap();
        let p = compute_power(&t).unwrap().power;
        assert_relative_eq!(p[0], 2.0);
        assert_relative_eq!(p[1], 3.0);
        let t = PowerTrace::new(vec![1.0; 3], vec![0.0; 3], 400.0).unwrap();
        assert_eq!(compute_power(&t).unwrap().power, vec![0.0; 3]);
        let bad = PowerTrace {
            voltage: vec![1.0, 1.0],
            current: vec![1.0],
            sample_rate: 400.0,
            meta: None,
        };
        assert!(matches!(compute_power(&bad), Err(DspError::Trace(_))));
    }

    #[test]
    fn active_segment_of_two_level_series() {
        let s = two_level(100, 200, 100);
        assert_eq!(
            segment_active(&s, IdleEstimate::Auto).unwrap(),
            Segment {
                start: 100,
                end: 300
            }
        );
        assert_eq!(
            segment_active(&s, IdleEstimate::Fixed(2.0)).unwrap(),
            Segment {
                start: 100,
                end: 300
            }
        );
        assert_eq!(
            segment_active(&series(vec![2.0; 50]), IdleEstimate::Auto),
            Err(DspError::NoActiveRegion)
        );
    }

    #[test]
    fn peaks() {
        let mut p = vec![2.0; 100];
        for _ in 0..3 {
            p.extend(vec![6.0; 30]);
            p.extend(vec![2.0; 20]);
        }
        // a 3-sample glitch
        p.extend(vec![9.0; 3]);
        p.extend(vec![2.0; 100]);
        let peaks = detect_peaks(&series(p), IdleEstimate::Auto);
        assert_eq!(peaks.len(), 3);
        assert_eq!(
            peaks[0],
            Segment {
                start: 100,
                end: 130
            }
        );
        assert_eq!(
            peaks[2],
            Segment {
                start: 200,
                end: 230
            }
        );

        assert_eq!(
            detect_peaks(&two_level(50, 40, 50), IdleEstimate::Auto).len(),
            1
        );
        assert!(detect_peaks(&series(vec![2.0; 100]), IdleEstimate::Auto).is_empty());
    }

    fn peaks_at(n: usize) -> (PowerSeries, Vec<Segment>) {
        let mut p = vec![1.0; 10];
        let mut segs = Vec::new();
        for k in 0..n {
            segs.push(Segment {
                start: p.len(),
                end: p.len() + 4,
            });
            p.extend(vec![10.0 + k as f64; 4]);
            p.extend(vec![1.0; 2]);
        }
        (series(p), segs)
    }

    #[test]
    fn grouping() {
        let (s, peaks) = peaks_at(24);
        let w = group_windows(&s, &peaks, 5);
        assert_eq!(w.len(), 4);
        // five peaks of 4 plus four valleys of 2
        assert_eq!(w[0].len(), 5 * 4 + 4 * 2);

        let (s, peaks) = peaks_at(5);
        let w = group_windows(&s, &peaks, 5);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].power, s.power[peaks[0].start..peaks[4].end].to_vec());

        let (s, peaks) = peaks_at(3);
        assert!(group_windows(&s, &peaks, 5).is_empty());

        let (s, peaks) = peaks_at(5);
        let w = group_windows_with(&s, &peaks, 5, WindowContents::PeaksOnly);
        assert_eq!(w[0].len(), 20);
        assert!(w[0].power.iter().all(|&p| p >= 10.0));
    }

    #[test]
    fn feature_examples() {
        let f = extract_features(&series(vec![4.5; 4])).unwrap();
        assert_eq!(
            f,
            FeatureVector {
                p_mea: 4.5,
                p_mid: 4.5,
                p_std: 0.0
            }
        );

        let f = extract_features(&series(vec![5.0, 3.0, 1.0, 4.0, 2.0])).unwrap();
        assert_relative_eq!(f.p_mea, 3.0, max_relative = 1e-12);
        assert_eq!(f.p_mid, 3.0);
        assert_relative_eq!(f.p_std, 2f64.sqrt(), max_relative = 1e-12);

        let f = extract_features(&series(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_relative_eq!(f.p_mea, 2.5, max_relative = 1e-12);
        assert_eq!(f.p_mid, 3.0);
        assert_relative_eq!(f.p_std, 1.25f64.sqrt(), max_relative = 1e-12);

        assert_eq!(
            extract_features(&series(vec![])),
            Err(DspError::EmptyWindow)
        );
    }

    #[test]
    fn threshold_tracks_noise() {
        let mut p: Vec<f64> = (0..1000)
            .map(|i| 2.0 + if i % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        p[500] = 9.0;
        let t = estimate_threshold(&series(p), IdleEstimate::Auto, &DetectorConfig::default());
        assert_relative_eq!(t.idle, 2.0, epsilon = 1e-12);
        assert_relative_eq!(t.margin, 3.0 * 1.4826 * 0.1, max_relative = 1e-9);
    }

    #[test]
    fn featurize_errors() {
        let t = PowerTrace::new(vec![5.0; 100], vec![0.4; 100], 400.0).unwrap();
        assert_eq!(
            featurize(&t, &DspConfig::default()),
            Err(DspError::NoActiveRegion)
        );
        let bad = DspConfig {
            group_size: 0,
            ..DspConfig::default()
        };
        assert!(matches!(featurize(&t, &bad), Err(DspError::Config(_))));
    }
}
