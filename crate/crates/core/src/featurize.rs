//! Fixed-window segmentation and per-window feature extraction.
//!
//! Prediction runs on 4-second windows; at the 50 Hz sampling rate that is
//! 200 samples, which is the default window and hop. Each window reduces to
//! 44 time-domain statistics: seven per channel (mean, std, min, max, rms,
//! zero crossings of the mean-removed signal, mean absolute first
//! difference) plus mean and std of the acceleration magnitude.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensor_data::{ActivityLabel, ImuSample, LabeledDataset};

/// Window length and hop, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_len: usize,
    pub hop: usize,
}

impl WindowSpec {
    pub fn new(window_len: usize, hop: usize) -> Result<Self, WindowError> {
        let spec = Self { window_len, hop };
        spec.check()?;
        Ok(spec)
    }

    /// Overlap is allowed, gaps are not: 1 <= hop <= window_len.
    pub fn check(&self) -> Result<(), WindowError> {
        if self.window_len == 0 {
            return Err(WindowError::InvalidSpec(
                "window_len must be positive".into(),
            ));
        }
        if self.hop == 0 || self.hop > self.window_len {
            return Err(WindowError::InvalidSpec(format!(
                "hop must be in 1..={} (got {})",
                self.window_len, self.hop
            )));
        }
        Ok(())
    }

    /// Number of full windows over `n` samples:
    /// 0 if n < window_len, else floor((n - window_len)/hop) + 1.
    pub fn window_count(&self, n: usize) -> usize {
        if n < self.window_len {
            0
        } else {
            (n - self.window_len) / self.hop + 1
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            window_len: 200,
            hop: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("invalid window spec: {0}")]
    InvalidSpec(String),
}

/// One fixed-length slice of samples, optionally carrying the modal label of
/// its members.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    pub samples: Vec<ImuSample>,
    pub label: Option<ActivityLabel>,
    pub start_ms: u64,
}

/// Names of the extracted features, in vector order. Stored alongside
/// serialized models so inference can verify schema compatibility.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
}

const CHANNEL_NAMES: [&str; 6] = ["ax", "ay", "az", "gx", "gy", "gz"];
const STAT_NAMES: [&str; 7] = ["mean", "std", "min", "max", "rms", "zc", "mad1"];

impl FeatureSchema {
    /// The default 44-feature layout produced by [`extract_features`].
    pub fn standard() -> Self {
        let mut names = Vec::with_capacity(44);
        for ch in CHANNEL_NAMES {
            for stat in STAT_NAMES {
                names.push(format!("{ch}_{stat}"));
            }
        }
        names.push("amag_mean".into());
        names.push("amag_std".into());
        Self { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Fixed-length vector of finite window statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Cuts the dataset into consecutive `window_len`-sample slices advanced by
/// `hop`. The trailing partial window is discarded; the live system only
/// acts on full 4-second windows. Window labels are the modal sample label,
/// ties broken by [`ActivityLabel`] order.
pub fn segment(
    dataset: &LabeledDataset,
    spec: &WindowSpec,
) -> Result<Vec<SampleWindow>, WindowError> {
    spec.check()?;
    let n = dataset.record_count();
    let mut windows = Vec::with_capacity(spec.window_count(n));
    let mut start = 0;
    while start + spec.window_len <= n {
        let slice = &dataset.records[start..start + spec.window_len];
        let samples: Vec<ImuSample> = slice.iter().map(|(s, _)| *s).collect();
        let mut counts = [0usize; ActivityLabel::COUNT];
        for (_, label) in slice {
            counts[label.index()] += 1;
        }
        let label = modal_label(&counts);
        windows.push(SampleWindow {
            start_ms: samples[0].timestamp_ms,
            samples,
            label: Some(label),
        });
        start += spec.hop;
    }
    Ok(windows)
}

/// Modal class from per-class counts; ties resolve to the earliest variant.
pub(crate) fn modal_label(counts: &[usize; ActivityLabel::COUNT]) -> ActivityLabel {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    ActivityLabel::from_index(best).unwrap()
}

/// Computes the standard 44-feature vector for one window.
///
/// Per channel: mean, population std, min, max, rms of the raw signal,
/// zero-crossing count of the mean-removed signal, and mean absolute first
/// difference; then mean and population std of sqrt(ax^2+ay^2+az^2).
pub fn extract_features(window: &SampleWindow) -> FeatureVector {
    let n = window.samples.len();
    debug_assert!(n > 0, "windows are never empty by construction");
    let mut values = Vec::with_capacity(44);

    let mut channel = vec![0.0f64; n];
    for ch in 0..6 {
        for (i, sample) in window.samples.iter().enumerate() {
            channel[i] = sample.channels()[ch];
        }
        channel_stats(&channel, &mut values);
    }

    let amag: Vec<f64> = window
        .samples
        .iter()
        .map(|s| (s.ax * s.ax + s.ay * s.ay + s.az * s.az).sqrt())
        .collect();
    let (mean, std) = mean_std(&amag);
    values.push(mean);
    values.push(std);

    debug_assert_eq!(values.len(), FeatureSchema::standard().len());
    debug_assert!(values.iter().all(|v| v.is_finite()));
    FeatureVector { values }
}

/// Segments and featurizes labeled data in one pass, pairing each window's
/// feature vector with its modal label.
pub fn featurize_dataset(
    dataset: &LabeledDataset,
    spec: &WindowSpec,
) -> Result<Vec<(FeatureVector, ActivityLabel)>, WindowError> {
    let windows = segment(dataset, spec)?;
    Ok(windows
        .iter()
        .map(|w| (extract_features(w), w.label.unwrap()))
        .collect())
}

fn channel_stats(x: &[f64], out: &mut Vec<f64>) {
    let n = x.len();
    let (mean, std) = mean_std(x);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum_sq = 0.0;
    for &v in x {
        min = min.min(v);
        max = max.max(v);
        sum_sq += v * v;
    }
    let rms = (sum_sq / n as f64).sqrt();

    // Sign changes of the mean-removed signal; values >= 0 count as positive.
    let mut zc = 0usize;
    for w in x.windows(2) {
        let a = w[0] - mean >= 0.0;
        let b = w[1] - mean >= 0.0;
        if a != b {
            zc += 1;
        }
    }

    let mad1 = if n > 1 {
        x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };

    out.extend_from_slice(&[mean, std, min, max, rms, zc as f64, mad1]);
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_data::LabeledDataset;
    use proptest::prelude::*;

    fn flat_dataset(n: usize, label: ActivityLabel) -> LabeledDataset {
        let records = (0..n)
            .map(|i| {
                (
                    ImuSample::new(i as u64 * 20, [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]),
                    label,
                )
            })
            .collect();
        LabeledDataset::new(records, 50.0, "test")
    }

    fn window_from(values: impl Fn(usize) -> [f64; 6], n: usize) -> SampleWindow {
        SampleWindow {
            samples: (0..n)
                .map(|i| {
                    let v = values(i);
                    ImuSample::new(i as u64 * 20, [v[0], v[1], v[2]], [v[3], v[4], v[5]])
                })
                .collect(),
            label: None,
            start_ms: 0,
        }
    }

    #[test]
    fn segment_counts_match_formula() {
        let spec = WindowSpec::default();
        assert_eq!(
            segment(&flat_dataset(200, ActivityLabel::Idle), &spec)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            segment(&flat_dataset(1000, ActivityLabel::Idle), &spec)
                .unwrap()
                .len(),
            5
        );
        assert_eq!(
            segment(&flat_dataset(199, ActivityLabel::Idle), &spec)
                .unwrap()
                .len(),
            0
        );
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(WindowSpec::new(0, 1).is_err());
        assert!(WindowSpec::new(10, 0).is_err());
        assert!(WindowSpec::new(10, 11).is_err());
        assert!(WindowSpec::new(10, 10).is_ok());
    }

    #[test]
    fn modal_label_tie_breaks_by_enum_order() {
        // 100 idle + 100 speaking: tie resolves to Speaking (earlier variant)
        let mut records = Vec::new();
        for i in 0..100 {
            records.push((
                ImuSample::new(i * 20, [0.0; 3], [0.0; 3]),
                ActivityLabel::Idle,
            ));
        }
        for i in 100..200 {
            records.push((
                ImuSample::new(i * 20, [0.0; 3], [0.0; 3]),
                ActivityLabel::Speaking,
            ));
        }
        let ds = LabeledDataset::new(records, 50.0, "test");
        let windows = segment(&ds, &WindowSpec::default()).unwrap();
        assert_eq!(windows[0].label, Some(ActivityLabel::Speaking));
    }

    #[test]
    fn all_zero_window_features() {
        let w = window_from(|_| [0.0; 6], 200);
        let f = extract_features(&w);
        // every per-channel statistic is zero
        for (i, name) in FeatureSchema::standard().names.iter().enumerate() {
            assert_eq!(f.values[i], 0.0, "feature {name}");
        }
    }

    #[test]
    fn alternating_ax_window() {
        let w = window_from(|i| [if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0, 0.0, 0.0, 0.0, 0.0], 200);
        let f = extract_features(&w);
        let schema = FeatureSchema::standard();
        let idx = |name: &str| schema.names.iter().position(|n| n == name).unwrap();
        assert!(f.values[idx("ax_mean")].abs() < 1e-12);
        assert!((f.values[idx("ax_rms")] - 1.0).abs() < 1e-12);
        assert_eq!(f.values[idx("ax_zc")], 199.0);
    }

    #[test]
    fn schema_has_44_features() {
        let schema = FeatureSchema::standard();
        assert_eq!(schema.len(), 44);
        let w = window_from(|i| [i as f64; 6], 200);
        assert_eq!(extract_features(&w).len(), 44);
    }

    /// Independent naive recomputation of every statistic, kept deliberately
    /// separate from the implementation above.
    fn naive_features(w: &SampleWindow) -> Vec<f64> {
        let n = w.samples.len();
        let mut out = Vec::new();
        for ch in 0..6 {
            let xs: Vec<f64> = w.samples.iter().map(|s| s.channels()[ch]).collect();
            let mean: f64 = xs.iter().sum::<f64>() / n as f64;
            let var: f64 = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let rms = (xs.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            let mut zc = 0.0;
            for i in 1..n {
                let a = xs[i - 1] - mean;
                let b = xs[i] - mean;
                if (a >= 0.0) != (b >= 0.0) {
                    zc += 1.0;
                }
            }
            let mut mad1 = 0.0;
            if n > 1 {
                for i in 1..n {
                    mad1 += (xs[i] - xs[i - 1]).abs();
                }
                mad1 /= (n - 1) as f64;
            }
            out.extend_from_slice(&[mean, var.sqrt(), min, max, rms, zc, mad1]);
        }
        let mags: Vec<f64> = w
            .samples
            .iter()
            .map(|s| (s.ax.powi(2) + s.ay.powi(2) + s.az.powi(2)).sqrt())
            .collect();
        let mean: f64 = mags.iter().sum::<f64>() / n as f64;
        let var: f64 = mags.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        out.push(mean);
        out.push(var.sqrt());
        out
    }

    proptest! {
        #[test]
        fn features_match_naive_oracle(
            raw in prop::collection::vec(prop::array::uniform6(-50.0f64..50.0), 2..120)
        ) {
            let n = raw.len();
            let w = window_from(|i| raw[i], n);
            let got = extract_features(&w);
            let want = naive_features(&w);
            for ((g, w_), name) in got
                .values
                .iter()
                .zip(want.iter())
                .zip(FeatureSchema::standard().names.iter())
            {
                prop_assert!((g - w_).abs() < 1e-9, "{name}: {g} vs {w_}");
            }
        }

        #[test]
        fn window_count_formula_holds(n in 0usize..400, w in 1usize..60, h_off in 0usize..60) {
            let h = 1 + h_off % w;
            let spec = WindowSpec::new(w, h).unwrap();
            let ds = flat_dataset(n, ActivityLabel::Idle);
            let windows = segment(&ds, &spec).unwrap();
            let expected = if n < w { 0 } else { (n - w) / h + 1 };
            prop_assert_eq!(windows.len(), expected);
            // every produced window has exactly window_len samples
            for win in &windows {
                prop_assert_eq!(win.samples.len(), w);
            }
        }

        /// Adding a constant to one channel shifts that channel's
        /// mean/min/max by the constant and leaves std, zero crossings and
        /// mad1 unchanged (rms legitimately shifts and is not asserted).
        #[test]
        fn translation_covariance(
            raw in prop::collection::vec(prop::array::uniform6(-10.0f64..10.0), 10..80),
            shift in -5.0f64..5.0,
            ch in 0usize..6,
        ) {
            let n = raw.len();
            // keep residuals away from the sign boundary so zero-crossing
            // counts cannot flip on last-ulp rounding of the shifted mean
            let mean: f64 = raw.iter().map(|v| v[ch]).sum::<f64>() / n as f64;
            prop_assume!(raw.iter().all(|v| (v[ch] - mean).abs() > 1e-6));
            let base = window_from(|i| raw[i], n);
            let shifted = window_from(
                |i| {
                    let mut v = raw[i];
                    v[ch] += shift;
                    v
                },
                n,
            );
            let a = extract_features(&base).values;
            let b = extract_features(&shifted).values;
            let o = ch * 7;
            prop_assert!((b[o] - (a[o] + shift)).abs() < 1e-9, "mean shifts");
            prop_assert!((b[o + 1] - a[o + 1]).abs() < 1e-9, "std unchanged");
            prop_assert!((b[o + 2] - (a[o + 2] + shift)).abs() < 1e-9, "min shifts");
            prop_assert!((b[o + 3] - (a[o + 3] + shift)).abs() < 1e-9, "max shifts");
            prop_assert!((b[o + 5] - a[o + 5]).abs() < 1e-9, "zc unchanged");
            prop_assert!((b[o + 6] - a[o + 6]).abs() < 1e-9, "mad1 unchanged");
            // untouched channels are identical everywhere
            for other in 0..6 {
                if other == ch { continue; }
                for s in 0..7 {
                    prop_assert_eq!(a[other * 7 + s], b[other * 7 + s]);
                }
            }
        }
    }
}
