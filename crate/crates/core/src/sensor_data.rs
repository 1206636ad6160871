//! IMU data model, CSV ingestion/emission, and dataset validation.
//!
//! The on-disk format is a plain CSV with the exact header
//! `timestamp_ms,ax,ay,az,gx,gy,gz,label`, `\n` line endings and no quoting.
//! Acceleration is in g, angular rate in deg/s; the pipeline itself is
//! unit-agnostic as long as training and inference agree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact CSV header emitted and required on parse.
pub const CSV_HEADER: &str = "timestamp_ms,ax,ay,az,gx,gy,gz,label";

/// One timestamped 6-axis reading: accelerometer (g) plus gyroscope (deg/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Milliseconds since session start.
    pub timestamp_ms: u64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
}

impl ImuSample {
    pub fn new(timestamp_ms: u64, accel: [f64; 3], gyro: [f64; 3]) -> Self {
        Self {
            timestamp_ms,
            ax: accel[0],
            ay: accel[1],
            az: accel[2],
            gx: gyro[0],
            gy: gyro[1],
            gz: gyro[2],
        }
    }

    /// Channel values in canonical order ax, ay, az, gx, gy, gz.
    pub fn channels(&self) -> [f64; 6] {
        [self.ax, self.ay, self.az, self.gx, self.gy, self.gz]
    }

    pub fn is_finite(&self) -> bool {
        self.channels().iter().all(|v| v.is_finite())
    }
}

/// The five mouth-activity classes.
///
/// The declaration order is load-bearing: every tie-break in the pipeline
/// (modal window labels, forest votes, metric argmax) resolves to the
/// variant that appears first here.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ActivityLabel {
    #[serde(rename = "crunchy")]
    CrunchyFood,
    #[serde(rename = "soft")]
    SoftFood,
    Beverage,
    Speaking,
    Idle,
}

impl ActivityLabel {
    /// All variants in tie-break order.
    pub const ALL: [ActivityLabel; 5] = [
        ActivityLabel::CrunchyFood,
        ActivityLabel::SoftFood,
        ActivityLabel::Beverage,
        ActivityLabel::Speaking,
        ActivityLabel::Idle,
    ];

    /// Number of classes.
    pub const COUNT: usize = 5;

    /// Canonical lowercase token used in CSV files and on the wire.
    pub fn as_str(&self) -> &'static str {
        match self {
            ActivityLabel::CrunchyFood => "crunchy",
            ActivityLabel::SoftFood => "soft",
            ActivityLabel::Beverage => "beverage",
            ActivityLabel::Speaking => "speaking",
            ActivityLabel::Idle => "idle",
        }
    }

    /// Index into [`ActivityLabel::ALL`].
    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn from_index(idx: usize) -> Option<ActivityLabel> {
        ActivityLabel::ALL.get(idx).copied()
    }

    /// True for the three classes that trigger sound playback.
    pub fn is_consumption(&self) -> bool {
        matches!(
            self,
            ActivityLabel::CrunchyFood | ActivityLabel::SoftFood | ActivityLabel::Beverage
        )
    }
}

impl fmt::Display for ActivityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown activity label {0:?}; expected one of crunchy|soft|beverage|speaking|idle")]
pub struct ParseLabelError(pub String);

impl FromStr for ActivityLabel {
    type Err = ParseLabelError;

    /// Case-insensitive parse of the five canonical tokens.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "crunchy" => Ok(ActivityLabel::CrunchyFood),
            "soft" => Ok(ActivityLabel::SoftFood),
            "beverage" => Ok(ActivityLabel::Beverage),
            "speaking" => Ok(ActivityLabel::Speaking),
            "idle" => Ok(ActivityLabel::Idle),
            _ => Err(ParseLabelError(s.to_string())),
        }
    }
}

/// An ordered stream of labeled samples from a single earbud.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub records: Vec<(ImuSample, ActivityLabel)>,
    /// Nominal sampling rate; timestamps carry the actual spacing.
    pub sample_rate_hz: f64,
    /// Free-text provenance (generator settings, source file, ...).
    pub source: String,
}

impl LabeledDataset {
    pub fn new(
        records: Vec<(ImuSample, ActivityLabel)>,
        sample_rate_hz: f64,
        source: impl Into<String>,
    ) -> Self {
        Self {
            records,
            sample_rate_hz,
            source: source.into(),
        }
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = &ImuSample> {
        self.records.iter().map(|(s, _)| s)
    }

    /// Duration in milliseconds between first and last timestamp, plus one
    /// nominal sample period. Zero for empty datasets.
    pub fn duration_ms(&self) -> u64 {
        match (self.records.first(), self.records.last()) {
            (Some((first, _)), Some((last, _))) => {
                let period = (1000.0 / self.sample_rate_hz).round() as u64;
                last.timestamp_ms - first.timestamp_ms + period
            }
            _ => 0,
        }
    }
}

/// Errors raised by [`parse_csv`]. Line numbers are 1-based; the header is
/// line 1, so the first data row is line 2.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("header mismatch: expected {CSV_HEADER:?}, found {found:?}")]
    HeaderMismatch { found: String },
    #[error("line {line}: expected 8 comma-separated fields, found {fields}")]
    RowArity { line: usize, fields: usize },
    #[error("line {line}: field {field:?} has non-finite or unparseable value {value:?}")]
    BadNumber {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: unknown label {value:?}; expected crunchy|soft|beverage|speaking|idle")]
    BadLabel { line: usize, value: String },
}

const FIELD_NAMES: [&str; 7] = ["timestamp_ms", "ax", "ay", "az", "gx", "gy", "gz"];

/// Parses a CSV document into a dataset. Row order is preserved; a file with
/// only the header parses to an empty dataset. The nominal sample rate is not
/// stored in the file and defaults to 50 Hz.
pub fn parse_csv(text: &str) -> Result<LabeledDataset, CsvError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != CSV_HEADER {
        return Err(CsvError::HeaderMismatch {
            found: header.to_string(),
        });
    }

    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(CsvError::RowArity {
                line: line_no,
                fields: fields.len(),
            });
        }

        let timestamp_ms: u64 = fields[0].parse().map_err(|_| CsvError::BadNumber {
            line: line_no,
            field: FIELD_NAMES[0],
            value: fields[0].to_string(),
        })?;

        let mut channels = [0.0f64; 6];
        for (i, ch) in channels.iter_mut().enumerate() {
            let raw = fields[i + 1];
            let value: f64 = raw.parse().map_err(|_| CsvError::BadNumber {
                line: line_no,
                field: FIELD_NAMES[i + 1],
                value: raw.to_string(),
            })?;
            if !value.is_finite() {
                return Err(CsvError::BadNumber {
                    line: line_no,
                    field: FIELD_NAMES[i + 1],
                    value: raw.to_string(),
                });
            }
            *ch = value;
        }

        let label: ActivityLabel = fields[7].parse().map_err(|_| CsvError::BadLabel {
            line: line_no,
            value: fields[7].to_string(),
        })?;

        records.push((
            ImuSample::new(
                timestamp_ms,
                [channels[0], channels[1], channels[2]],
                [channels[3], channels[4], channels[5]],
            ),
            label,
        ));
    }

    Ok(LabeledDataset::new(records, 50.0, "csv"))
}

/// Formats a dataset as CSV. Channel values are written with 6 decimal
/// places, so parse(write(d)) reproduces records to that precision.
pub fn write_csv(dataset: &LabeledDataset) -> String {
    let mut out = String::with_capacity(32 * (dataset.record_count() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (sample, label) in &dataset.records {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            sample.timestamp_ms,
            sample.ax,
            sample.ay,
            sample.az,
            sample.gx,
            sample.gy,
            sample.gz,
            label
        ));
    }
    out
}

/// Findings from [`validate`]. The report carries observations; nothing here
/// is fatal by itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub record_count: usize,
    /// Records per class, keyed in tie-break order.
    pub class_counts: BTreeMap<ActivityLabel, usize>,
    /// Indices (into `records`) whose timestamp does not strictly increase
    /// relative to the previous sample of the same contiguous segment.
    pub monotonicity_violations: Vec<usize>,
    /// Median gap between consecutive timestamps within segments, if any.
    pub median_gap_ms: Option<f64>,
    /// Nominal gap implied by the declared sample rate.
    pub expected_gap_ms: f64,
    /// True when the median gap is within 20% of the nominal gap (vacuously
    /// true when there are fewer than two samples).
    pub rate_consistent: bool,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.monotonicity_violations.is_empty() && self.rate_consistent
    }
}

/// Checks per-class counts, timestamp monotonicity, and sample-rate
/// consistency.
///
/// A contiguous segment is a maximal run of records sharing one label;
/// timestamps may reset at segment boundaries (new participant or session)
/// but must strictly increase inside a segment.
pub fn validate(dataset: &LabeledDataset) -> ValidationReport {
    let mut class_counts: BTreeMap<ActivityLabel, usize> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut gaps: Vec<f64> = Vec::new();

    for (i, (sample, label)) in dataset.records.iter().enumerate() {
        *class_counts.entry(*label).or_insert(0) += 1;
        if i == 0 {
            continue;
        }
        let (prev, prev_label) = &dataset.records[i - 1];
        if label == prev_label {
            if sample.timestamp_ms <= prev.timestamp_ms {
                violations.push(i);
            } else {
                gaps.push((sample.timestamp_ms - prev.timestamp_ms) as f64);
            }
        }
    }

    let expected_gap_ms = 1000.0 / dataset.sample_rate_hz;
    let median_gap_ms = median(&mut gaps);
    let rate_consistent = match median_gap_ms {
        Some(gap) => (gap - expected_gap_ms).abs() <= 0.2 * expected_gap_ms,
        None => true,
    };

    ValidationReport {
        record_count: dataset.record_count(),
        class_counts,
        monotonicity_violations: violations,
        median_gap_ms,
        expected_gap_ms,
        rate_consistent,
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        Some(values[mid])
    } else {
        Some((values[mid - 1] + values[mid]) / 2.0)
    }
}
