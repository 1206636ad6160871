//! Replay client: streams a recorded dataset through the service, one
//! request per non-overlapping 4-second window, and reports predicted vs
//! true labels.

use std::time::Duration;

use thiserror::Error;

use gustosonic_core::featurize::{segment, WindowSpec};
use gustosonic_core::learn::{compute_metrics, LearnError, MetricsReport};
use gustosonic_core::sensor_data::{ActivityLabel, LabeledDataset};

use crate::protocol::{PredictRequest, PredictResponse};

/// Pacing between requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pace {
    /// Sleep one window duration between requests, as the live app does.
    RealTime,
    /// No inter-request delay; ordering is unchanged.
    Accelerated,
}

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    pub pace: Pace,
    /// Samples per request window; windows never overlap on replay.
    pub window_len: usize,
    pub session_id: String,
    /// Connection attempts per request before aborting the replay.
    pub retries: u32,
    pub backoff: Duration,
}

impl ReplayOptions {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            pace: Pace::Accelerated,
            window_len: 200,
            session_id: "replay".into(),
            retries: 3,
            backoff: Duration::from_millis(250),
        }
    }
}

/// One window's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRow {
    pub window_start_ms: u64,
    pub true_label: ActivityLabel,
    pub predicted: ActivityLabel,
    pub confidence: f64,
}

/// A window the server answered with an error status.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayFailure {
    pub window_start_ms: u64,
    pub status: u16,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ReplayReport {
    pub rows: Vec<ReplayRow>,
    pub failures: Vec<ReplayFailure>,
    /// Set when the replay aborted before covering every window.
    pub incomplete: bool,
}

impl ReplayReport {
    /// Metrics over the successfully predicted windows.
    pub fn metrics(&self) -> Result<MetricsReport, LearnError> {
        let pairs: Vec<(ActivityLabel, ActivityLabel)> = self
            .rows
            .iter()
            .map(|r| (r.true_label, r.predicted))
            .collect();
        compute_metrics(&pairs)
    }

    /// CSV `window_start_ms,true,predicted,confidence`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_start_ms,true,predicted,confidence\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6}\n",
                r.window_start_ms, r.true_label, r.predicted, r.confidence
            ));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("endpoint unreachable after {attempts} attempts: {detail}")]
    ConnectionFailed {
        attempts: u32,
        detail: String,
        /// Whatever completed before the abort, flagged incomplete.
        partial: ReplayReport,
    },
    #[error("dataset cannot be windowed: {0}")]
    BadDataset(String),
    #[error("server returned an unparseable body: {0}")]
    BadResponse(String),
}

/// Replays the dataset against the service. Emits exactly one request per
/// non-overlapping `window_len` window, in order. Server error statuses are
/// recorded per window and the replay continues; transport failures abort
/// after bounded retries.
pub fn replay(dataset: &LabeledDataset, opts: &ReplayOptions) -> Result<ReplayReport, ReplayError> {
    let spec = WindowSpec::new(opts.window_len, opts.window_len)
        .map_err(|e| ReplayError::BadDataset(e.to_string()))?;
    let windows = segment(dataset, &spec).map_err(|e| ReplayError::BadDataset(e.to_string()))?;
    let window_duration = Duration::from_secs_f64(opts.window_len as f64 / dataset.sample_rate_hz);

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into();
    let url = format!("{}/predict", opts.endpoint.trim_end_matches('/'));

    let mut report = ReplayReport::default();
    let total = windows.len();
    for (i, window) in windows.into_iter().enumerate() {
        let request = PredictRequest {
            session_id: opts.session_id.clone(),
            timestamp_ms: window.start_ms,
            window: window.samples.iter().map(|s| s.channels()).collect(),
        };

        let mut response = None;
        let mut last_err = String::new();
        for attempt in 0..opts.retries {
            match agent.post(&url).send_json(&request) {
                Ok(resp) => {
                    response = Some(resp);
                    break;
                }
                Err(e) => {
                    last_err = e.to_string();
                    if attempt + 1 < opts.retries {
                        std::thread::sleep(opts.backoff);
                    }
                }
            }
        }
        let Some(mut resp) = response else {
            report.incomplete = true;
            return Err(ReplayError::ConnectionFailed {
                attempts: opts.retries,
                detail: last_err,
                partial: report,
            });
        };

        let status = resp.status().as_u16();
        if (200..300).contains(&status) {
            let body: PredictResponse = resp
                .body_mut()
                .read_json()
                .map_err(|e| ReplayError::BadResponse(e.to_string()))?;
            let predicted: ActivityLabel = body
                .activity
                .parse()
                .map_err(|_| ReplayError::BadResponse(format!("label {:?}", body.activity)))?;
            report.rows.push(ReplayRow {
                window_start_ms: window.start_ms,
                true_label: window.label.expect("labeled dataset windows carry labels"),
                predicted,
                confidence: body.confidence,
            });
        } else {
            let detail = resp
                .body_mut()
                .read_to_string()
                .unwrap_or_else(|e| e.to_string());
            report.failures.push(ReplayFailure {
                window_start_ms: window.start_ms,
                status,
                detail,
            });
        }

        if opts.pace == Pace::RealTime && i + 1 < total {
            std::thread::sleep(window_duration);
        }
    }
    Ok(report)
}
