//! Wire types for the prediction API.
//!
//! One POST to `/predict` carries one window of raw samples; the feature
//! schema lives server-side with the model, so clients never compute
//! features and cannot drift from the training pipeline.

use serde::{Deserialize, Serialize};

/// Request body for POST `/predict`.
///
/// `window` is a `window_len x 6` array in channel order
/// ax, ay, az, gx, gy, gz (accel in g, gyro in deg/s); 200 rows at the
/// standard 4-second / 50 Hz configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub session_id: String,
    /// Window start, milliseconds since session start.
    pub timestamp_ms: u64,
    pub window: Vec<[f64; 6]>,
}

/// Response body: one of the five canonical activity tokens, the winning
/// vote fraction, and the serving model's version tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub activity: String,
    pub confidence: f64,
    pub model_version: String,
}

/// JSON error payload used for all non-2xx responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
