//! Backend for live prediction: an HTTP service speaking a small JSON
//! protocol (one 4-second window per request), plus a replay client that
//! streams recorded datasets through the service at the production cadence.

pub mod client;
pub mod protocol;
pub mod server;

pub use client::{replay, Pace, ReplayError, ReplayFailure, ReplayOptions, ReplayReport, ReplayRow};
pub use protocol::{ErrorBody, PredictRequest, PredictResponse};
pub use server::{handle_predict, RequestLogEntry, RunningServer, ServiceError, SharedState};
