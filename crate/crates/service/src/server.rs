//! The prediction server: a shared read-only model, an append-only request
//! log, and the `/predict` route.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use gustosonic_core::featurize::{extract_features, SampleWindow};
use gustosonic_core::learn::RandomForestModel;
use gustosonic_core::sensor_data::ImuSample;

use crate::protocol::{ErrorBody, PredictRequest, PredictResponse};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("model unavailable: {0}")]
    ModelUnavailable(String),
    #[error("failed to bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
}

impl ServiceError {
    fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::ModelUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Bind { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (
            self.status(),
            Json(ErrorBody {
                error: self.to_string(),
            }),
        )
            .into_response()
    }
}

/// One handled prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestLogEntry {
    /// Wall-clock receive time, milliseconds since the Unix epoch.
    pub received_unix_ms: u64,
    pub session_id: String,
    pub timestamp_ms: u64,
    pub activity: String,
    pub confidence: f64,
    pub latency: Duration,
}

/// Server state shared across connections. The model is read-only; the log
/// is append-only behind a mutex.
pub struct SharedState {
    pub model: RandomForestModel,
    log: Mutex<Vec<RequestLogEntry>>,
}

impl SharedState {
    pub fn new(model: RandomForestModel) -> Arc<Self> {
        Arc::new(Self {
            model,
            log: Mutex::new(Vec::new()),
        })
    }

    /// Snapshot of the request log, in arrival order.
    pub fn log_snapshot(&self) -> Vec<RequestLogEntry> {
        self.log.lock().expect("log lock").clone()
    }

    pub fn log_len(&self) -> usize {
        self.log.lock().expect("log lock").len()
    }
}

/// Validates one request and runs the model on it. Appends to the request
/// log on success. Pure apart from the log append and clock reads: the
/// response is a function of (model, request).
pub fn handle_predict(
    state: &SharedState,
    req: &PredictRequest,
) -> Result<PredictResponse, ServiceError> {
    let started = Instant::now();
    let expected = state.model.window.window_len;
    if req.window.len() != expected {
        return Err(ServiceError::BadRequest(format!(
            "window has {} rows, model expects {expected}",
            req.window.len()
        )));
    }
    for (i, row) in req.window.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ServiceError::BadRequest(format!(
                "window row {i} contains a non-finite value"
            )));
        }
    }

    // rebuild samples on the nominal clock; features ignore timestamps
    let samples: Vec<ImuSample> = req
        .window
        .iter()
        .enumerate()
        .map(|(i, row)| {
            ImuSample::new(
                req.timestamp_ms + (i as u64) * 20,
                [row[0], row[1], row[2]],
                [row[3], row[4], row[5]],
            )
        })
        .collect();
    let window = SampleWindow {
        samples,
        label: None,
        start_ms: req.timestamp_ms,
    };
    let features = extract_features(&window);
    let (label, confidence) = state
        .model
        .predict(&features)
        .map_err(|e| ServiceError::BadRequest(e.to_string()))?;

    let response = PredictResponse {
        activity: label.to_string(),
        confidence,
        model_version: state.model.model_version().to_string(),
    };
    let received_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    state.log.lock().expect("log lock").push(RequestLogEntry {
        received_unix_ms,
        session_id: req.session_id.clone(),
        timestamp_ms: req.timestamp_ms,
        activity: response.activity.clone(),
        confidence: response.confidence,
        latency: started.elapsed(),
    });
    Ok(response)
}

async fn predict_route(
    State(state): State<Arc<SharedState>>,
    Json(req): Json<PredictRequest>,
) -> Result<Json<PredictResponse>, ServiceError> {
    handle_predict(&state, &req).map(Json)
}

async fn health_route() -> &'static str {
    "ok"
}

fn router(state: Arc<SharedState>) -> Router {
    Router::new()
        .route("/predict", post(predict_route))
        .route("/health", get(health_route))
        .with_state(state)
}

/// A server running on a background thread with its own runtime. Dropping
/// the handle (or calling [`RunningServer::shutdown`]) stops it.
pub struct RunningServer {
    addr: SocketAddr,
    state: Arc<SharedState>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl RunningServer {
    /// Binds `listen` (port 0 picks an ephemeral port) and serves until
    /// shutdown.
    pub fn spawn(model: RandomForestModel, listen: SocketAddr) -> Result<Self, ServiceError> {
        let state = SharedState::new(model);
        let app = router(state.clone());
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .expect("tokio runtime");
        let listener = runtime
            .block_on(async { TcpListener::bind(listen).await })
            .map_err(|source| ServiceError::Bind {
                addr: listen,
                source,
            })?;
        let addr = listener.local_addr().expect("bound listener has an addr");
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .expect("serve");
            });
        });
        Ok(Self {
            addr,
            state,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn state(&self) -> &Arc<SharedState> {
        &self.state
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Serves on the current thread until the process is interrupted. Calls
/// `on_bound` with the actual bound address before accepting traffic.
pub fn run_server(
    model: RandomForestModel,
    listen: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
) -> Result<(), ServiceError> {
    let state = SharedState::new(model);
    let app = router(state);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime");
    runtime.block_on(async move {
        let listener = TcpListener::bind(listen)
            .await
            .map_err(|source| ServiceError::Bind {
                addr: listen,
                source,
            })?;
        on_bound(listener.local_addr().expect("bound listener has an addr"));
        axum::serve(listener, app).await.expect("serve");
        Ok(())
    })
}
