//! End-to-end service tests over a loopback socket.

use std::net::SocketAddr;
use std::sync::LazyLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gustosonic_core::featurize::{extract_features, featurize_dataset, FeatureSchema, WindowSpec};
use gustosonic_core::learn::{train_forest, ForestParams, RandomForestModel};
use gustosonic_core::sensor_data::ActivityLabel;
use gustosonic_core::synthgen::{generate_activity, generate_dataset, GeneratorSpec};
use gustosonic_service::{
    handle_predict, replay, PredictRequest, ReplayError, ReplayOptions, RunningServer,
    SharedState,
};

fn loopback() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

/// One model shared by all tests: trained on a small five-class corpus.
static MODEL: LazyLock<RandomForestModel> = LazyLock::new(|| {
    let spec = GeneratorSpec {
        participants: 3,
        minutes_per_activity: 0.5,
        ..GeneratorSpec::default()
    }
    .with_idle();
    let ds = generate_dataset(&spec).unwrap();
    let data = featurize_dataset(&ds, &WindowSpec::default()).unwrap();
    let params = ForestParams {
        n_trees: 40,
        ..ForestParams::default_for(44)
    };
    train_forest(&data, &params, &FeatureSchema::standard()).unwrap()
});

fn idle_request(timestamp_ms: u64) -> PredictRequest {
    // zero-noise idle: pure gravity baseline
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples =
        generate_activity(ActivityLabel::Idle, 4.0, 50.0, &mut rng, 0.0).unwrap();
    PredictRequest {
        session_id: "test".into(),
        timestamp_ms,
        window: samples.iter().map(|s| s.channels()).collect(),
    }
}

#[test]
fn predicts_idle_for_noiseless_baseline_window() {
    let state = SharedState::new(MODEL.clone());
    let response = handle_predict(&state, &idle_request(0)).unwrap();
    assert_eq!(response.activity, "idle");
    assert!(response.confidence > 0.5);
    assert_eq!(response.model_version, MODEL.model_version());
    assert_eq!(state.log_len(), 1);
}

#[test]
fn rejects_wrong_window_shape_naming_dimension() {
    let state = SharedState::new(MODEL.clone());
    let mut req = idle_request(0);
    req.window.truncate(199);
    let err = handle_predict(&state, &req).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("199") && msg.contains("200"), "{msg}");
    // rejected requests never reach the log
    assert_eq!(state.log_len(), 0);
}

#[test]
fn rejects_non_finite_values() {
    let state = SharedState::new(MODEL.clone());
    let mut req = idle_request(0);
    req.window[10][2] = f64::NAN;
    let err = handle_predict(&state, &req).unwrap_err();
    assert!(err.to_string().contains("row 10"), "{err}");
}

#[test]
fn identical_requests_get_identical_responses() {
    let state = SharedState::new(MODEL.clone());
    let req = idle_request(4000);
    let a = handle_predict(&state, &req).unwrap();
    let b = handle_predict(&state, &req).unwrap();
    assert_eq!(a, b);
    assert_eq!(state.log_len(), 2);
}

#[test]
fn http_replay_covers_every_window_and_matches_local_predictions() {
    let spec = GeneratorSpec {
        participants: 1,
        minutes_per_activity: 0.4,
        ..GeneratorSpec::default()
    }
    .with_idle();
    let dataset = generate_dataset(&spec).unwrap();
    let n_windows = dataset.record_count() / 200;

    let server = RunningServer::spawn(MODEL.clone(), loopback()).unwrap();
    let report = replay(&dataset, &ReplayOptions::new(server.endpoint())).unwrap();

    assert_eq!(report.rows.len(), n_windows);
    assert!(report.failures.is_empty());
    assert!(!report.incomplete);
    assert_eq!(server.state().log_len(), n_windows);

    // online/offline parity: label bit-equal, confidence within 1e-9
    let windows = gustosonic_core::featurize::segment(&dataset, &WindowSpec::default()).unwrap();
    for (row, window) in report.rows.iter().zip(windows.iter()) {
        let (label, confidence) = MODEL.predict(&extract_features(window)).unwrap();
        assert_eq!(row.predicted, label);
        assert!((row.confidence - confidence).abs() <= 1e-9);
        assert_eq!(row.window_start_ms, window.start_ms);
    }

    // replay metrics equal offline evaluation of the same model/windows
    let offline: Vec<_> = windows
        .iter()
        .map(|w| {
            (
                w.label.unwrap(),
                MODEL.predict(&extract_features(w)).unwrap().0,
            )
        })
        .collect();
    let offline_f1 = gustosonic_core::learn::compute_metrics(&offline)
        .unwrap()
        .macro_avg
        .f1;
    let replay_f1 = report.metrics().unwrap().macro_avg.f1;
    assert!((replay_f1 - offline_f1).abs() <= 0.02, "{replay_f1} vs {offline_f1}");

    server.shutdown();
}

#[test]
fn sixty_seconds_of_data_produces_fifteen_requests() {
    let spec = GeneratorSpec {
        participants: 1,
        minutes_per_activity: 1.0,
        activities: vec![ActivityLabel::SoftFood],
        ..GeneratorSpec::default()
    };
    let dataset = generate_dataset(&spec).unwrap();
    assert_eq!(dataset.record_count(), 3000);

    let server = RunningServer::spawn(MODEL.clone(), loopback()).unwrap();
    let report = replay(&dataset, &ReplayOptions::new(server.endpoint())).unwrap();
    assert_eq!(report.rows.len(), 15);
}

#[test]
fn unreachable_endpoint_aborts_with_no_rows() {
    let spec = GeneratorSpec {
        participants: 1,
        minutes_per_activity: 0.2,
        activities: vec![ActivityLabel::Idle],
        ..GeneratorSpec::default()
    };
    let dataset = generate_dataset(&spec).unwrap();
    let mut opts = ReplayOptions::new("http://127.0.0.1:1");
    opts.retries = 2;
    opts.backoff = std::time::Duration::from_millis(10);
    match replay(&dataset, &opts) {
        Err(ReplayError::ConnectionFailed {
            attempts, partial, ..
        }) => {
            assert_eq!(attempts, 2);
            assert!(partial.rows.is_empty());
            assert!(partial.incomplete);
        }
        other => panic!("expected ConnectionFailed, got {other:?}"),
    }
}

#[test]
fn server_rejects_malformed_bodies_over_http() {
    let server = RunningServer::spawn(MODEL.clone(), loopback()).unwrap();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .build()
        .into();
    let url = format!("{}/predict", server.endpoint());

    // wrong row arity fails JSON deserialization -> 4xx
    let bad = serde_json::json!({
        "session_id": "s",
        "timestamp_ms": 0,
        "window": [[1.0, 2.0, 3.0]]
    });
    let resp = agent.post(&url).send_json(&bad).unwrap();
    assert!(resp.status().is_client_error(), "{}", resp.status());

    // wrong shape passes deserialization but fails validation -> 400 JSON
    let short = PredictRequest {
        session_id: "s".into(),
        timestamp_ms: 0,
        window: vec![[0.0; 6]; 3],
    };
    let mut resp = agent.post(&url).send_json(&short).unwrap();
    assert_eq!(resp.status().as_u16(), 400);
    let body: gustosonic_service::ErrorBody = resp.body_mut().read_json().unwrap();
    assert!(body.error.contains("model expects 200"), "{}", body.error);

    // zero successful predictions -> empty log
    assert_eq!(server.state().log_len(), 0);
}

#[test]
fn concurrent_sessions_are_logged_once_each() {
    let server = RunningServer::spawn(MODEL.clone(), loopback()).unwrap();
    let endpoint = server.endpoint();
    let mut handles = Vec::new();
    for s in 0..4 {
        let endpoint = endpoint.clone();
        handles.push(std::thread::spawn(move || {
            let agent: ureq::Agent = ureq::Agent::config_builder().build().into();
            let url = format!("{endpoint}/predict");
            for i in 0..5 {
                let mut req = idle_request(i * 4000);
                req.session_id = format!("session-{s}");
                let mut resp = agent.post(&url).send_json(&req).unwrap();
                let body: gustosonic_service::PredictResponse =
                    resp.body_mut().read_json().unwrap();
                assert_eq!(body.activity, "idle");
            }
        }));
    }
    for h in handles {
        h.join().unwrap();
    }
    let log = server.state().log_snapshot();
    assert_eq!(log.len(), 20);
    for s in 0..4 {
        let per_session = log
            .iter()
            .filter(|e| e.session_id == format!("session-{s}"))
            .count();
        assert_eq!(per_session, 5);
    }
}
