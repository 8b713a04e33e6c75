use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use tilecast_core::geometry::Orientation;
use tilecast_core::predictors::{
    predict_external, predict_no_motion, read_request, request_path, response_path, write_response, ExternalPredictor,
    FixationSeries, PredictionRequest, Predictor,
};
use tilecast_core::traces::HeadTrace;
use tilecast_core::Error;

fn request() -> PredictionRequest {
    let trace = HeadTrace::from_orientations(
        10.0,
        0.0,
        (0..7).map(|i| Orientation::from_degrees(-20.0 + 3.0 * i as f64, 4.0)),
    )
    .unwrap();
    PredictionRequest::new(trace, 1.3, 1.0).unwrap()
}

/// Polls `dir` for request files and answers each with `answer(request)`.
fn spawn_model(
    dir: PathBuf,
    stop: Arc<AtomicBool>,
    answer: impl Fn(&PredictionRequest) -> FixationSeries + Send + 'static,
) -> thread::JoinHandle<usize> {
    thread::spawn(move || {
        let mut served = 0;
        while !stop.load(Ordering::Relaxed) {
            for entry in fs::read_dir(&dir).unwrap().flatten() {
                let name = entry.file_name().to_string_lossy().into_owned();
                let Some(id) = name.strip_prefix("req_").and_then(|r| r.strip_suffix(".csv")) else {
                    continue;
                };
                if response_path(&dir, id).exists() {
                    continue;
                }
                let Ok(text) = fs::read_to_string(entry.path()) else {
                    continue;
                };
                let req = read_request(&text).unwrap();
                write_response(&dir, id, &answer(&req)).unwrap();
                served += 1;
            }
            thread::sleep(Duration::from_millis(2));
        }
        served
    })
}

#[test]
fn echo_model_reproduces_no_motion() {
    let dir = tempfile::tempdir().unwrap();
    let stop = Arc::new(AtomicBool::new(false));
    let model = spawn_model(dir.path().to_path_buf(), stop.clone(), predict_no_motion);

    let predictor = ExternalPredictor::new(dir.path()).with_timeout(Duration::from_secs(10));
    let req = request();
    let remote = predictor.predict(&req).unwrap();
    let local = predict_no_motion(&req);
    assert_eq!(remote.len(), local.len());
    for (a, b) in remote.fixations.iter().zip(&local.fixations) {
        assert!(tilecast_core::geometry::angular_distance(a, b) < 1e-9);
    }
    // Second call gets a fresh id.
    assert_eq!(predictor.predict(&req).unwrap().len(), 10);

    stop.store(true, Ordering::Relaxed);
    assert_eq!(model.join().unwrap(), 2);
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().flatten().collect();
    assert!(leftovers.is_empty(), "exchange files not cleaned up: {leftovers:?}");
}

#[test]
fn missing_response_times_out() {
    let dir = tempfile::tempdir().unwrap();
    let err = predict_external(
        &request(),
        dir.path(),
        "lonely",
        Duration::from_millis(50),
        Duration::from_millis(5),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Timeout { .. }), "{err}");
    assert!(!request_path(dir.path(), "lonely").exists());
}

fn answer_with(dir: &Path, id: &str, body: &str) -> Error {
    fs::write(response_path(dir, id), body).unwrap();
    predict_external(&request(), dir, id, Duration::from_secs(5), Duration::from_millis(1)).unwrap_err()
}

#[test]
fn wrong_length_response_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = answer_with(dir.path(), "short", "0,0,0\n0.1,0,0\n");
    assert!(
        matches!(
            err,
            Error::LengthMismatch {
                expected: 10,
                actual: 2
            }
        ),
        "{err}"
    );
}

#[test]
fn malformed_response_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = answer_with(dir.path(), "garbled", "0,north,0\n");
    assert!(matches!(err, Error::MalformedResponse { .. }), "{err}");
}

#[test]
fn request_file_carries_protocol_header() {
    let dir = tempfile::tempdir().unwrap();
    let _ = predict_external(
        &request(),
        dir.path(),
        "peek",
        Duration::from_millis(0),
        Duration::from_millis(1),
    );
    // The request is removed on timeout, so inspect the serialized form directly.
    let text = tilecast_core::predictors::write_request(&request());
    let first = text.lines().next().unwrap();
    assert_eq!(first, "# gap_s=1.3 horizon_s=1 rate_hz=10");
    assert_eq!(text.lines().count(), 8);
}
