//! Viewport predictors.
//!
//! A predictor sees only the observation window of a segment (whose length
//! shrinks as the DoP grows) and must always return a full segment of future
//! fixations, starting `gap` seconds after the last observed sample.
//!
//! Besides the two built-in predictors, [`ExternalPredictor`] hands requests to
//! an out-of-process model through files in an exchange directory:
//!
//! - request `req_<id>.csv`: header `# gap_s=<float> horizon_s=<float> rate_hz=<float>`
//!   followed by the observed `t_seconds,yaw_degrees,pitch_degrees` samples;
//! - response `resp_<id>.csv`: exactly `round(horizon_s * rate_hz)` lines of
//!   `t_seconds,yaw_degrees,pitch_degrees`, renamed into place once complete.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::{fov_tiles, wrap_angle, FovSpec, Orientation, TileGrid};
use crate::traces::{parse_sample_csv, write_samples, HeadTrace};

pub const DEFAULT_VELOCITY_WINDOW: usize = 5;
pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(30);
/// Environment variable naming the exchange directory for [`ExternalPredictor`].
pub const EXCHANGE_DIR_ENV: &str = "TILECAST_EXCHANGE_DIR";

/// Predicted gaze directions over one prediction window, one per sample period.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationSeries {
    pub sample_rate: f64,
    pub fixations: Vec<Orientation>,
}

impl FixationSeries {
    pub fn len(&self) -> usize {
        self.fixations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRequest {
    observed: HeadTrace,
    gap: f64,
    horizon: f64,
}

impl PredictionRequest {
    pub fn new(observed: HeadTrace, gap: f64, horizon: f64) -> Result<Self> {
        if !(gap >= 0.0 && gap.is_finite()) {
            return Err(Error::Precondition(format!(
                "prediction gap must be non-negative, got {gap}"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Precondition(format!(
                "prediction horizon must be positive, got {horizon}"
            )));
        }
        if (horizon * observed.sample_rate()).round() < 1.0 {
            return Err(Error::Precondition(format!(
                "horizon of {horizon} s holds no sample at {} Hz",
                observed.sample_rate()
            )));
        }
        Ok(PredictionRequest { observed, gap, horizon })
    }

    pub fn observed(&self) -> &HeadTrace {
        &self.observed
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sample_rate(&self) -> f64 {
        self.observed.sample_rate()
    }

    /// Number of fixations every predictor must return.
    pub fn series_len(&self) -> usize {
        (self.horizon * self.sample_rate()).round() as usize
    }

    /// Time of fixation `k` relative to the last observed sample.
    pub fn offset(&self, k: usize) -> f64 {
        self.gap + k as f64 / self.sample_rate()
    }
}

pub trait Predictor: Sync {
    fn name(&self) -> &str;
    fn predict(&self, request: &PredictionRequest) -> Result<FixationSeries>;
}

/// Repeats the last observed orientation.
pub fn predict_no_motion(request: &PredictionRequest) -> FixationSeries {
    let last = request.observed().last().orientation;
    FixationSeries {
        sample_rate: request.sample_rate(),
        fixations: vec![last; request.series_len()],
    }
}

/// Linear extrapolation of the mean angular velocity over the last
/// `velocity_window` observed samples.
pub fn predict_extrapolate(request: &PredictionRequest, velocity_window: usize) -> FixationSeries {
    let samples = request.observed().samples();
    let window = velocity_window.min(samples.len());
    if window < 2 {
        return predict_no_motion(request);
    }
    let recent = &samples[samples.len() - window..];
    let mut yaw_travel = 0.0;
    for pair in recent.windows(2) {
        yaw_travel += wrap_angle(pair[1].orientation.yaw() - pair[0].orientation.yaw());
    }
    let first = &recent[0];
    let last = &recent[window - 1];
    let elapsed = last.t - first.t;
    let yaw_rate = yaw_travel / elapsed;
    let pitch_rate = (last.orientation.pitch() - first.orientation.pitch()) / elapsed;
    let fixations = (0..request.series_len())
        .map(|k| {
            let dt = request.offset(k);
            Orientation::new(
                last.orientation.yaw() + yaw_rate * dt,
                last.orientation.pitch() + pitch_rate * dt,
            )
        })
        .collect();
    FixationSeries {
        sample_rate: request.sample_rate(),
        fixations,
    }
}

/// Fraction of fixations whose FoV covers each tile.
pub fn to_probabilities(series: &FixationSeries, grid: &TileGrid, fov: &FovSpec) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Precondition("fixation series is empty".into()));
    }
    let mut counts = vec![0usize; grid.tile_count()];
    for fixation in &series.fixations {
        for m in fov_tiles(grid, fixation, fov).indices() {
            counts[m] += 1;
        }
    }
    let n = series.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoMotion;

impl Predictor for NoMotion {
    fn name(&self) -> &str {
        "no-motion"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<FixationSeries> {
        Ok(predict_no_motion(request))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Extrapolate {
    pub velocity_window: usize,
}

impl Default for Extrapolate {
    fn default() -> Self {
        Extrapolate {
            velocity_window: DEFAULT_VELOCITY_WINDOW,
        }
    }
}

impl Predictor for Extrapolate {
    fn name(&self) -> &str {
        "extrapolate"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<FixationSeries> {
        Ok(predict_extrapolate(request, self.velocity_window))
    }
}

/// File-based bridge to a predictor running in another process.
#[derive(Debug)]
pub struct ExternalPredictor {
    exchange_dir: PathBuf,
    timeout: Duration,
    poll_interval: Duration,
    next_id: AtomicU64,
}

impl ExternalPredictor {
    pub fn new(exchange_dir: impl Into<PathBuf>) -> Self {
        ExternalPredictor {
            exchange_dir: exchange_dir.into(),
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
            poll_interval: Duration::from_millis(5),
            next_id: AtomicU64::new(0),
        }
    }

    /// Reads the exchange directory from [`EXCHANGE_DIR_ENV`].
    pub fn from_env() -> Result<Self> {
        std::env::var_os(EXCHANGE_DIR_ENV)
            .map(Self::new)
            .ok_or_else(|| Error::Precondition(format!("{EXCHANGE_DIR_ENV} is not set")))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn exchange_dir(&self) -> &Path {
        &self.exchange_dir
    }
}

impl Predictor for ExternalPredictor {
    fn name(&self) -> &str {
        "external"
    }

    fn predict(&self, request: &PredictionRequest) -> Result<FixationSeries> {
        let id = format!(
            "{}_{}",
            std::process::id(),
            self.next_id.fetch_add(1, Ordering::Relaxed)
        );
        predict_external(request, &self.exchange_dir, &id, self.timeout, self.poll_interval)
    }
}

pub fn request_path(exchange_dir: &Path, id: &str) -> PathBuf {
    exchange_dir.join(format!("req_{id}.csv"))
}

pub fn response_path(exchange_dir: &Path, id: &str) -> PathBuf {
    exchange_dir.join(format!("resp_{id}.csv"))
}

/// Serializes a request in the exchange format.
pub fn write_request(request: &PredictionRequest) -> String {
    let header = format!(
        "# gap_s={} horizon_s={} rate_hz={}",
        request.gap(),
        request.horizon(),
        request.sample_rate()
    );
    write_samples(&header, request.observed().samples())
}

/// Parses an exchange-format request, as an external model would.
pub fn read_request(text: &str) -> Result<PredictionRequest> {
    let csv = parse_sample_csv(text)?;
    let key = |name: &str| {
        csv.header.get(name).copied().ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing `{name}` in request header"),
        })
    };
    let (gap, horizon, rate) = (key("gap_s")?, key("horizon_s")?, key("rate_hz")?);
    let observed = crate::traces::parse_trace(&format!(
        "# rate_hz={rate}\n{}",
        text.lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    ))?;
    PredictionRequest::new(observed, gap, horizon)
}

/// Writes the request atomically, then waits for `resp_<id>.csv`.
pub fn predict_external(
    request: &PredictionRequest,
    exchange_dir: &Path,
    id: &str,
    timeout: Duration,
    poll_interval: Duration,
) -> Result<FixationSeries> {
    let req_path = request_path(exchange_dir, id);
    let tmp_path = exchange_dir.join(format!(".req_{id}.csv.tmp"));
    fs::write(&tmp_path, write_request(request)).map_err(|e| Error::io(&tmp_path, e))?;
    fs::rename(&tmp_path, &req_path).map_err(|e| Error::io(&req_path, e))?;

    let resp_path = response_path(exchange_dir, id);
    let started = Instant::now();
    let text = loop {
        match fs::read_to_string(&resp_path) {
            Ok(text) => break text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                if started.elapsed() >= timeout {
                    let _ = fs::remove_file(&req_path);
                    return Err(Error::Timeout {
                        path: resp_path,
                        waited_s: started.elapsed().as_secs_f64(),
                    });
                }
                thread::sleep(poll_interval);
            }
            Err(e) => return Err(Error::io(&resp_path, e)),
        }
    };
    let _ = fs::remove_file(&resp_path);
    let _ = fs::remove_file(&req_path);

    let csv = parse_sample_csv(&text).map_err(|e| Error::MalformedResponse {
        path: resp_path.clone(),
        message: e.to_string(),
    })?;
    let expected = request.series_len();
    if csv.rows.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: csv.rows.len(),
        });
    }
    let fixations = csv
        .rows
        .iter()
        .map(|&(_, yaw, pitch)| Orientation::from_degrees(yaw, pitch))
        .collect();
    Ok(FixationSeries {
        sample_rate: request.sample_rate(),
        fixations,
    })
}

/// Writes a response atomically (temporary file, then rename), as an external model should.
pub fn write_response(exchange_dir: &Path, id: &str, series: &FixationSeries) -> Result<()> {
    let samples: Vec<_> = series
        .fixations
        .iter()
        .enumerate()
        .map(|(k, &o)| crate::traces::Sample::new(k as f64 / series.sample_rate, o))
        .collect();
    let body = write_samples(&format!("# rate_hz={}", series.sample_rate), &samples);
    let tmp = exchange_dir.join(format!(".resp_{id}.csv.tmp"));
    fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    let dest = response_path(exchange_dir, id);
    fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
}
