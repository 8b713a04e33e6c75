//! Head-movement traces: CSV ingestion, resampling, per-segment ground truth
//! and privacy-limited observation slices.
//!
//! Trace files start with a `# rate_hz=<float>` header followed by one
//! `t_seconds,yaw_degrees,pitch_degrees` sample per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{fov_tiles, FovSpec, Orientation, TileGrid, TileSet};
use crate::privacy::WindowPlan;

/// Default sampling rate for traces, samples per second.
pub const DEFAULT_SAMPLE_RATE: f64 = 10.0;

/// Allowed deviation of sample spacing from `1 / f_s`, and slack used when
/// assigning timestamps to window boundaries.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub orientation: Orientation,
}

impl Sample {
    pub fn new(t: f64, orientation: Orientation) -> Self {
        Sample { t, orientation }
    }
}

/// A uniformly sampled head-orientation time series for one request.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadTrace {
    sample_rate: f64,
    samples: Vec<Sample>,
}

impl HeadTrace {
    pub fn new(sample_rate: f64, samples: Vec<Sample>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::Data(format!("sample rate must be positive, got {sample_rate}")));
        }
        if samples.is_empty() {
            return Err(Error::Data("trace has no samples".into()));
        }
        let period = 1.0 / sample_rate;
        for (i, pair) in samples.windows(2).enumerate() {
            let dt = pair[1].t - pair[0].t;
            if !(dt > 0.0) {
                return Err(Error::Data(format!(
                    "timestamps not strictly increasing at sample {} ({} then {})",
                    i + 1,
                    pair[0].t,
                    pair[1].t
                )));
            }
            if (dt - period).abs() > TIME_EPS {
                return Err(Error::Data(format!(
                    "sample {} is {dt} s after its predecessor, expected {period} s at {sample_rate} Hz",
                    i + 1
                )));
            }
        }
        Ok(HeadTrace { sample_rate, samples })
    }

    /// Builds a trace at `sample_rate` with timestamps `t0 + i / sample_rate`.
    pub fn from_orientations(
        sample_rate: f64,
        t0: f64,
        orientations: impl IntoIterator<Item = Orientation>,
    ) -> Result<Self> {
        let samples = orientations
            .into_iter()
            .enumerate()
            .map(|(i, o)| Sample::new(t0 + i as f64 / sample_rate, o))
            .collect();
        Self::new(sample_rate, samples)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.samples[0].t
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trace is never empty")
    }

    /// Time covered by the samples, each holding for one sample period.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Number of whole segments of length `t_seg` the trace covers.
    pub fn segment_count(&self, t_seg: f64) -> usize {
        (self.duration() / t_seg + TIME_EPS).floor() as usize
    }

    /// Samples whose time since the trace start lies in `[start, end)`.
    fn window(&self, start: f64, end: f64) -> Vec<Sample> {
        let t0 = self.start_time();
        self.samples
            .iter()
            .filter(|s| {
                let rel = s.t - t0;
                rel >= start - TIME_EPS && rel < end - TIME_EPS
            })
            .copied()
            .collect()
    }
}

/// Raw rows and `#`-header key/value pairs of a sample CSV.
#[derive(Debug, Clone, Default)]
pub struct SampleCsv {
    pub header: BTreeMap<String, f64>,
    /// `(t_seconds, yaw_degrees, pitch_degrees)` in file order.
    pub rows: Vec<(f64, f64, f64)>,
}

/// Parses the shared sample CSV layout: `#` lines carry whitespace-separated
/// `key=value` pairs, every other non-blank line is `t,yaw_deg,pitch_deg`.
pub fn parse_sample_csv(text: &str) -> Result<SampleCsv> {
    let mut csv = SampleCsv::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for token in rest.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else {
                    continue;
                };
                let value: f64 = value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("header value for `{key}` is not a number: `{value}`"),
                })?;
                csv.header.insert(key.to_string(), value);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 comma-separated fields, found {}", fields.len()),
            });
        }
        let mut values = [0.0; 3];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("not a finite number: `{field}`"),
                })?;
        }
        csv.rows.push((values[0], values[1], values[2]));
    }
    Ok(csv)
}

/// Parses a trace CSV. Yaw is wrapped into `[-180, 180)` degrees and pitch
/// clamped to `[-90, 90]`.
pub fn parse_trace(text: &str) -> Result<HeadTrace> {
    let csv = parse_sample_csv(text)?;
    let rate = *csv.header.get("rate_hz").ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing `# rate_hz=<float>` header".into(),
    })?;
    if csv.rows.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "trace has no samples".into(),
        });
    }
    let samples = csv
        .rows
        .iter()
        .map(|&(t, yaw, pitch)| Sample::new(t, Orientation::from_degrees(yaw, pitch)))
        .collect();
    HeadTrace::new(rate, samples)
}

/// Serializes sample rows in the trace CSV layout, after the given header line.
pub fn write_samples(header: &str, samples: &[Sample]) -> String {
    let mut out = String::with_capacity(32 * (samples.len() + 1));
    out.push_str(header);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            s.t,
            s.orientation.yaw_degrees(),
            s.orientation.pitch_degrees()
        );
    }
    out
}

pub fn write_trace(trace: &HeadTrace) -> String {
    write_samples(&format!("# rate_hz={}", trace.sample_rate), &trace.samples)
}

/// Resamples onto a uniform grid at `sample_rate` spanning the first to the
/// last timestamp, interpolating along great circles.
pub fn resample(trace: &HeadTrace, sample_rate: f64) -> Result<HeadTrace> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(Error::Precondition(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    let src = trace.samples();
    let t0 = src[0].t;
    if src.len() == 1 {
        return HeadTrace::new(sample_rate, vec![src[0]]);
    }
    let span = src[src.len() - 1].t - t0;
    let count = (span * sample_rate + TIME_EPS).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for k in 0..count {
        let t = t0 + k as f64 / sample_rate;
        while j + 2 < src.len() && src[j + 1].t <= t + TIME_EPS {
            j += 1;
        }
        let (a, b) = (&src[j], &src[j + 1]);
        let orientation = if (t - a.t).abs() <= TIME_EPS {
            a.orientation
        } else if (t - b.t).abs() <= TIME_EPS {
            b.orientation
        } else {
            let frac = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
            a.orientation.slerp(&b.orientation, frac)
        };
        out.push(Sample::new(t, orientation));
    }
    HeadTrace::new(sample_rate, out)
}

/// Tiles actually requested during segment `l` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTruth {
    pub segment: usize,
    pub requested: TileSet,
}

/// Per-segment requested tiles: the union of the FoVs of every sample in the segment.
pub fn ground_truth(trace: &HeadTrace, grid: &TileGrid, fov: &FovSpec, t_seg: f64) -> Result<Vec<SegmentTruth>> {
    if !(t_seg > 0.0) {
        return Err(Error::Precondition(format!(
            "segment duration must be positive, got {t_seg}"
        )));
    }
    let segments = trace.segment_count(t_seg);
    if segments == 0 {
        return Err(Error::Precondition(format!(
            "trace lasts {} s, shorter than one {t_seg} s segment",
            trace.duration()
        )));
    }
    let mut truths: Vec<SegmentTruth> = (1..=segments)
        .map(|segment| SegmentTruth {
            segment,
            requested: TileSet::empty(grid.tile_count()),
        })
        .collect();
    let t0 = trace.start_time();
    for s in trace.samples() {
        let index = ((s.t - t0) / t_seg + TIME_EPS).floor() as usize;
        if let Some(truth) = truths.get_mut(index) {
            truth.requested.union_with(&fov_tiles(grid, &s.orientation, fov));
        }
    }
    Ok(truths)
}

/// The privacy-permitted prefix `[(l-1) T_seg, (l-1) T_seg + t_obw)` of segment `l`.
pub fn observation_slice(trace: &HeadTrace, segment: usize, plan: &WindowPlan, t_seg: f64) -> Result<HeadTrace> {
    let segments = trace.segment_count(t_seg);
    if segment == 0 || segment > segments {
        return Err(Error::Precondition(format!("segment {segment} outside 1..={segments}")));
    }
    if !(plan.t_obw > 0.0) {
        return Err(Error::Precondition(
            "observation window is empty (DoP = 1): no behavior data may be uploaded".into(),
        ));
    }
    let start = (segment - 1) as f64 * t_seg;
    let samples = trace.window(start, start + plan.t_obw);
    if samples.is_empty() {
        return Err(Error::Precondition(format!(
            "observation window of {} s holds no sample at {} Hz; raise the sample rate or lower the DoP",
            plan.t_obw,
            trace.sample_rate()
        )));
    }
    HeadTrace::new(trace.sample_rate(), samples)
}
