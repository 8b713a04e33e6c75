//! Seeded synthetic head-movement traces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tilecast_core::geometry::Orientation;
use tilecast_core::traces::HeadTrace;
use tilecast_core::Result;

/// Pitch is kept away from the poles so yaw stays meaningful.
const PITCH_LIMIT_DEG: f64 = 85.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Fixed yaw speed with a random sign, fixed pitch.
    ConstantVelocity,
    /// Mean-reverting yaw velocity and pitch.
    RandomWalk,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::ConstantVelocity => "constant-velocity",
            TraceKind::RandomWalk => "random-walk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub sample_rate: f64,
    pub duration_s: f64,
    pub yaw_speed_deg: f64,
    pub pitch_sigma_deg: f64,
    /// Stationary spread of the random-walk yaw velocity, deg/s.
    pub yaw_velocity_sigma_deg: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            sample_rate: 10.0,
            duration_s: 60.0,
            yaw_speed_deg: 20.0,
            pitch_sigma_deg: 20.0,
            yaw_velocity_sigma_deg: 30.0,
        }
    }
}

fn clamp_pitch(deg: f64) -> f64 {
    deg.clamp(-PITCH_LIMIT_DEG, PITCH_LIMIT_DEG)
}

/// Trace `index` of a corpus; each index draws from its own stream of `seed`.
pub fn generate(kind: TraceKind, params: &SynthParams, seed: u64, index: u64) -> Result<HeadTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = (params.duration_s * params.sample_rate).round() as usize;
    let dt = 1.0 / params.sample_rate;
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let yaw0 = rng.random_range(-180.0..180.0);
    let pitch0 = clamp_pitch(params.pitch_sigma_deg * std.sample(&mut rng));

    let orientations: Vec<Orientation> = match kind {
        TraceKind::ConstantVelocity => {
            let speed = if rng.random::<bool>() {
                params.yaw_speed_deg
            } else {
                -params.yaw_speed_deg
            };
            (0..n)
                .map(|i| Orientation::from_degrees(yaw0 + speed * i as f64 * dt, pitch0))
                .collect()
        }
        TraceKind::RandomWalk => {
            let (theta_v, theta_p) = (1.0f64, 0.5f64);
            let sigma_v = params.yaw_velocity_sigma_deg * (2.0 * theta_v).sqrt();
            let sigma_p = params.pitch_sigma_deg * (2.0 * theta_p).sqrt();
            let mut yaw = yaw0;
            let mut pitch = pitch0;
            let mut vel = params.yaw_velocity_sigma_deg * std.sample(&mut rng);
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push(Orientation::from_degrees(yaw, pitch));
                vel += -theta_v * vel * dt + sigma_v * dt.sqrt() * std.sample(&mut rng);
                yaw += vel * dt;
                pitch = clamp_pitch(pitch - theta_p * pitch * dt + sigma_p * dt.sqrt() * std.sample(&mut rng));
            }
            out
        }
    };
    HeadTrace::from_orientations(params.sample_rate, 0.0, orientations)
}
