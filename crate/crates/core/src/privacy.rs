//! Degree of privacy (DoP) and the per-segment time windows it induces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::exact_split;

/// Share of the dataset's requests with no privacy requirement (81 of 198).
pub const DEFAULT_ZERO_MASS: f64 = 0.41;

/// Fraction of playback time during which behavior data must not leave the device.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Dop(f64);

impl Dop {
    pub const ZERO: Dop = Dop(0.0);

    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Precondition(format!("DoP must lie in [0, 1], got {rho}")));
        }
        Ok(Dop(rho))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Durations derived from a DoP for one segment of length `T_seg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPlan {
    /// Observation window: the privacy-permitted prefix of each segment.
    pub t_obw: f64,
    /// Private remainder of each segment.
    pub t_pv: f64,
    /// Budget for rendering plus transmission, from the end of the observation
    /// window to the playback of the predicted segment.
    pub t_cc: f64,
    /// Prediction window length when training a predictor.
    pub t_pdw_train: f64,
    /// Prediction window length at inference.
    pub t_pdw_infer: f64,
}

pub fn window_plan(rho: Dop, t_seg: f64) -> Result<WindowPlan> {
    if !(t_seg > 0.0) {
        return Err(Error::Precondition(format!(
            "segment duration must be positive, got {t_seg}"
        )));
    }
    let rho = rho.value();
    let (t_obw, t_pv) = exact_split(t_seg, (1.0 - rho) * t_seg);
    Ok(WindowPlan {
        t_obw,
        t_pv,
        t_cc: (1.0 + rho) * t_seg,
        t_pdw_train: t_obw,
        t_pdw_infer: t_seg,
    })
}

/// Draws a DoP: zero with probability `zero_mass`, otherwise uniform on `(0, 1]`.
pub fn sample_dop(zero_mass: f64, seed: u64) -> Result<Dop> {
    if !(0.0..=1.0).contains(&zero_mass) {
        return Err(Error::Precondition(format!(
            "zero mass must lie in [0, 1], got {zero_mass}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    if u < zero_mass {
        return Ok(Dop::ZERO);
    }
    // random() is in [0, 1), so 1 - v is in (0, 1].
    let v: f64 = rng.random();
    Ok(Dop(1.0 - v))
}
