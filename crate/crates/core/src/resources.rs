//! Tile sizes and the computing and communication rates available to one request.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Raw-video parameters of a single tile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileSizeSpec {
    pub px_w: f64,
    pub px_h: f64,
    pub bits_per_pixel: f64,
    pub frame_rate: f64,
    pub compression_ratio: f64,
}

impl TileSizeSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("px_w", self.px_w),
            ("px_h", self.px_h),
            ("bits_per_pixel", self.bits_per_pixel),
            ("frame_rate", self.frame_rate),
            ("compression_ratio", self.compression_ratio),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Bits per tile per segment: `(s_com, s_cpt)`, compressed for delivery and raw for rendering.
pub fn tile_bits(spec: &TileSizeSpec, t_seg: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(t_seg > 0.0) {
        return Err(Error::Precondition(format!(
            "segment duration must be positive, got {t_seg}"
        )));
    }
    let s_cpt = spec.px_w * spec.px_h * spec.bits_per_pixel * spec.frame_rate * t_seg;
    Ok((s_cpt / spec.compression_ratio, s_cpt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeConfig {
    /// Rendering capacity assigned to the request, FLOPS.
    pub flops: f64,
    /// Rendering cost, FLOPs per bit.
    pub flops_per_bit: f64,
}

/// Bits rendered per second.
pub fn computing_rate(cfg: &ComputeConfig) -> f64 {
    cfg.flops / cfg.flops_per_bit
}

/// Zero-forcing downlink from an `antennas`-element base station to `users` single-antenna users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    pub power_w: f64,
    pub distance_m: f64,
    pub path_loss_exp: f64,
    pub noise_w: f64,
    pub antennas: usize,
    pub users: usize,
    pub slot_s: f64,
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.antennas < self.users {
            return Err(Error::Precondition(format!(
                "need antennas >= users >= 1, got {} antennas and {} users",
                self.antennas, self.users
            )));
        }
        let fields = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("distance_m", self.distance_m),
            ("path_loss_exp", self.path_loss_exp),
            ("noise_w", self.noise_w),
            ("slot_s", self.slot_s),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.power_w >= 0.0) {
            return Err(Error::Precondition(format!(
                "power_w must be non-negative, got {}",
                self.power_w
            )));
        }
        Ok(())
    }

    /// Average received SNR before beamforming gain, `p d^-alpha / sigma^2`.
    pub fn mean_snr(&self) -> f64 {
        self.power_w * self.distance_m.powf(-self.path_loss_exp) / self.noise_w
    }

    /// Shape of the Gamma-distributed zero-forcing gain, `N_t - K + 1`.
    pub fn gain_shape(&self) -> usize {
        self.antennas - self.users + 1
    }

    /// Slots that fit in a transmission of `t_com` seconds.
    pub fn slot_count(&self, t_com: f64) -> usize {
        (t_com / self.slot_s).floor() as usize
    }
}

/// Monte-Carlo ensemble-average rate `E[B log2(1 + snr * g)]` with the
/// zero-forcing gain `g ~ Gamma(N_t - K + 1, 1)`.
///
/// Draw `i` uses its own ChaCha stream, and the gain is a sum of unit
/// exponentials, so estimates for different antenna counts share random
/// numbers and the result does not depend on thread scheduling.
pub fn ergodic_rate(radio: &RadioConfig, n_samples: usize, seed: u64) -> Result<f64> {
    radio.validate()?;
    if n_samples == 0 {
        return Err(Error::Precondition("need at least one Monte-Carlo sample".into()));
    }
    let snr = radio.mean_snr();
    if snr == 0.0 {
        return Ok(0.0);
    }
    let shape = radio.gain_shape();
    let terms: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let gain: f64 = (0..shape).map(|_| -(1.0 - rng.random::<f64>()).ln()).sum();
            (snr * gain).ln_1p() / std::f64::consts::LN_2
        })
        .collect();
    let mean = terms.iter().sum::<f64>() / n_samples as f64;
    Ok(radio.bandwidth_hz * mean)
}

/// Per-request rates and tile sizes, with the derived saturation constant `1 / T_cc^M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceRates {
    pub c_com: f64,
    pub c_cpt: f64,
    pub s_com: f64,
    pub s_cpt: f64,
    pub inv_t_cc_m: f64,
}

impl ResourceRates {
    pub fn new(c_com: f64, c_cpt: f64, s_com: f64, s_cpt: f64, tile_count: usize) -> Result<Self> {
        for (name, value) in [("C_com", c_com), ("C_cpt", c_cpt)] {
            if !(value > 0.0) {
                return Err(Error::Infeasible(format!("{name} must be positive, got {value}")));
            }
        }
        for (name, value) in [("s_com", s_com), ("s_cpt", s_cpt)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be positive, got {value}")));
            }
        }
        if tile_count == 0 {
            return Err(Error::Precondition("tile count must be positive".into()));
        }
        let mut rates = ResourceRates {
            c_com,
            c_cpt,
            s_com,
            s_cpt,
            inv_t_cc_m: 0.0,
        };
        rates.inv_t_cc_m = 1.0 / t_cc_max(&rates, tile_count);
        Ok(rates)
    }

    /// Rates realizing a given `1 / T_cc^M`, with delivering and rendering all
    /// tiles taking equally long.
    pub fn from_inv_t_cc_m(inv_t_cc_m: f64, s_com: f64, s_cpt: f64, tile_count: usize) -> Result<Self> {
        if !(inv_t_cc_m > 0.0 && inv_t_cc_m.is_finite()) {
            return Err(Error::Infeasible(format!(
                "1/T_cc^M must be positive, got {inv_t_cc_m}"
            )));
        }
        let m = tile_count as f64;
        let half = 0.5 / inv_t_cc_m;
        Self::new(s_com * m / half, s_cpt * m / half, s_com, s_cpt, tile_count)
    }

    /// `T_cc^M` for the tile count these rates were built with.
    pub fn t_cc_m(&self) -> f64 {
        1.0 / self.inv_t_cc_m
    }
}

/// Time to render and deliver all `M` tiles of one segment.
pub fn t_cc_max(rates: &ResourceRates, tile_count: usize) -> f64 {
    let m = tile_count as f64;
    rates.s_com * m / rates.c_com + rates.s_cpt * m / rates.c_cpt
}
