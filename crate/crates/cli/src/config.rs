//! `key=value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Command-line flags are applied on
//! top of the file, so a flag always wins over the same key in the file.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "t_seg",
    "m",
    "tile_cols",
    "tile_rows",
    "fov_half_angle_deg",
    "sample_rate_hz",
    "l0",
    "n_fov",
    "zero_mass",
    "seed",
    "predictor",
    "selection",
    "velocity_window",
    "exchange_dir",
    "external_timeout_s",
    "rho",
    "rho_grid",
    "inv_grid",
    "slice_inv",
    "inv_t_cc_m",
    "c_com",
    "c_cpt",
    "s_com",
    "s_cpt",
    "flops",
    "flops_per_bit",
    "px_w",
    "px_h",
    "bits_per_pixel",
    "frame_rate",
    "compression_ratio",
    "bandwidth_hz",
    "power_w",
    "distance_m",
    "path_loss_exp",
    "noise_w",
    "antennas",
    "users",
    "slot_s",
    "mc_samples",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKind {
    NoMotion,
    Extrapolate,
    External,
}

impl PredictorKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "no-motion" => Some(PredictorKind::NoMotion),
            "extrapolate" => Some(PredictorKind::Extrapolate),
            "external" => Some(PredictorKind::External),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub t_seg: f64,
    pub m: usize,
    pub tile_cols: usize,
    pub tile_rows: usize,
    pub fov_half_angle_deg: f64,
    pub sample_rate_hz: f64,
    pub l0: usize,
    pub n_fov: usize,
    pub zero_mass: f64,
    pub seed: u64,
    pub predictor: PredictorKind,
    pub selection: tilecast_core::simulator::SelectionScheme,
    pub velocity_window: usize,
    pub exchange_dir: Option<PathBuf>,
    pub external_timeout_s: f64,
    pub rho: Option<f64>,
    pub rho_grid: Vec<f64>,
    pub inv_grid: Vec<f64>,
    pub slice_inv: f64,
    pub inv_t_cc_m: Option<f64>,
    pub c_com: Option<f64>,
    pub c_cpt: Option<f64>,
    pub s_com: Option<f64>,
    pub s_cpt: Option<f64>,
    pub flops: Option<f64>,
    pub flops_per_bit: Option<f64>,
    pub px_w: Option<f64>,
    pub px_h: Option<f64>,
    pub bits_per_pixel: Option<f64>,
    pub frame_rate: Option<f64>,
    pub compression_ratio: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub power_w: Option<f64>,
    pub distance_m: Option<f64>,
    pub path_loss_exp: Option<f64>,
    pub noise_w: Option<f64>,
    pub antennas: Option<usize>,
    pub users: Option<usize>,
    pub slot_s: Option<f64>,
    pub mc_samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            t_seg: 1.0,
            m: 200,
            tile_cols: 20,
            tile_rows: 10,
            fov_half_angle_deg: 50.0,
            sample_rate_hz: 10.0,
            l0: 3,
            n_fov: 33,
            zero_mass: tilecast_core::privacy::DEFAULT_ZERO_MASS,
            seed: 0,
            predictor: PredictorKind::NoMotion,
            selection: Default::default(),
            velocity_window: 5,
            exchange_dir: None,
            external_timeout_s: 30.0,
            rho: None,
            rho_grid: grid(0.0, 0.8, 0.1),
            inv_grid: grid(0.05, 1.0, 0.05),
            slice_inv: 0.17,
            inv_t_cc_m: None,
            c_com: None,
            c_cpt: None,
            s_com: None,
            s_cpt: None,
            flops: None,
            flops_per_bit: None,
            px_w: None,
            px_h: None,
            bits_per_pixel: None,
            frame_rate: None,
            compression_ratio: None,
            bandwidth_hz: None,
            power_w: None,
            distance_m: None,
            path_loss_exp: None,
            noise_w: None,
            antennas: None,
            users: None,
            slot_s: None,
            mc_samples: tilecast_core::resources::DEFAULT_MC_SAMPLES,
        }
    }
}

/// `start, start + step, ...` up to `stop` inclusive, rounded to 12 decimals
/// so that grid values print as written.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// Parses `start:stop:step` or a comma-separated list.
pub fn parse_grid(value: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        if !(nums[2] > 0.0) || nums[1] < nums[0] {
            return None;
        }
        return Some(grid(nums[0], nums[1], nums[2]));
    }
    let values: Vec<f64> = value.split(',').map(|v| v.trim().parse().ok()).collect::<Option<_>>()?;
    (!values.is_empty()).then_some(values)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value for `{key}`: `{value}`")))
}

impl Config {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "t_seg" => self.t_seg = num(key, v)?,
            "m" => self.m = num(key, v)?,
            "tile_cols" => self.tile_cols = num(key, v)?,
            "tile_rows" => self.tile_rows = num(key, v)?,
            "fov_half_angle_deg" => self.fov_half_angle_deg = num(key, v)?,
            "sample_rate_hz" => self.sample_rate_hz = num(key, v)?,
            "l0" => self.l0 = num(key, v)?,
            "n_fov" => self.n_fov = num(key, v)?,
            "zero_mass" => self.zero_mass = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "predictor" => {
                self.predictor = PredictorKind::parse(v).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown predictor `{v}`; expected no-motion, extrapolate or external"
                    ))
                })?
            }
            "selection" => {
                use tilecast_core::simulator::SelectionScheme;
                self.selection = match v {
                    "around-fixations" => SelectionScheme::AroundFixations,
                    "top-probability" => SelectionScheme::TopProbability,
                    _ => {
                        return Err(CliError::Usage(format!(
                            "unknown selection `{v}`; expected around-fixations or top-probability"
                        )))
                    }
                }
            }
            "velocity_window" => self.velocity_window = num(key, v)?,
            "exchange_dir" => self.exchange_dir = Some(PathBuf::from(v)),
            "external_timeout_s" => self.external_timeout_s = num(key, v)?,
            "rho" => self.rho = Some(num(key, v)?),
            "rho_grid" => {
                self.rho_grid =
                    parse_grid(v).ok_or_else(|| CliError::Usage(format!("invalid grid for `rho_grid`: `{v}`")))?
            }
            "inv_grid" => {
                self.inv_grid =
                    parse_grid(v).ok_or_else(|| CliError::Usage(format!("invalid grid for `inv_grid`: `{v}`")))?
            }
            "slice_inv" => self.slice_inv = num(key, v)?,
            "inv_t_cc_m" => self.inv_t_cc_m = Some(num(key, v)?),
            "c_com" => self.c_com = Some(num(key, v)?),
            "c_cpt" => self.c_cpt = Some(num(key, v)?),
            "s_com" => self.s_com = Some(num(key, v)?),
            "s_cpt" => self.s_cpt = Some(num(key, v)?),
            "flops" => self.flops = Some(num(key, v)?),
            "flops_per_bit" => self.flops_per_bit = Some(num(key, v)?),
            "px_w" => self.px_w = Some(num(key, v)?),
            "px_h" => self.px_h = Some(num(key, v)?),
            "bits_per_pixel" => self.bits_per_pixel = Some(num(key, v)?),
            "frame_rate" => self.frame_rate = Some(num(key, v)?),
            "compression_ratio" => self.compression_ratio = Some(num(key, v)?),
            "bandwidth_hz" => self.bandwidth_hz = Some(num(key, v)?),
            "power_w" => self.power_w = Some(num(key, v)?),
            "distance_m" => self.distance_m = Some(num(key, v)?),
            "path_loss_exp" => self.path_loss_exp = Some(num(key, v)?),
            "noise_w" => self.noise_w = Some(num(key, v)?),
            "antennas" => self.antennas = Some(num(key, v)?),
            "users" => self.users = Some(num(key, v)?),
            "slot_s" => self.slot_s = Some(num(key, v)?),
            "mc_samples" => self.mc_samples = num(key, v)?,
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown config key `{key}`; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got `{line}`", i + 1)))?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.t_seg > 0.0) {
            return Err(CliError::Usage(format!("t_seg must be positive, got {}", self.t_seg)));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(CliError::Usage(format!(
                "sample_rate_hz must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if self.m == 0 {
            return Err(CliError::Usage("m must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.zero_mass) {
            return Err(CliError::Usage(format!(
                "zero_mass must lie in [0, 1], got {}",
                self.zero_mass
            )));
        }
        if let Some(rho) = self.rho {
            if !(0.0..=1.0).contains(&rho) {
                return Err(CliError::Usage(format!("rho must lie in [0, 1], got {rho}")));
            }
        }
        Ok(())
    }
}

/// Reads a config file; a missing or unreadable file is a usage error.
pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    Config::parse(&text)
}
