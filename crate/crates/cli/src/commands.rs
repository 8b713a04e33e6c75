//! Subcommand bodies. Each returns its output so that callers decide where it goes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use tilecast_core::geometry::{FovSpec, TileGrid};
use tilecast_core::predictors::{ExternalPredictor, Extrapolate, NoMotion, Predictor, EXCHANGE_DIR_ENV};
use tilecast_core::privacy::Dop;
use tilecast_core::resources::{
    computing_rate, ergodic_rate, tile_bits, ComputeConfig, RadioConfig, ResourceRates, TileSizeSpec,
};
use tilecast_core::scheduler::{cc_capability, region, solve};
use tilecast_core::simulator::{run_sweep, SimConfig};
use tilecast_core::traces::{parse_trace, resample, write_trace, HeadTrace};

use crate::config::{Config, PredictorKind};
use crate::error::CliError;
use crate::synth::{generate, SynthParams, TraceKind};

pub const SURFACE_FILE: &str = "qoe_surface.csv";
pub const SLICE_FILE: &str = "slice.csv";
pub const REGION_MAP_HEADER: &str = "rho,inv_T_cc_M,C_cc,region";
pub const SURFACE_HEADER: &str = "rho,inv_T_cc_M,mean_qoe";
pub const SLICE_HEADER: &str = "rho,C_cc,mean_doo,mean_qoe";

/// Nine decimals with trailing zeros removed: `0.4`, `40`, `0.2`.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn dop(rho: f64) -> Result<Dop, CliError> {
    Dop::new(rho).map_err(|e| CliError::Usage(e.to_string()))
}

fn all_set<const N: usize>(values: [Option<f64>; N]) -> Option<[f64; N]> {
    let mut out = [0.0; N];
    for (o, v) in out.iter_mut().zip(values) {
        *o = v?;
    }
    Some(out)
}

/// Tile sizes from direct values or from the raw-video parameters.
fn tile_sizes(cfg: &Config) -> Result<Option<(f64, f64)>, CliError> {
    if let (Some(s_com), Some(s_cpt)) = (cfg.s_com, cfg.s_cpt) {
        return Ok(Some((s_com, s_cpt)));
    }
    match all_set([
        cfg.px_w,
        cfg.px_h,
        cfg.bits_per_pixel,
        cfg.frame_rate,
        cfg.compression_ratio,
    ]) {
        Some([px_w, px_h, bits_per_pixel, frame_rate, compression_ratio]) => {
            let spec = TileSizeSpec {
                px_w,
                px_h,
                bits_per_pixel,
                frame_rate,
                compression_ratio,
            };
            Ok(Some(
                tile_bits(&spec, cfg.t_seg).map_err(|e| CliError::Usage(e.to_string()))?,
            ))
        }
        None => Ok(None),
    }
}

fn compute_rate(cfg: &Config) -> Option<f64> {
    cfg.c_cpt.or_else(|| {
        let [flops, flops_per_bit] = all_set([cfg.flops, cfg.flops_per_bit])?;
        Some(computing_rate(&ComputeConfig { flops, flops_per_bit }))
    })
}

fn radio(cfg: &Config) -> Option<RadioConfig> {
    let [bandwidth_hz, power_w, distance_m, path_loss_exp, noise_w, slot_s] = all_set([
        cfg.bandwidth_hz,
        cfg.power_w,
        cfg.distance_m,
        cfg.path_loss_exp,
        cfg.noise_w,
        cfg.slot_s,
    ])?;
    Some(RadioConfig {
        bandwidth_hz,
        power_w,
        distance_m,
        path_loss_exp,
        noise_w,
        antennas: cfg.antennas?,
        users: cfg.users?,
        slot_s,
    })
}

fn communication_rate(cfg: &Config) -> Result<Option<f64>, CliError> {
    if let Some(c) = cfg.c_com {
        return Ok(Some(c));
    }
    match radio(cfg) {
        Some(r) => {
            r.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Some(ergodic_rate(&r, cfg.mc_samples, cfg.seed)?))
        }
        None => Ok(None),
    }
}

/// Rates from, in order of preference: direct or derived `C_com`/`C_cpt`
/// with tile sizes, or `inv_t_cc_m` alone.
pub fn resolve_rates(cfg: &Config) -> Result<ResourceRates, CliError> {
    let sizes = tile_sizes(cfg)?;
    let c_cpt = compute_rate(cfg);
    let c_com = communication_rate(cfg)?;
    if let (Some(c_com), Some(c_cpt), Some((s_com, s_cpt))) = (c_com, c_cpt, sizes) {
        return ResourceRates::new(c_com, c_cpt, s_com, s_cpt, cfg.m).map_err(Into::into);
    }
    if let Some(inv) = cfg.inv_t_cc_m {
        let (s_com, s_cpt) = sizes.unwrap_or((1.0, 1.0));
        return ResourceRates::from_inv_t_cc_m(inv, s_com, s_cpt, cfg.m).map_err(Into::into);
    }
    let mut missing = Vec::new();
    if c_com.is_none() {
        missing.push("c_com (or the radio keys)");
    }
    if c_cpt.is_none() {
        missing.push("c_cpt (or flops and flops_per_bit)");
    }
    if sizes.is_none() {
        missing.push("s_com and s_cpt (or the tile video keys)");
    }
    Err(CliError::Usage(format!(
        "resources underspecified: set inv_t_cc_m or {}",
        missing.join(", ")
    )))
}

pub fn cmd_solve(cfg: &Config) -> Result<String, CliError> {
    cfg.validate()?;
    let rho = dop(cfg
        .rho
        .ok_or_else(|| CliError::Usage("missing required flag --rho".into()))?)?;
    let rates = resolve_rates(cfg)?;
    let s = solve(rho, cfg.t_seg, &rates, cfg.m)?;
    let lines = [
        ("T_cc_M", fmt_num(rates.t_cc_m())),
        ("t_com", fmt_num(s.t_com)),
        ("t_cpt", fmt_num(s.t_cpt)),
        ("C_cc", fmt_num(s.c_cc)),
        ("C_cc_continuous", fmt_num(s.c_cc_continuous)),
        ("N", s.n_tiles.to_string()),
        ("region", s.region.to_string()),
    ];
    Ok(lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect())
}

/// Smallest `1/T_cc^M` at which `rho` saturates.
fn boundary_inv(rho: Dop, t_seg: f64) -> f64 {
    let mut inv = 1.0 / ((1.0 + rho.value()) * t_seg);
    while (1.0 + rho.value()) * t_seg * inv < 1.0 {
        inv = f64::from_bits(inv.to_bits() + 1);
    }
    inv
}

/// Grid rows, then one boundary row per DoP.
pub fn cmd_region_map(cfg: &Config) -> Result<String, CliError> {
    cfg.validate()?;
    let mut out = String::from(REGION_MAP_HEADER);
    out.push('\n');
    let row = |out: &mut String, rho: Dop, inv: f64| {
        let c = cc_capability(rho, cfg.t_seg, inv);
        out.push_str(&format!(
            "{},{},{},{}\n",
            rho.value(),
            inv,
            c,
            region(rho, cfg.t_seg, inv)
        ));
    };
    let rhos: Vec<Dop> = cfg.rho_grid.iter().map(|&r| dop(r)).collect::<Result<_, _>>()?;
    for &rho in &rhos {
        for &inv in &cfg.inv_grid {
            if !(inv > 0.0) {
                return Err(CliError::Usage(format!(
                    "inv_T_cc_M grid values must be positive, got {inv}"
                )));
            }
            row(&mut out, rho, inv);
        }
    }
    for &rho in &rhos {
        row(&mut out, rho, boundary_inv(rho, cfg.t_seg));
    }
    Ok(out)
}

/// Reads every `*.csv` in `dir`, in file-name order, resampled to `sample_rate`.
pub fn load_traces(dir: &Path, sample_rate: f64) -> Result<Vec<HeadTrace>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::MissingData(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::MissingData(format!("no .csv traces in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::MissingData(format!("{}: {e}", p.display())))?;
            let trace = parse_trace(&text).map_err(|e| CliError::MissingData(format!("{}: {e}", p.display())))?;
            if trace.sample_rate() == sample_rate {
                Ok(trace)
            } else {
                Ok(resample(&trace, sample_rate)?)
            }
        })
        .collect()
}

pub fn sim_config(cfg: &Config) -> Result<SimConfig, CliError> {
    let grid = TileGrid::new(cfg.tile_cols, cfg.tile_rows).map_err(|e| CliError::Usage(e.to_string()))?;
    if grid.tile_count() != cfg.m {
        return Err(CliError::Usage(format!(
            "m = {} does not match the {}x{} tile grid",
            cfg.m, cfg.tile_cols, cfg.tile_rows
        )));
    }
    let fov = FovSpec::from_degrees(cfg.fov_half_angle_deg).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(SimConfig {
        t_seg: cfg.t_seg,
        grid,
        fov,
        l0: cfg.l0,
        n_fov: cfg.n_fov,
        scheme: cfg.selection,
    })
}

pub fn build_predictor(cfg: &Config) -> Result<Box<dyn Predictor>, CliError> {
    Ok(match cfg.predictor {
        PredictorKind::NoMotion => Box::new(NoMotion),
        PredictorKind::Extrapolate => Box::new(Extrapolate {
            velocity_window: cfg.velocity_window,
        }),
        PredictorKind::External => {
            let dir = cfg
                .exchange_dir
                .clone()
                .or_else(|| std::env::var_os(EXCHANGE_DIR_ENV).map(PathBuf::from))
                .ok_or_else(|| {
                    CliError::Usage(format!("external predictor needs exchange_dir or {EXCHANGE_DIR_ENV}"))
                })?;
            if !(cfg.external_timeout_s > 0.0) {
                return Err(CliError::Usage("external_timeout_s must be positive".into()));
            }
            Box::new(ExternalPredictor::new(dir).with_timeout(Duration::from_secs_f64(cfg.external_timeout_s)))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepCsv {
    pub surface: String,
    pub slice: String,
}

/// Runs the sweep over `traces` and renders both CSV files.
pub fn sweep_csv(cfg: &Config, traces: &[HeadTrace], predictor: &dyn Predictor) -> Result<SweepCsv, CliError> {
    cfg.validate()?;
    let sim = sim_config(cfg)?;
    let rhos: Vec<Dop> = cfg.rho_grid.iter().map(|&r| dop(r)).collect::<Result<_, _>>()?;
    if rhos.iter().any(|r| r.value() >= 1.0) {
        return Err(CliError::Usage("sweep DoP values must be below 1".into()));
    }
    for &inv in cfg.inv_grid.iter().chain([&cfg.slice_inv]) {
        if !(inv > 0.0 && inv.is_finite()) {
            return Err(CliError::Usage(format!(
                "inv_T_cc_M values must be positive, got {inv}"
            )));
        }
    }
    let mut invs = cfg.inv_grid.clone();
    let slice_index = match invs.iter().position(|&v| v == cfg.slice_inv) {
        Some(i) => i,
        None => {
            invs.push(cfg.slice_inv);
            invs.len() - 1
        }
    };
    let table = run_sweep(traces, &rhos, &invs, &sim, predictor)?;

    let mut surface = format!("{SURFACE_HEADER}\n");
    let mut slice = format!("{SLICE_HEADER}\n");
    for r in 0..rhos.len() {
        for i in 0..cfg.inv_grid.len() {
            let c = table.cell(r, i);
            surface.push_str(&format!("{},{},{}\n", c.rho, c.inv_t_cc_m, c.mean_qoe));
        }
        let c = table.cell(r, slice_index);
        slice.push_str(&format!(
            "{},{},{},{}\n",
            c.rho, c.schedule.c_cc, c.mean_doo, c.mean_qoe
        ));
    }
    Ok(SweepCsv { surface, slice })
}

/// Loads traces, sweeps, and writes both CSV files into `out_dir`.
pub fn cmd_sweep(cfg: &Config, trace_dir: &Path, out_dir: &Path) -> Result<SweepCsv, CliError> {
    cfg.validate()?;
    let traces = load_traces(trace_dir, cfg.sample_rate_hz)?;
    let predictor = build_predictor(cfg)?;
    let csv = sweep_csv(cfg, &traces, predictor.as_ref())?;
    let io = |p: PathBuf, e: std::io::Error| CliError::Core(tilecast_core::Error::Io { path: p, source: e });
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir.to_path_buf(), e))?;
    for (name, body) in [(SURFACE_FILE, &csv.surface), (SLICE_FILE, &csv.slice)] {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| io(path, e))?;
    }
    Ok(csv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Single(TraceKind),
    /// Alternates constant-velocity and random-walk traces.
    Mixed,
}

impl CorpusKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mixed" => Some(CorpusKind::Mixed),
            "constant-velocity" => Some(CorpusKind::Single(TraceKind::ConstantVelocity)),
            "random-walk" => Some(CorpusKind::Single(TraceKind::RandomWalk)),
            _ => None,
        }
    }

    pub fn kind_of(self, index: u64) -> TraceKind {
        match self {
            CorpusKind::Single(k) => k,
            CorpusKind::Mixed if index % 2 == 0 => TraceKind::ConstantVelocity,
            CorpusKind::Mixed => TraceKind::RandomWalk,
        }
    }
}

/// Generates `count` traces in memory.
pub fn synth_corpus(
    kind: CorpusKind,
    params: &SynthParams,
    count: usize,
    seed: u64,
) -> Result<Vec<HeadTrace>, CliError> {
    (0..count as u64)
        .map(|i| Ok(generate(kind.kind_of(i), params, seed, i)?))
        .collect()
}

/// Writes `trace_000.csv`, `trace_001.csv`, ... into `out_dir`.
pub fn cmd_gen_traces(
    out_dir: &Path,
    kind: CorpusKind,
    params: &SynthParams,
    count: usize,
    seed: u64,
) -> Result<Vec<PathBuf>, CliError> {
    if !(params.sample_rate > 0.0 && params.duration_s > 0.0) {
        return Err(CliError::Usage("rate and duration must be positive".into()));
    }
    let io = |p: &Path, e: std::io::Error| {
        CliError::Core(tilecast_core::Error::Io {
            path: p.to_path_buf(),
            source: e,
        })
    };
    fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let width = count.saturating_sub(1).to_string().len().max(3);
    let traces = synth_corpus(kind, params, count, seed)?;
    let mut paths = Vec::with_capacity(count);
    for (i, trace) in traces.iter().enumerate() {
        let path = out_dir.join(format!("trace_{i:0width$}.csv"));
        fs::write(&path, write_trace(trace)).map_err(|e| io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}
