//! Command-line front end for `tilecast-core`: schedule solving, region maps,
//! DoP sweeps and synthetic trace generation.

pub mod commands;
pub mod config;
pub mod error;
pub mod synth;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{load_config, Config};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "tilecast",
    version,
    about = "Privacy-aware proactive 360° tile streaming simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// key=value config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Set any config key, e.g. `--set n_fov=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub sets: Vec<String>,
    #[arg(long, global = true)]
    pub t_seg: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the optimal schedule for one request.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        c_com: Option<String>,
        #[arg(long)]
        c_cpt: Option<String>,
        #[arg(long)]
        s_com: Option<String>,
        #[arg(long)]
        s_cpt: Option<String>,
        #[arg(long)]
        inv_t_cc_m: Option<String>,
    },
    /// CSV of CC capability and region over a (rho, 1/T_cc^M) grid.
    RegionMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho_grid: Option<String>,
        #[arg(long)]
        inv_grid: Option<String>,
    },
    /// Sweep DoP and resources over a trace directory.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// no-motion, extrapolate or external.
        #[arg(long)]
        predictor: Option<String>,
        #[arg(long)]
        rho_grid: Option<String>,
        #[arg(long)]
        inv_grid: Option<String>,
        #[arg(long)]
        slice_inv: Option<String>,
        #[arg(long)]
        exchange_dir: Option<String>,
    },
    /// Write a seeded synthetic trace corpus.
    GenTraces {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        count: usize,
        /// mixed, constant-velocity or random-walk.
        #[arg(long, default_value = "mixed")]
        kind: String,
        #[arg(long, default_value_t = 60.0)]
        duration_s: f64,
        #[arg(long, default_value_t = 10.0)]
        rate_hz: f64,
        #[arg(long, default_value_t = 20.0)]
        yaw_speed_deg: f64,
        #[arg(long, default_value_t = 20.0)]
        pitch_sigma_deg: f64,
    },
}

fn build_config(common: &Common, flags: &[(&str, &Option<String>)]) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    for set in &common.sets {
        let (k, v) = set
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{set}`")))?;
        cfg.set(k.trim(), v)?;
    }
    let common_flags = [("t_seg", &common.t_seg), ("seed", &common.seed)];
    for (key, value) in common_flags.iter().chain(flags) {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Executes a parsed command, writing normal output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let write = |out: &mut dyn Write, s: &str| {
        out.write_all(s.as_bytes()).map_err(|e| {
            CliError::Core(tilecast_core::Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        })
    };
    match cli.command {
        Command::Solve {
            common,
            rho,
            m,
            c_com,
            c_cpt,
            s_com,
            s_cpt,
            inv_t_cc_m,
        } => {
            let cfg = build_config(
                &common,
                &[
                    ("rho", &rho),
                    ("m", &m),
                    ("c_com", &c_com),
                    ("c_cpt", &c_cpt),
                    ("s_com", &s_com),
                    ("s_cpt", &s_cpt),
                    ("inv_t_cc_m", &inv_t_cc_m),
                ],
            )?;
            write(out, &commands::cmd_solve(&cfg)?)
        }
        Command::RegionMap {
            common,
            rho_grid,
            inv_grid,
        } => {
            let cfg = build_config(&common, &[("rho_grid", &rho_grid), ("inv_grid", &inv_grid)])?;
            write(out, &commands::cmd_region_map(&cfg)?)
        }
        Command::Sweep {
            common,
            trace_dir,
            out: out_dir,
            predictor,
            rho_grid,
            inv_grid,
            slice_inv,
            exchange_dir,
        } => {
            let cfg = build_config(
                &common,
                &[
                    ("predictor", &predictor),
                    ("rho_grid", &rho_grid),
                    ("inv_grid", &inv_grid),
                    ("slice_inv", &slice_inv),
                    ("exchange_dir", &exchange_dir),
                ],
            )?;
            commands::cmd_sweep(&cfg, &trace_dir, &out_dir)?;
            write(
                out,
                &format!(
                    "wrote {} and {}\n",
                    out_dir.join(commands::SURFACE_FILE).display(),
                    out_dir.join(commands::SLICE_FILE).display()
                ),
            )
        }
        Command::GenTraces {
            common,
            out: out_dir,
            count,
            kind,
            duration_s,
            rate_hz,
            yaw_speed_deg,
            pitch_sigma_deg,
        } => {
            let cfg = build_config(&common, &[])?;
            let kind = commands::CorpusKind::parse(&kind).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown trace kind `{kind}`; expected mixed, constant-velocity or random-walk"
                ))
            })?;
            let params = synth::SynthParams {
                sample_rate: rate_hz,
                duration_s,
                yaw_speed_deg,
                pitch_sigma_deg,
                ..synth::SynthParams::default()
            };
            let paths = commands::cmd_gen_traces(&out_dir, kind, &params, count, cfg.seed)?;
            write(out, &format!("wrote {} traces to {}\n", paths.len(), out_dir.display()))
        }
    }
}
