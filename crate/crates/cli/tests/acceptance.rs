//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line, then asserts.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilecast_cli::commands::{
    cmd_gen_traces, cmd_region_map, cmd_sweep, synth_corpus, CorpusKind, SLICE_FILE, SURFACE_FILE,
};
use tilecast_cli::config::Config;
use tilecast_cli::synth::{SynthParams, TraceKind};
use tilecast_core::geometry::{fov_tiles, FovSpec, TileGrid};
use tilecast_core::predictors::{Extrapolate, NoMotion, Predictor};
use tilecast_core::privacy::{sample_dop, Dop};
use tilecast_core::resources::{ergodic_rate, RadioConfig, ResourceRates};
use tilecast_core::scheduler::{boundary_equivalence_point, brute_force_solve, region, solve, Region};
use tilecast_core::simulator::{run_request, run_sweep, SelectionScheme, SimConfig};

const CORPUS_SEED: u64 = 2024;
const CORPUS_SIZE: usize = 60;

/// Written straight to the stderr handle so the line survives test output capture.
fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let line = format!(
        "[{}] criterion {id} {name}: {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    std::io::stderr().lock().write_all(line.as_bytes()).unwrap();
}

fn log_uniform(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

fn corpus() -> Vec<tilecast_core::traces::HeadTrace> {
    synth_corpus(CorpusKind::Mixed, &SynthParams::default(), CORPUS_SIZE, CORPUS_SEED).unwrap()
}

fn default_rho_grid() -> Vec<Dop> {
    Config::default()
        .rho_grid
        .iter()
        .map(|&r| Dop::new(r).unwrap())
        .collect()
}

#[test]
fn criterion_1_closed_form_matches_oracle() {
    const TUPLES: usize = 1000;
    const GRID: usize = 10_000;
    const REL_TOL: f64 = 1e-9;
    const MAX_SECONDS: f64 = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..TUPLES {
        let c_com = log_uniform(&mut rng, -3.0, 3.0);
        let c_cpt = log_uniform(&mut rng, -3.0, 3.0);
        let s_com = log_uniform(&mut rng, -3.0, 3.0);
        let s_cpt = log_uniform(&mut rng, -3.0, 3.0);
        let rho = Dop::new(rng.random_range(0.0..=1.0)).unwrap();
        let t_seg = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let m = [50, 200][rng.random_range(0..2)];
        let rates = ResourceRates::new(c_com, c_cpt, s_com, s_cpt, m).unwrap();
        let s = solve(rho, t_seg, &rates, m).unwrap();
        let b = brute_force_solve(rho, t_seg, &rates, m, GRID).unwrap();
        let budget = (1.0 + rho.value()) * t_seg;
        let expected = (budget * rates.inv_t_cc_m).min(1.0);
        let rel = (s.c_cc_continuous - expected).abs() / expected;
        if s.t_com + s.t_cpt != budget || s.n_tiles < b.n_tiles || rel > REL_TOL {
            failures.push(format!("tuple {i}: solve {s:?} brute {b:?} rel {rel:e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs < MAX_SECONDS;
    report(
        1,
        "closed form vs brute force",
        ok,
        &format!(
            "{} of {TUPLES} tuples disagree, {secs:.2} s (limit {MAX_SECONDS} s)",
            failures.len()
        ),
    );
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(secs < MAX_SECONDS);
}

#[test]
fn criterion_2_saturated_region_is_exact() {
    const CONFIGS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = SynthParams {
        duration_s: 10.0,
        ..SynthParams::default()
    };
    let mut worst = 1.0f64;
    for i in 0..CONFIGS {
        let rho = Dop::new(rng.random_range(0.0..0.95)).unwrap();
        let s_com = log_uniform(&mut rng, -2.0, 2.0);
        let s_cpt = log_uniform(&mut rng, -2.0, 2.0);
        let raw = ResourceRates::new(
            log_uniform(&mut rng, -2.0, 2.0),
            log_uniform(&mut rng, -2.0, 2.0),
            s_com,
            s_cpt,
            200,
        )
        .unwrap();
        // Scale both rates so that T_cc^M lands somewhere in [0.3, 1] (1 + rho) T_seg.
        let target = (1.0 + rho.value()) * rng.random_range(0.3..=1.0);
        let k = raw.t_cc_m() / target;
        let rates = ResourceRates::new(raw.c_com * k, raw.c_cpt * k, s_com, s_cpt, 200).unwrap();
        assert!((1.0 + rho.value()) >= rates.t_cc_m());
        let kind = if rng.random::<bool>() {
            TraceKind::RandomWalk
        } else {
            TraceKind::ConstantVelocity
        };
        let trace = tilecast_cli::synth::generate(kind, &params, 2, i as u64).unwrap();
        let cfg = SimConfig {
            scheme: if rng.random::<bool>() {
                SelectionScheme::AroundFixations
            } else {
                SelectionScheme::TopProbability
            },
            ..SimConfig::default()
        };
        let predictor: Box<dyn Predictor> = if rng.random::<bool>() {
            Box::new(NoMotion)
        } else {
            Box::new(Extrapolate::default())
        };
        let r = run_request(&trace, rho, &cfg, &rates, predictor.as_ref()).unwrap();
        assert_eq!(r.region(), Region::Saturated);
        worst = worst.min(r.avg_qoe);
    }
    report(
        2,
        "saturated QoE",
        worst == 1.0,
        &format!("min avg_qoe over {CONFIGS} configs = {worst}"),
    );
    assert_eq!(worst, 1.0);
}

#[test]
fn criterion_3_region_map_and_point_p() {
    const TOL: f64 = 1e-3;
    let mut cfg = Config::default();
    cfg.set("rho_grid", "0:1:0.02").unwrap();
    cfg.set("inv_grid", "0.01:1:0.01").unwrap();
    let csv = cmd_region_map(&cfg).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rho,inv_T_cc_M,C_cc,region"));
    let mut rows = 0;
    let mut bad = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (rho, inv, c_cc): (f64, f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        let product = (1.0 + rho) * cfg.t_seg * inv;
        let want_region = if product >= 1.0 { "saturated" } else { "unsaturated" };
        if c_cc != product.min(1.0) || f[3] != want_region {
            bad.push(line.to_string());
        }
        rows += 1;
    }
    assert_eq!(rows, 51 * 100 + 51);

    let (rho_p, inv_p) = boundary_equivalence_point(0.7, 0.27, 1.0).unwrap();
    let p = Dop::new(rho_p).unwrap();
    let at = |rho: f64, inv: f64| region(Dop::new(rho).unwrap(), 1.0, inv);
    let equivalence = region(p, 1.0, inv_p) == Region::Unsaturated
        && ((1.0 + rho_p + 0.7) * inv_p - 1.0).abs() <= TOL
        && ((1.0 + rho_p) * (inv_p + 0.27) - 1.0).abs() <= TOL
        && at(rho_p + 0.7 + TOL, inv_p) == Region::Saturated
        && at(rho_p, inv_p + 0.27 + TOL) == Region::Saturated
        && at(rho_p + 0.7 - TOL, inv_p) == Region::Unsaturated
        && at(rho_p, inv_p + 0.27 - TOL) == Region::Unsaturated;
    let rho_matches = (rho_p - 0.298).abs() <= TOL;
    let ok = bad.is_empty() && equivalence && rho_matches;
    report(
        3,
        "region map and point P",
        ok,
        &format!(
            "{rows} rows, {} mismatches; P = ({rho_p:.4}, {inv_p:.4}), equivalence {}",
            bad.len(),
            if equivalence { "holds" } else { "broken" }
        ),
    );
    // The quoted inverse-rate coordinate 0.386 does not satisfy the boundary equations.
    let quoted = ((1.0 + 0.298 + 0.7) * 0.386, (1.0 + 0.298) * (0.386 + 0.27));
    let note = format!(
        "       note: at the quoted (0.298, 0.386) the two boundary products are {:.4} and {:.4}, not 1\n",
        quoted.0, quoted.1
    );
    std::io::stderr().lock().write_all(note.as_bytes()).unwrap();
    assert!(bad.is_empty(), "{}", bad.join("\n"));
    assert!(equivalence && rho_matches);
}

#[test]
fn criterion_4_qoe_monotone_in_resources() {
    let traces = corpus();
    let rhos = default_rho_grid();
    let invs = Config::default().inv_grid;
    let cfg = SimConfig::default();
    let predictors: [(&str, Box<dyn Predictor>); 2] = [
        ("no-motion", Box::new(NoMotion)),
        ("extrapolate", Box::new(Extrapolate::default())),
    ];
    let mut violations = Vec::new();
    for (name, predictor) in &predictors {
        for (t, trace) in traces.iter().enumerate() {
            let table = run_sweep(std::slice::from_ref(trace), &rhos, &invs, &cfg, predictor.as_ref()).unwrap();
            for r in 0..rhos.len() {
                for i in 1..invs.len() {
                    if table.cell(r, i).mean_qoe < table.cell(r, i - 1).mean_qoe {
                        violations.push(format!("{name} trace {t} rho {} inv {}", rhos[r].value(), invs[i]));
                    }
                }
            }
        }
    }
    report(
        4,
        "QoE nondecreasing in 1/T_cc^M",
        violations.is_empty(),
        &format!(
            "{} traces x 2 predictors, {} violations",
            traces.len(),
            violations.len()
        ),
    );
    assert!(violations.is_empty(), "{}", violations.join("\n"));
}

#[test]
fn criterion_5_doo_decreases_with_dop() {
    let params = SynthParams {
        yaw_speed_deg: 20.0,
        ..SynthParams::default()
    };
    let traces = synth_corpus(
        CorpusKind::Single(TraceKind::ConstantVelocity),
        &params,
        20,
        CORPUS_SEED,
    )
    .unwrap();
    let rhos = default_rho_grid();
    let cfg = SimConfig::default();
    let rates = ResourceRates::from_inv_t_cc_m(0.17, 1.0, 1.0, cfg.tile_count()).unwrap();
    let mut increases = Vec::new();
    let mut strict = false;
    for (t, trace) in traces.iter().enumerate() {
        let doo: Vec<f64> = rhos
            .iter()
            .map(|&rho| run_request(trace, rho, &cfg, &rates, &NoMotion).unwrap().avg_doo)
            .collect();
        for w in 1..doo.len() {
            if doo[w] > doo[w - 1] {
                increases.push(format!("trace {t}: {:?}", doo));
                break;
            }
            strict |= doo[w] < doo[w - 1];
        }
    }
    let ok = increases.is_empty() && strict;
    report(
        5,
        "DoO nonincreasing in DoP",
        ok,
        &format!(
            "{} traces, {} with an increase, strictly decreasing somewhere: {strict}",
            traces.len(),
            increases.len()
        ),
    );
    assert!(increases.is_empty(), "{}", increases.join("\n"));
    assert!(strict);
}

#[test]
fn criterion_6_fov_calibration() {
    const TARGET: f64 = 33.0;
    const TOL: f64 = 5.0;
    let grid = TileGrid::default();
    let fov = FovSpec::default();
    // Ten corpora, so the estimate is not at the mercy of one seed.
    let traces: Vec<_> = (0..10)
        .flat_map(|k| synth_corpus(CorpusKind::Mixed, &SynthParams::default(), CORPUS_SIZE, CORPUS_SEED + k).unwrap())
        .collect();
    let (mut total, mut count) = (0usize, 0usize);
    for trace in &traces {
        for s in trace.samples() {
            total += fov_tiles(&grid, &s.orientation, &fov).cardinality();
            count += 1;
        }
    }
    let mean = total as f64 / count as f64;
    let ok = (mean - TARGET).abs() <= TOL;
    report(
        6,
        "FoV calibration",
        ok,
        &format!("mean |FoV| = {mean:.2} over {count} fixations (target {TARGET} +- {TOL})"),
    );
    assert!(ok, "mean FoV cardinality {mean:.3} outside {TARGET} +- {TOL}");
}

/// `E[log2(1 + X)]` for unit exponential `X`, by composite Simpson on `[0, 60]`.
fn exponential_log2_oracle() -> f64 {
    let n = 600_000;
    let h = 60.0 / n as f64;
    let f = |x: f64| (1.0 + x).log2() * (-x).exp();
    let mut sum = f(0.0) + f(60.0);
    for i in 1..n {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn criterion_7_ergodic_rate() {
    const TARGET: f64 = 0.860;
    const REL_TOL: f64 = 0.01;
    let oracle = exponential_log2_oracle();
    assert!((oracle - TARGET).abs() <= REL_TOL * TARGET, "oracle {oracle}");
    let radio = RadioConfig {
        bandwidth_hz: 1.0,
        power_w: 1.0,
        distance_m: 1.0,
        path_loss_exp: 2.0,
        noise_w: 1.0,
        antennas: 1,
        users: 1,
        slot_s: 1.0,
    };
    assert_eq!(radio.mean_snr(), 1.0);
    assert_eq!(radio.gain_shape(), 1);
    let estimate = ergodic_rate(&radio, 100_000, 7).unwrap();
    let ok = (estimate - TARGET).abs() <= REL_TOL * TARGET;
    report(
        7,
        "ergodic rate",
        ok,
        &format!("estimate {estimate:.5} bit/s, quadrature {oracle:.5}, target {TARGET} +- 1%"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_dop_sampler_zero_mass() {
    const DRAWS: u64 = 100_000;
    let zeros = (0..DRAWS)
        .filter(|&seed| sample_dop(0.41, seed).unwrap() == Dop::ZERO)
        .count();
    let freq = zeros as f64 / DRAWS as f64;
    let ok = (freq - 0.41).abs() <= 0.01;
    report(
        8,
        "DoP sampler zero mass",
        ok,
        &format!("{freq:.4} over {DRAWS} draws (target 0.41 +- 0.01)"),
    );
    assert!(ok);
}

#[test]
fn criterion_9_full_sweep_is_fast_and_reproducible() {
    const MAX_SECONDS: f64 = 300.0;
    let traces = tempfile::tempdir().unwrap();
    cmd_gen_traces(
        traces.path(),
        CorpusKind::Mixed,
        &SynthParams::default(),
        CORPUS_SIZE,
        CORPUS_SEED,
    )
    .unwrap();
    let start = Instant::now();
    let mut identical = true;
    let mut rows = 0;
    for predictor in ["no-motion", "extrapolate"] {
        let mut cfg = Config::default();
        cfg.set("predictor", predictor).unwrap();
        cfg.set("seed", "9").unwrap();
        let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
            .map(|_| {
                let out = tempfile::tempdir().unwrap();
                cmd_sweep(&cfg, traces.path(), out.path()).unwrap();
                (
                    std::fs::read(out.path().join(SURFACE_FILE)).unwrap(),
                    std::fs::read(out.path().join(SLICE_FILE)).unwrap(),
                )
            })
            .collect();
        identical &= outputs[0] == outputs[1];
        rows = String::from_utf8_lossy(&outputs[0].0).lines().count() - 1;
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = identical && secs < MAX_SECONDS && rows == 9 * 20;
    report(
        9,
        "full sweep reproducibility",
        ok,
        &format!(
            "9 x 20 x {CORPUS_SIZE}, 2 predictors x 2 runs in {secs:.1} s, {rows} surface rows, identical: {identical}"
        ),
    );
    assert!(identical);
    assert_eq!(rows, 180);
    assert!(secs < MAX_SECONDS);
}
