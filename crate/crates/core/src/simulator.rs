//! End-to-end streaming of one request, and sweeps over DoP and resource rates.
//!
//! Segment `l >= l0` is predicted from the observation window of segment
//! `l - 2`; the prediction starts `(1 + rho) T_seg` after that window closes,
//! which is exactly the rendering and transmission budget.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{FovSpec, TileGrid};
use crate::metrics::overlap;
use crate::predictors::{to_probabilities, PredictionRequest, Predictor};
use crate::privacy::{window_plan, Dop};
use crate::resources::ResourceRates;
use crate::scheduler::{solve, Region, Schedule};
use crate::selection::{rank_around_fixations, rank_by_probability, take_prefix};
use crate::traces::{ground_truth, observation_slice, HeadTrace, SegmentTruth};

/// Segments between the observed segment and the predicted one.
pub const OBSERVATION_OFFSET: usize = 2;
pub const DEFAULT_FIRST_PROACTIVE_SEGMENT: usize = 3;
pub const DEFAULT_N_FOV: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionScheme {
    /// Rank tiles by predicted request probability.
    TopProbability,
    /// Rank tiles by FoV coverage of the predicted fixations, then distance.
    #[default]
    AroundFixations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_seg: f64,
    pub grid: TileGrid,
    pub fov: FovSpec,
    /// First proactively streamed segment (1-based); earlier ones are streamed passively.
    pub l0: usize,
    /// Size of the prediction sets used for the DoO.
    pub n_fov: usize,
    pub scheme: SelectionScheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_seg: 1.0,
            grid: TileGrid::default(),
            fov: FovSpec::default(),
            l0: DEFAULT_FIRST_PROACTIVE_SEGMENT,
            n_fov: DEFAULT_N_FOV,
            scheme: SelectionScheme::default(),
        }
    }
}

impl SimConfig {
    pub fn tile_count(&self) -> usize {
        self.grid.tile_count()
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_seg > 0.0) {
            return Err(Error::Precondition(format!(
                "segment duration must be positive, got {}",
                self.t_seg
            )));
        }
        if self.l0 <= OBSERVATION_OFFSET {
            return Err(Error::Precondition(format!(
                "l0 must exceed the observation offset of {OBSERVATION_OFFSET}, got {}",
                self.l0
            )));
        }
        if self.n_fov > self.tile_count() {
            return Err(Error::Precondition(format!(
                "N_fov = {} exceeds the {} tiles of the grid",
                self.n_fov,
                self.tile_count()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentScore {
    pub segment: usize,
    pub doo: f64,
    pub qoe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestReport {
    pub rho: Dop,
    pub inv_t_cc_m: f64,
    pub schedule: Schedule,
    pub avg_doo: f64,
    pub avg_qoe: f64,
    pub per_segment: Vec<SegmentScore>,
}

impl RequestReport {
    pub fn region(&self) -> Region {
        self.schedule.region
    }

    pub fn c_cc(&self) -> f64 {
        self.schedule.c_cc
    }

    pub fn n_tiles(&self) -> usize {
        self.schedule.n_tiles
    }
}

/// Tile rankings for every proactively streamed segment `l0..=L`.
fn segment_rankings(
    trace: &HeadTrace,
    segments: usize,
    rho: Dop,
    cfg: &SimConfig,
    predictor: &dyn Predictor,
) -> Result<Vec<Vec<usize>>> {
    let plan = window_plan(rho, cfg.t_seg)?;
    (cfg.l0..=segments)
        .map(|segment| {
            let observed = observation_slice(trace, segment - OBSERVATION_OFFSET, &plan, cfg.t_seg)?;
            let request = PredictionRequest::new(observed, plan.t_cc, plan.t_pdw_infer)?;
            let series = predictor.predict(&request)?;
            Ok(match cfg.scheme {
                SelectionScheme::AroundFixations => rank_around_fixations(&series, &cfg.grid, &cfg.fov),
                SelectionScheme::TopProbability => {
                    rank_by_probability(&to_probabilities(&series, &cfg.grid, &cfg.fov)?)
                }
            })
        })
        .collect()
}

/// Overlap of each proactive segment's truth with the first `n` ranked tiles.
fn overlaps(truths: &[SegmentTruth], rankings: &[Vec<usize>], l0: usize, n: usize) -> Result<Vec<f64>> {
    truths[l0 - 1..]
        .iter()
        .zip(rankings)
        .map(|(truth, ranking)| overlap(&truth.requested, &take_prefix(ranking, n)))
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn check_request(trace: &HeadTrace, rho: Dop, cfg: &SimConfig) -> Result<Vec<SegmentTruth>> {
    cfg.validate()?;
    if rho.value() >= 1.0 {
        return Err(Error::Precondition("DoP must be below 1 to observe anything".into()));
    }
    let truths = ground_truth(trace, &cfg.grid, &cfg.fov, cfg.t_seg)?;
    if truths.len() < cfg.l0 {
        return Err(Error::Precondition(format!(
            "trace covers {} segments, need at least l0 = {}",
            truths.len(),
            cfg.l0
        )));
    }
    Ok(truths)
}

/// Streams one request: predict, schedule, select and score every segment from `l0` on.
pub fn run_request(
    trace: &HeadTrace,
    rho: Dop,
    cfg: &SimConfig,
    rates: &ResourceRates,
    predictor: &dyn Predictor,
) -> Result<RequestReport> {
    let truths = check_request(trace, rho, cfg)?;
    let schedule = solve(rho, cfg.t_seg, rates, cfg.tile_count())?;
    let rankings = segment_rankings(trace, truths.len(), rho, cfg, predictor)?;
    let doo = overlaps(&truths, &rankings, cfg.l0, cfg.n_fov)?;
    let qoe = overlaps(&truths, &rankings, cfg.l0, schedule.n_tiles)?;
    let per_segment = (cfg.l0..=truths.len())
        .zip(doo.iter().zip(&qoe))
        .map(|(segment, (&doo, &qoe))| SegmentScore { segment, doo, qoe })
        .collect();
    Ok(RequestReport {
        rho,
        inv_t_cc_m: 1.0 / crate::resources::t_cc_max(rates, cfg.tile_count()),
        schedule,
        avg_doo: mean(&doo),
        avg_qoe: mean(&qoe),
        per_segment,
    })
}

/// Aggregates for one `(rho, 1/T_cc^M)` cell, averaged over the traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub rho: f64,
    pub inv_t_cc_m: f64,
    pub schedule: Schedule,
    pub mean_doo: f64,
    pub mean_qoe: f64,
}

/// Cells in row-major order: DoP outer, `1/T_cc^M` inner, each in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rho_grid: Vec<f64>,
    pub inv_grid: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(&self, rho_index: usize, inv_index: usize) -> &SweepCell {
        &self.cells[rho_index * self.inv_grid.len() + inv_index]
    }
}

/// Evaluates every `(rho, 1/T_cc^M)` pair over all traces. Each trace is
/// predicted once per DoP; the resource grid only changes how many ranked
/// tiles are streamed. Reductions run in trace order, so results do not
/// depend on thread scheduling.
pub fn run_sweep(
    traces: &[HeadTrace],
    rho_grid: &[Dop],
    inv_grid: &[f64],
    cfg: &SimConfig,
    predictor: &dyn Predictor,
) -> Result<SweepTable> {
    if traces.is_empty() || rho_grid.is_empty() || inv_grid.is_empty() {
        return Err(Error::Precondition(
            "sweep needs at least one trace, DoP and resource value".into(),
        ));
    }
    let m = cfg.tile_count();
    let rates: Vec<ResourceRates> = inv_grid
        .iter()
        .map(|&inv| ResourceRates::from_inv_t_cc_m(inv, 1.0, 1.0, m))
        .collect::<Result<_>>()?;
    let schedules: Vec<Vec<Schedule>> = rho_grid
        .iter()
        .map(|&rho| {
            rates
                .iter()
                .map(|r| solve(rho, cfg.t_seg, r, m))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let truths: Vec<Vec<SegmentTruth>> = traces
        .par_iter()
        .map(|trace| check_request(trace, rho_grid[0], cfg))
        .collect::<Result<_>>()?;
    for &rho in rho_grid {
        if rho.value() >= 1.0 {
            return Err(Error::Precondition("DoP must be below 1 to observe anything".into()));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..rho_grid.len())
        .flat_map(|r| (0..traces.len()).map(move |t| (r, t)))
        .collect();
    // (avg DoO, avg QoE per resource value) for each (rho, trace).
    let results: Vec<(f64, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(r, t)| {
            let truths = &truths[t];
            let rankings = segment_rankings(&traces[t], truths.len(), rho_grid[r], cfg, predictor)?;
            let doo = mean(&overlaps(truths, &rankings, cfg.l0, cfg.n_fov)?);
            let qoe = schedules[r]
                .iter()
                .map(|s| Ok(mean(&overlaps(truths, &rankings, cfg.l0, s.n_tiles)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((doo, qoe))
        })
        .collect::<Result<_>>()?;

    let n_traces = traces.len() as f64;
    let mut cells = Vec::with_capacity(rho_grid.len() * inv_grid.len());
    for (r, &rho) in rho_grid.iter().enumerate() {
        let per_trace = &results[r * traces.len()..(r + 1) * traces.len()];
        let mean_doo = per_trace.iter().map(|(d, _)| d).sum::<f64>() / n_traces;
        for (i, &inv) in inv_grid.iter().enumerate() {
            let mean_qoe = per_trace.iter().map(|(_, q)| q[i]).sum::<f64>() / n_traces;
            cells.push(SweepCell {
                rho: rho.value(),
                inv_t_cc_m: inv,
                schedule: schedules[r][i],
                mean_doo,
                mean_qoe,
            });
        }
    }
    Ok(SweepTable {
        rho_grid: rho_grid.iter().map(|r| r.value()).collect(),
        inv_grid: inv_grid.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Orientation;
    use crate::predictors::{Extrapolate, NoMotion};

    fn static_trace(seconds: usize) -> HeadTrace {
        let o = TileGrid::default().center(104);
        HeadTrace::from_orientations(10.0, 0.0, std::iter::repeat(o).take(seconds * 10)).unwrap()
    }

    fn panning_trace(seconds: usize, deg_per_s: f64) -> HeadTrace {
        HeadTrace::from_orientations(
            10.0,
            0.0,
            (0..seconds * 10).map(|i| Orientation::from_degrees(-120.0 + deg_per_s * i as f64 / 10.0, 5.0)),
        )
        .unwrap()
    }

    fn saturated_rates() -> ResourceRates {
        ResourceRates::from_inv_t_cc_m(2.0, 1.0, 1.0, 200).unwrap()
    }

    #[test]
    fn saturated_request_has_perfect_qoe() {
        let report = run_request(
            &panning_trace(12, 45.0),
            Dop::new(0.3).unwrap(),
            &SimConfig::default(),
            &saturated_rates(),
            &NoMotion,
        )
        .unwrap();
        assert_eq!(report.region(), Region::Saturated);
        assert_eq!(report.avg_qoe, 1.0);
        assert_eq!(report.per_segment.len(), 10);
        assert_eq!(report.per_segment[0].segment, 3);
    }

    #[test]
    fn static_trace_is_predicted_perfectly() {
        let rates = ResourceRates::from_inv_t_cc_m(0.3, 1.0, 1.0, 200).unwrap();
        let report = run_request(
            &static_trace(8),
            Dop::new(0.2).unwrap(),
            &SimConfig::default(),
            &rates,
            &NoMotion,
        )
        .unwrap();
        assert_eq!(report.region(), Region::Unsaturated);
        assert_eq!(report.n_tiles(), 72);
        assert_eq!(report.avg_qoe, 1.0);
        assert_eq!(report.avg_doo, 1.0);
    }

    #[test]
    fn minimal_observation_window_is_valid() {
        let rates = ResourceRates::from_inv_t_cc_m(0.2, 1.0, 1.0, 200).unwrap();
        let report = run_request(
            &panning_trace(6, 10.0),
            Dop::new(0.9).unwrap(),
            &SimConfig::default(),
            &rates,
            &Extrapolate::default(),
        )
        .unwrap();
        assert!(report.avg_qoe >= 0.0 && report.avg_qoe <= 1.0);
    }

    #[test]
    fn request_preconditions() {
        let rates = saturated_rates();
        let cfg = SimConfig::default();
        assert!(run_request(&static_trace(2), Dop::ZERO, &cfg, &rates, &NoMotion).is_err());
        assert!(run_request(&static_trace(5), Dop::new(1.0).unwrap(), &cfg, &rates, &NoMotion).is_err());
        let early = SimConfig {
            l0: 2,
            ..SimConfig::default()
        };
        assert!(run_request(&static_trace(5), Dop::ZERO, &early, &rates, &NoMotion).is_err());
    }

    #[test]
    fn report_averages_are_segment_means() {
        let rates = ResourceRates::from_inv_t_cc_m(0.17, 1.0, 1.0, 200).unwrap();
        let report = run_request(
            &panning_trace(15, 30.0),
            Dop::new(0.4).unwrap(),
            &SimConfig::default(),
            &rates,
            &Extrapolate::default(),
        )
        .unwrap();
        let n = report.per_segment.len() as f64;
        let doo = report.per_segment.iter().map(|s| s.doo).sum::<f64>() / n;
        let qoe = report.per_segment.iter().map(|s| s.qoe).sum::<f64>() / n;
        assert_eq!(report.avg_doo, doo);
        assert_eq!(report.avg_qoe, qoe);
    }

    #[test]
    fn single_cell_sweep_matches_request() {
        let trace = panning_trace(10, 25.0);
        let cfg = SimConfig::default();
        let rho = Dop::new(0.3).unwrap();
        let table = run_sweep(std::slice::from_ref(&trace), &[rho], &[0.17], &cfg, &NoMotion).unwrap();
        let rates = ResourceRates::from_inv_t_cc_m(0.17, 1.0, 1.0, 200).unwrap();
        let report = run_request(&trace, rho, &cfg, &rates, &NoMotion).unwrap();
        let cell = table.cell(0, 0);
        assert_eq!(cell.mean_qoe, report.avg_qoe);
        assert_eq!(cell.mean_doo, report.avg_doo);
        assert_eq!(cell.schedule.n_tiles, report.n_tiles());
    }

    #[test]
    fn sweep_layout() {
        let traces = vec![static_trace(6), panning_trace(6, 20.0)];
        let rhos: Vec<Dop> = (0..3).map(|i| Dop::new(0.1 * i as f64).unwrap()).collect();
        let table = run_sweep(&traces, &rhos, &[0.1, 0.5, 2.0], &SimConfig::default(), &NoMotion).unwrap();
        assert_eq!(table.cells.len(), 9);
        assert_eq!(table.cell(2, 1).inv_t_cc_m, 0.5);
        assert!((table.cell(2, 1).rho - 0.2).abs() < 1e-12);
        for r in 0..3 {
            assert_eq!(table.cell(r, 2).mean_qoe, 1.0);
        }
        assert!(run_sweep(&[], &rhos, &[0.1], &SimConfig::default(), &NoMotion).is_err());
    }
}
