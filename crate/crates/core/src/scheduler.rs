//! Optimal split of the `(1 + rho) T_seg` budget between rendering and
//! transmission, maximizing the number of tiles that can be both rendered and
//! delivered before playback.
//!
//! With `T_cc^M` the time needed to render and deliver all `M` tiles, the
//! optimum is closed-form:
//!
//! - unsaturated, `(1 + rho) T_seg < T_cc^M`: both stages finish the same
//!   number of tiles, `t_com = s_com C_cpt (1+rho) T_seg / (s_com C_cpt + s_cpt C_com)`
//!   and the CC capability is `(1 + rho) T_seg / T_cc^M`;
//! - saturated otherwise: every tile fits and `C_cc = 1`.

use crate::error::{Error, Result};
use crate::geometry::exact_split;
use crate::privacy::Dop;
use crate::resources::{t_cc_max, ResourceRates};

/// Relative slack when converting a real tile count into whole tiles, so that
/// `39.99999999999999` computed for an exact 40 is not floored to 39.
const WHOLE_TILE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Every tile can be rendered and delivered in time.
    Saturated,
    /// Resource rates bind; more rate means more tiles.
    Unsaturated,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Saturated => "saturated",
            Region::Unsaturated => "unsaturated",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Transmission time, seconds.
    pub t_com: f64,
    /// Rendering time, seconds.
    pub t_cpt: f64,
    /// Whole tiles rendered and delivered.
    pub n_tiles: usize,
    /// `n_tiles / M`.
    pub c_cc: f64,
    /// CC capability before rounding to whole tiles.
    pub c_cc_continuous: f64,
    pub region: Region,
}

fn whole_tiles(x: f64) -> usize {
    if !(x > 0.0) {
        return 0;
    }
    (x + WHOLE_TILE_SLACK * x.max(1.0)).floor() as usize
}

fn check_inputs(t_seg: f64, rates: &ResourceRates, tile_count: usize) -> Result<()> {
    if !(t_seg > 0.0) {
        return Err(Error::Precondition(format!(
            "segment duration must be positive, got {t_seg}"
        )));
    }
    if tile_count == 0 {
        return Err(Error::Precondition("tile count must be positive".into()));
    }
    if !(rates.c_com > 0.0 && rates.c_cpt > 0.0) {
        return Err(Error::Infeasible(format!(
            "no feasible schedule with C_com = {} and C_cpt = {}",
            rates.c_com, rates.c_cpt
        )));
    }
    if !(rates.s_com > 0.0 && rates.s_cpt > 0.0) {
        return Err(Error::Precondition("tile sizes must be positive".into()));
    }
    Ok(())
}

/// Tiles both stages can finish when transmission gets `t_com` out of `budget`.
fn tiles_for_split(rates: &ResourceRates, t_com: f64, budget: f64, tile_count: usize) -> usize {
    let delivered = whole_tiles(rates.c_com * t_com / rates.s_com);
    let rendered = whole_tiles(rates.c_cpt * (budget - t_com) / rates.s_cpt);
    delivered.min(rendered).min(tile_count)
}

/// Saturated iff `(1 + rho) T_seg / T_cc^M >= 1`; the boundary is saturated.
pub fn region(rho: Dop, t_seg: f64, inv_t_cc_m: f64) -> Region {
    if (1.0 + rho.value()) * t_seg * inv_t_cc_m >= 1.0 {
        Region::Saturated
    } else {
        Region::Unsaturated
    }
}

/// Continuous CC capability `min(1, (1 + rho) T_seg / T_cc^M)`.
pub fn cc_capability(rho: Dop, t_seg: f64, inv_t_cc_m: f64) -> f64 {
    ((1.0 + rho.value()) * t_seg * inv_t_cc_m).min(1.0)
}

/// Closed-form optimal schedule.
pub fn solve(rho: Dop, t_seg: f64, rates: &ResourceRates, tile_count: usize) -> Result<Schedule> {
    check_inputs(t_seg, rates, tile_count)?;
    let budget = (1.0 + rho.value()) * t_seg;
    let t_cc_m = t_cc_max(rates, tile_count);
    let m = tile_count as f64;

    match region(rho, t_seg, 1.0 / t_cc_m) {
        Region::Saturated => {
            // Any t_com in [s_com M / C_com, budget - s_cpt M / C_cpt] is optimal; take the left end.
            let (t_com, t_cpt) = exact_split(budget, rates.s_com * m / rates.c_com);
            Ok(Schedule {
                t_com,
                t_cpt,
                n_tiles: tile_count,
                c_cc: 1.0,
                c_cc_continuous: 1.0,
                region: Region::Saturated,
            })
        }
        Region::Unsaturated => {
            let com_weight = rates.s_com * rates.c_cpt;
            let cpt_weight = rates.s_cpt * rates.c_com;
            let (t_com, t_cpt) = exact_split(budget, com_weight * budget / (com_weight + cpt_weight));
            let c_cc_continuous = budget / t_cc_m;
            let n_tiles = tiles_for_split(rates, t_com, budget, tile_count).min(whole_tiles(c_cc_continuous * m));
            Ok(Schedule {
                t_com,
                t_cpt,
                n_tiles,
                c_cc: n_tiles as f64 / m,
                c_cc_continuous,
                region: Region::Unsaturated,
            })
        }
    }
}

/// Exhaustive search over `grid_points` evenly spaced transmission times in
/// `[0, (1 + rho) T_seg]`; returns the first maximizer of the whole-tile count.
pub fn brute_force_solve(
    rho: Dop,
    t_seg: f64,
    rates: &ResourceRates,
    tile_count: usize,
    grid_points: usize,
) -> Result<Schedule> {
    check_inputs(t_seg, rates, tile_count)?;
    if grid_points < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 grid points, got {grid_points}"
        )));
    }
    let budget = (1.0 + rho.value()) * t_seg;
    let mut best_t_com = 0.0;
    let mut best_n = tiles_for_split(rates, 0.0, budget, tile_count);
    for i in 1..grid_points {
        let t_com = budget * i as f64 / (grid_points - 1) as f64;
        let n = tiles_for_split(rates, t_com, budget, tile_count);
        if n > best_n {
            best_n = n;
            best_t_com = t_com;
        }
    }
    let c_cc = best_n as f64 / tile_count as f64;
    let (t_com, t_cpt) = exact_split(budget, best_t_com);
    Ok(Schedule {
        t_com,
        t_cpt,
        n_tiles: best_n,
        c_cc,
        c_cc_continuous: c_cc,
        region: if best_n == tile_count {
            Region::Saturated
        } else {
            Region::Unsaturated
        },
    })
}

/// The unsaturated point from which raising the DoP by `delta_rho` and raising
/// `1 / T_cc^M` by `delta_inv` both land exactly on the region boundary.
/// Returns `(rho, inv_t_cc_m)`.
pub fn boundary_equivalence_point(delta_rho: f64, delta_inv: f64, t_seg: f64) -> Result<(f64, f64)> {
    if !(delta_rho > 0.0 && delta_inv > 0.0 && t_seg > 0.0) {
        return Err(Error::Precondition(
            "increments and segment duration must be positive".into(),
        ));
    }
    // With a = 1 + rho and x = 1/T_cc^M:
    //   t_seg (a + delta_rho) x = 1   and   t_seg a (x + delta_inv) = 1
    // give x = a delta_inv / delta_rho and t_seg delta_inv a^2 + t_seg delta_inv delta_rho a - delta_rho = 0.
    let qa = t_seg * delta_inv;
    let qb = t_seg * delta_inv * delta_rho;
    let qc = -delta_rho;
    let a = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
    Ok((a - 1.0, a * delta_inv / delta_rho))
}
