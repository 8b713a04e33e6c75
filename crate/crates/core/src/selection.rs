//! Choosing which tiles to render and deliver once the schedule fixes how many.
//!
//! Both selectors sort tiles into a total order and stream a prefix of it, so
//! the set for `n` is always contained in the set for any larger `n`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{angular_distance, fov_tiles, FovSpec, TileGrid, TileSet};
use crate::predictors::FixationSeries;

/// Streams the first `min(n, order.len())` tiles of a ranking.
pub fn take_prefix(order: &[usize], n: usize) -> TileSet {
    TileSet::from_indices(order.len(), order.iter().copied().take(n))
}

/// Tiles by descending probability, then ascending index.
pub fn rank_by_probability(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order
}

/// The `n` most probable tiles, lowest index first among equals.
pub fn select_top_n(probs: &[f64], n: usize) -> TileSet {
    take_prefix(&rank_by_probability(probs), n)
}

/// Like [`select_top_n`], with ties in probability broken by ascending
/// `secondary` before falling back to the index.
pub fn select_top_n_with_tiebreak(probs: &[f64], secondary: &[f64], n: usize) -> Result<TileSet> {
    if probs.len() != secondary.len() {
        return Err(Error::LengthMismatch {
            expected: probs.len(),
            actual: secondary.len(),
        });
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| {
        probs[b]
            .total_cmp(&probs[a])
            .then(secondary[a].total_cmp(&secondary[b]))
            .then(a.cmp(&b))
    });
    Ok(take_prefix(&order, n))
}

/// Tiles by how many fixations' FoVs cover them (descending), then by
/// distance to the closest fixation (ascending), then by index.
pub fn rank_around_fixations(series: &FixationSeries, grid: &TileGrid, fov: &FovSpec) -> Vec<usize> {
    let m = grid.tile_count();
    let mut coverage = vec![0usize; m];
    let mut closest = vec![f64::INFINITY; m];
    for fixation in &series.fixations {
        for tile in fov_tiles(grid, fixation, fov).indices() {
            coverage[tile] += 1;
        }
        for (tile, center) in grid.centers().iter().enumerate() {
            closest[tile] = closest[tile].min(angular_distance(center, fixation));
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| -> Ordering {
        coverage[b]
            .cmp(&coverage[a])
            .then(closest[a].total_cmp(&closest[b]))
            .then(a.cmp(&b))
    });
    order
}

/// The `n` tiles ranked first by [`rank_around_fixations`].
pub fn select_around_fixations(series: &FixationSeries, grid: &TileGrid, fov: &FovSpec, n: usize) -> TileSet {
    take_prefix(&rank_around_fixations(series, grid, fov), n)
}
