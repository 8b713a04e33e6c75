//! Prediction and streaming scores.
//!
//! Both the degree of overlap (DoO) and the QoE average, over the proactively
//! streamed segments `l0..=L`, the share of requested tiles that were
//! predicted (DoO, `N_fov` tiles) or actually streamed (QoE, `N(rho)` tiles).

use crate::error::{Error, Result};
use crate::geometry::TileSet;
use crate::traces::SegmentTruth;

/// Share of the requested tiles `q` present in `e`.
pub fn overlap(requested: &TileSet, streamed: &TileSet) -> Result<f64> {
    let wanted = requested.cardinality();
    if wanted == 0 {
        return Err(Error::Data("overlap undefined for an empty request set".into()));
    }
    if requested.tile_count() != streamed.tile_count() {
        return Err(Error::LengthMismatch {
            expected: requested.tile_count(),
            actual: streamed.tile_count(),
        });
    }
    Ok(requested.intersection_count(streamed) as f64 / wanted as f64)
}

/// Per-segment overlaps for segments `l0..=L`; `sets[i]` belongs to segment `l0 + i`.
pub fn segment_overlaps(truths: &[SegmentTruth], sets: &[TileSet], l0: usize) -> Result<Vec<f64>> {
    if l0 == 0 {
        return Err(Error::Precondition(
            "segments are 1-based, l0 must be at least 1".into(),
        ));
    }
    let scored: Vec<&SegmentTruth> = truths.iter().filter(|t| t.segment >= l0).collect();
    if scored.len() != sets.len() {
        return Err(Error::LengthMismatch {
            expected: scored.len(),
            actual: sets.len(),
        });
    }
    if scored.is_empty() {
        return Err(Error::Precondition(format!("no segment at or after l0 = {l0}")));
    }
    scored
        .iter()
        .zip(sets)
        .map(|(truth, set)| overlap(&truth.requested, set))
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Average DoO over segments `l0..=L` for `N_fov`-sized prediction sets.
pub fn average_doo(truths: &[SegmentTruth], predictions: &[TileSet], l0: usize) -> Result<f64> {
    Ok(mean(&segment_overlaps(truths, predictions, l0)?))
}

/// Average QoE over segments `l0..=L` for the `N(rho)`-sized streamed sets.
pub fn average_qoe(truths: &[SegmentTruth], streamed: &[TileSet], l0: usize) -> Result<f64> {
    Ok(mean(&segment_overlaps(truths, streamed, l0)?))
}
