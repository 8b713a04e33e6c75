//! Trace-driven simulation of privacy-aware proactive tile-based 360° video
//! streaming.
//!
//! A request is streamed segment by segment: head-movement data observed in
//! the privacy-permitted prefix of segment `l - 2` drives a viewport
//! prediction for segment `l`, the edge server renders and transmits the
//! selected tiles within `(1 + rho) * T_seg`, and the streamed tiles are
//! scored against the tiles the user actually looked at.
//!
//! Modules, bottom-up:
//!
//! - [`geometry`]: orientations, the equirectangular tile grid, FoV membership.
//! - [`traces`]: head trace CSV ingestion, resampling, ground-truth requests.
//! - [`privacy`]: degree-of-privacy arithmetic and sampling.
//! - [`resources`]: tile sizes, computing and ergodic transmission rates.
//! - [`scheduler`]: closed-form computing/communication schedule.
//! - [`predictors`]: viewport predictors and the external predictor bridge.
//! - [`selection`]: choosing the streamed tiles from a prediction.
//! - [`metrics`]: overlap, average DoO, QoE.
//! - [`simulator`]: single requests and parameter sweeps.

pub mod error;
pub mod geometry;
pub mod metrics;
pub mod predictors;
pub mod privacy;
pub mod resources;
pub mod scheduler;
pub mod selection;
pub mod simulator;
pub mod traces;

pub use error::{Error, Result};
