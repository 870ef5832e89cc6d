//! Exact event-driven simulation of the scaled queue and Monte Carlo
//! summaries built on it.

mod ensemble;
mod martingale;
mod path;

pub use ensemble::{
    replicate, replicate_with_seeds, replication_seeds, EnsembleStats, MgfEstimate,
};
pub use martingale::{martingale_drift_check, martingale_value, DriftReport, MIN_DRIFT_PATHS};
pub use path::{
    quadratic_variation, scaled_occupation, simulate_path, simulate_path_with, u_process,
    EventCounts, PathSample, SimOptions, DEFAULT_EVENT_CAP,
};

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::TimeGrid;
use crate::model::{ModelSpec, ScalingSpec};

/// Simulates one path per seed, in parallel, returned in seed order.
pub fn simulate_paths(
    model: &ModelSpec,
    scale: &ScalingSpec,
    horizon: f64,
    grid: &TimeGrid,
    seeds: &[u64],
) -> Result<Vec<PathSample>> {
    seeds
        .par_iter()
        .map(|&s| simulate_path(model, scale, horizon, grid, s))
        .collect()
}
