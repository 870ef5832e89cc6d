use serde::Serialize;

use super::path::PathSample;
use crate::ctmc::{DeviationMatrix, StationaryLaw};
use crate::error::{Error, Result};
use crate::model::ScalingSpec;
use crate::stats::Moments;

pub const MIN_DRIFT_PATHS: usize = 1000;

/// Sample mean of `V^N(t)` per grid time and component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub grid: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub std_err: Vec<Vec<f64>>,
    pub paths: usize,
}

impl DriftReport {
    /// Largest `|mean|/SE` over all grid times and components. A component
    /// with zero spread counts as 0 if its mean is 0 and as infinite otherwise.
    pub fn max_abs_z(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (ms, ses) in self.mean.iter().zip(&self.std_err) {
            for (m, se) in ms.iter().zip(ses) {
                let z = if *se > 0.0 {
                    m.abs() / se
                } else if *m == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// `V^N(t) = N^{−α/2}·(X^N(t) − X^N(0))ᵀD + N^{α/2}·(Z^N(t) − πt)` for one
/// path at grid index `k`. This process is a martingale with `V^N(0) = 0`.
pub fn martingale_value(
    path: &PathSample,
    law: &StationaryLaw,
    dev: &DeviationMatrix,
    scale: &ScalingSpec,
    k: usize,
) -> Vec<f64> {
    let root = scale.background_speed().sqrt();
    let d = dev.matrix();
    let (j0, jt) = (path.j_path[0], path.j_path[k]);
    let t = path.grid[k];
    (0..law.dim())
        .map(|c| (d[(jt, c)] - d[(j0, c)]) / root + root * (path.z_path[k][c] - law.pi()[c] * t))
        .collect()
}

/// Componentwise sample mean and standard error of `V^N(t)` at every grid time.
pub fn martingale_drift_check(
    paths: &[PathSample],
    law: &StationaryLaw,
    dev: &DeviationMatrix,
    scale: &ScalingSpec,
) -> Result<DriftReport> {
    if paths.len() < MIN_DRIFT_PATHS {
        return Err(Error::InsufficientPaths {
            needed: MIN_DRIFT_PATHS,
            got: paths.len(),
        });
    }
    let d = law.dim();
    let grid = paths[0].grid.clone();
    for p in paths {
        if p.grid != grid || p.dim() != d || p.n != scale.n() || p.alpha != scale.alpha() {
            return Err(Error::SpecMismatch(
                "paths must share grid, dimension and scaling".to_string(),
            ));
        }
    }
    let mut mean = Vec::with_capacity(grid.len());
    let mut std_err = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let mut acc = vec![Moments::new(); d];
        for p in paths {
            for (a, v) in acc.iter_mut().zip(martingale_value(p, law, dev, scale, k)) {
                a.push(v);
            }
        }
        mean.push(acc.iter().map(Moments::mean).collect());
        std_err.push(acc.iter().map(Moments::std_err_mean).collect());
    }
    Ok(DriftReport {
        grid,
        mean,
        std_err,
        paths: paths.len(),
    })
}
