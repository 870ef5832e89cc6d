use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::path::{simulate_path, u_values};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, TimeGrid};
use crate::model::{ModelSpec, ScalingSpec};
use crate::rng::replication_seed;
use crate::stats::{jackknife_se_of_mean, Moments};

/// Empirical MGF `E exp(θU)` at every grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct MgfEstimate {
    pub theta: f64,
    pub value: Vec<f64>,
    /// Jackknife standard errors.
    pub std_err: Vec<f64>,
}

/// Per-grid-time statistics of `U^N_β` over `R` replications.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub grid: Vec<f64>,
    pub mean_u: Vec<f64>,
    pub se_mean: Vec<f64>,
    pub var_u: Vec<f64>,
    pub se_var: Vec<f64>,
    pub skewness: Vec<f64>,
    pub mgf: Vec<MgfEstimate>,
    pub replications: usize,
}

impl EnsembleStats {
    /// Reduces replication results given in replication order.
    pub fn from_samples(grid: &[f64], samples: &[Vec<f64>], thetas: &[f64]) -> Self {
        let g = grid.len();
        let mut mean_u = Vec::with_capacity(g);
        let mut se_mean = Vec::with_capacity(g);
        let mut var_u = Vec::with_capacity(g);
        let mut se_var = Vec::with_capacity(g);
        let mut skewness = Vec::with_capacity(g);
        let mut mgf: Vec<MgfEstimate> = thetas
            .iter()
            .map(|&theta| MgfEstimate {
                theta,
                value: Vec::with_capacity(g),
                std_err: Vec::with_capacity(g),
            })
            .collect();
        let mut column = Vec::with_capacity(samples.len());
        for k in 0..g {
            column.clear();
            column.extend(samples.iter().map(|s| s[k]));
            let m = Moments::from_slice(&column);
            mean_u.push(m.mean());
            se_mean.push(m.std_err_mean());
            var_u.push(m.variance());
            se_var.push(m.std_err_variance());
            skewness.push(m.skewness());
            for est in mgf.iter_mut() {
                let e: Vec<f64> = column.iter().map(|u| (est.theta * u).exp()).collect();
                est.value.push(e.iter().sum::<f64>() / e.len() as f64);
                est.std_err.push(jackknife_se_of_mean(&e));
            }
        }
        Self {
            grid: grid.to_vec(),
            mean_u,
            se_mean,
            var_u,
            se_var,
            skewness,
            mgf,
            replications: samples.len(),
        }
    }

    /// CSV `t,mean_u,var_u,se_var,mgf_theta_<θ>,se_mgf_<θ>,…`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "t,mean_u,var_u,se_var")?;
        for est in &self.mgf {
            write!(out, ",mgf_theta_{0},se_mgf_{0}", est.theta)?;
        }
        writeln!(out)?;
        for k in 0..self.grid.len() {
            write!(
                out,
                "{},{},{},{}",
                fmt_f64(self.grid[k]),
                fmt_f64(self.mean_u[k]),
                fmt_f64(self.var_u[k]),
                fmt_f64(self.se_var[k])
            )?;
            for est in &self.mgf {
                write!(
                    out,
                    ",{},{}",
                    fmt_f64(est.value[k]),
                    fmt_f64(est.std_err[k])
                )?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Seeds `0..count` derived from `base_seed`.
pub fn replication_seeds(base_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|r| replication_seed(base_seed, r))
        .collect()
}

/// Runs `replications` independent paths and summarizes `U^N_β` on the grid.
pub fn replicate(
    model: &ModelSpec,
    scale: &ScalingSpec,
    horizon: f64,
    grid: &TimeGrid,
    replications: usize,
    thetas: &[f64],
    base_seed: u64,
) -> Result<EnsembleStats> {
    let seeds = replication_seeds(base_seed, replications);
    replicate_with_seeds(model, scale, horizon, grid, &seeds, thetas)
}

/// As [`replicate`], with the per-replication seeds given explicitly.
pub fn replicate_with_seeds(
    model: &ModelSpec,
    scale: &ScalingSpec,
    horizon: f64,
    grid: &TimeGrid,
    seeds: &[u64],
    thetas: &[f64],
) -> Result<EnsembleStats> {
    if seeds.len() < 2 {
        return Err(Error::InsufficientPaths {
            needed: 2,
            got: seeds.len(),
        });
    }
    let samples = seeds
        .par_iter()
        .map(|&seed| {
            simulate_path(model, scale, horizon, grid, seed).map(|p| u_values(&p, model, scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats::from_samples(grid.times(), &samples, thetas))
}
