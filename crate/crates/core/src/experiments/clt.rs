use serde::Serialize;

use super::{within, Check};
use crate::config::Thresholds;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::limits::{u_limit_covariance, u_limit_variance};
use crate::model::{ModelSpec, ScalingSpec};
use crate::rng::splitmix64;
use crate::simulator::{replication_seeds, scaled_occupation, simulate_paths, u_process};
use crate::stats::{covariance_with_se, Moments};

pub const MIN_CLT_REPLICATIONS: usize = 1000;

/// Seeds for one cell of an experiment, independent across cells.
fn cell_seeds(base_seed: u64, cell: u64, count: usize) -> Vec<u64> {
    replication_seeds(splitmix64(base_seed ^ splitmix64(cell + 1)), count)
}

/// Empirical law of `N^{α/2}(Z^N(t) − πt)` at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZCltScale {
    pub n: u64,
    pub alpha: f64,
    pub background_speed: f64,
    pub t: f64,
    pub replications: usize,
    pub covariance: Vec<Vec<f64>>,
    pub covariance_se: Vec<Vec<f64>>,
    /// `C·t`.
    pub expected: Vec<Vec<f64>>,
    /// `|empirical − C·t| / |C·t|`, absent where `C·t = 0`.
    pub relative_error: Vec<Vec<Option<f64>>>,
    pub skewness: Vec<f64>,
    pub skewness_se: Vec<f64>,
    pub excess_kurtosis: Vec<f64>,
    pub kurtosis_se: Vec<f64>,
    pub row_sums: Vec<f64>,
    pub row_sums_se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZCltReport {
    pub scales: Vec<ZCltScale>,
    pub checks: Vec<Check>,
}

/// Compares the empirical covariance of the scaled occupation fluctuation
/// with `C·t` at each scale, with moment-based normality diagnostics.
pub fn verify_z_clt(
    model: &ModelSpec,
    scales: &[ScalingSpec],
    t: f64,
    replications: usize,
    base_seed: u64,
    thresholds: &Thresholds,
) -> Result<ZCltReport> {
    if replications < MIN_CLT_REPLICATIONS {
        return Err(Error::InsufficientPaths {
            needed: MIN_CLT_REPLICATIONS,
            got: replications,
        });
    }
    let d = model.dim();
    let grid = TimeGrid::from_points(&[t])?;
    let k = grid.len() - 1;
    let c = model.chain().covariance.matrix();
    let sigma = thresholds.sigma_multiplier;
    let mut out = Vec::with_capacity(scales.len());
    let mut checks = Vec::new();
    for (idx, scale) in scales.iter().enumerate() {
        let seeds = cell_seeds(base_seed, idx as u64, replications);
        let paths = simulate_paths(model, scale, t, &grid, &seeds)?;
        let samples: Vec<Vec<f64>> = paths
            .iter()
            .map(|p| scaled_occupation(p, model, scale, k))
            .collect::<Result<_>>()?;
        let column = |i: usize| samples.iter().map(|s| s[i]).collect::<Vec<f64>>();
        let columns: Vec<Vec<f64>> = (0..d).map(column).collect();
        let totals: Vec<f64> = samples.iter().map(|s| s.iter().sum()).collect();

        let mut covariance = vec![vec![0.0; d]; d];
        let mut covariance_se = vec![vec![0.0; d]; d];
        let mut expected = vec![vec![0.0; d]; d];
        let mut relative_error = vec![vec![None; d]; d];
        for i in 0..d {
            for j in 0..d {
                let (cov, se) = covariance_with_se(&columns[i], &columns[j]);
                covariance[i][j] = cov;
                covariance_se[i][j] = se;
                expected[i][j] = c[(i, j)] * t;
                if expected[i][j] != 0.0 {
                    relative_error[i][j] =
                        Some((cov - expected[i][j]).abs() / expected[i][j].abs());
                }
            }
        }
        let moments: Vec<Moments> = columns.iter().map(|col| Moments::from_slice(col)).collect();
        let (row_sums, row_sums_se): (Vec<f64>, Vec<f64>) = columns
            .iter()
            .map(|col| covariance_with_se(col, &totals))
            .unzip();

        let label = format!("N={} alpha={}", scale.n(), scale.alpha());
        let target = expected[0][0];
        let var_ok = if target > 0.0 {
            (covariance[0][0] - target).abs() <= thresholds.covariance_relative * target
        } else {
            covariance[0][0].abs() <= 1e-12
        };
        checks.push(Check::new(
            format!("z_clt variance of component 1 ({label})"),
            var_ok,
            format!(
                "empirical {:.6} vs C11*t = {:.6} (rel tol {})",
                covariance[0][0], target, thresholds.covariance_relative
            ),
        ));
        for (i, m) in moments.iter().enumerate() {
            if m.variance() == 0.0 {
                continue;
            }
            checks.push(Check::new(
                format!("z_clt skewness of component {} ({label})", i + 1),
                m.skewness().abs() <= sigma * m.std_err_skewness(),
                format!("{:.4} (SE {:.4})", m.skewness(), m.std_err_skewness()),
            ));
        }
        let sums_ok = row_sums
            .iter()
            .zip(&row_sums_se)
            .all(|(s, se)| s.abs() <= sigma * se + 1e-12);
        checks.push(Check::new(
            format!("z_clt covariance row sums vanish ({label})"),
            sums_ok,
            format!("{row_sums:?}"),
        ));

        out.push(ZCltScale {
            n: scale.n(),
            alpha: scale.alpha(),
            background_speed: scale.background_speed(),
            t,
            replications,
            covariance,
            covariance_se,
            expected,
            relative_error,
            skewness: moments.iter().map(Moments::skewness).collect(),
            skewness_se: moments.iter().map(Moments::std_err_skewness).collect(),
            excess_kurtosis: moments.iter().map(Moments::excess_kurtosis).collect(),
            kurtosis_se: moments.iter().map(Moments::std_err_kurtosis).collect(),
            row_sums,
            row_sums_se,
        });
    }
    Ok(ZCltReport {
        scales: out,
        checks,
    })
}

/// Which cells [`verify_u_clt`] simulates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UCltDesign {
    pub alpha: f64,
    pub n_list: Vec<u64>,
    pub t_list: Vec<f64>,
    /// `(t, u)` for a `Cov(U(t), U(t+u))` check.
    pub lag: Option<(f64, f64)>,
    pub replications: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UCltRow {
    pub n: u64,
    pub t: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub expected_mean: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub limit_variance: f64,
    pub mean_ok: bool,
    pub variance_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagCheck {
    pub n: u64,
    pub t: f64,
    pub u: f64,
    pub covariance: f64,
    pub covariance_se: f64,
    pub limit_covariance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UCltReport {
    pub alpha: f64,
    pub beta: f64,
    pub replications: usize,
    pub rows: Vec<UCltRow>,
    pub lags: Vec<LagCheck>,
    pub checks: Vec<Check>,
}

/// Empirical mean and variance of `U^N_β(t)` against the Gaussian limit.
///
/// The mean is compared with the exact finite-`N` value
/// `N^β(round(Nρ0)/N − ρ0)·e^{−μt}`; the variance with the limit variance,
/// passing when within `max(k·SE, floor·limit)`.
pub fn verify_u_clt(
    model: &ModelSpec,
    design: &UCltDesign,
    thresholds: &Thresholds,
) -> Result<UCltReport> {
    if design.replications < MIN_CLT_REPLICATIONS {
        return Err(Error::InsufficientPaths {
            needed: MIN_CLT_REPLICATIONS,
            got: design.replications,
        });
    }
    let mut points = design.t_list.clone();
    if let Some((t, u)) = design.lag {
        points.push(t);
        points.push(t + u);
    }
    let grid = TimeGrid::from_points(&points)?;
    let horizon = grid.last();
    if !(horizon > 0.0) {
        return Err(Error::InvalidHorizon(horizon));
    }
    let k_sigma = thresholds.sigma_multiplier;
    let floor = thresholds.variance_relative_floor;
    let mut rows = Vec::new();
    let mut lags = Vec::new();
    let mut checks = Vec::new();
    let mut beta = 0.0;
    for (idx, &n) in design.n_list.iter().enumerate() {
        let scale = ScalingSpec::new(n, design.alpha)?;
        beta = scale.beta();
        let seeds = cell_seeds(design.base_seed, idx as u64, design.replications);
        let paths = simulate_paths(model, &scale, horizon, &grid, &seeds)?;
        let u: Vec<Vec<f64>> = paths
            .iter()
            .map(|p| u_process(p, model, &scale).map(|c| c.value))
            .collect::<Result<_>>()?;
        let column = |k: usize| u.iter().map(|row| row[k]).collect::<Vec<f64>>();
        let offset =
            scale.u_multiplier() * (model.initial_count(n) as f64 / scale.n_f64() - model.rho0());

        for &t in &design.t_list {
            let k = grid.index_of(t).expect("t is on the grid");
            let m = Moments::from_slice(&column(k));
            let expected_mean = offset * (-model.mu() * t).exp();
            let limit_variance = u_limit_variance(model, design.alpha, t)?;
            let mean_ok = (m.mean() - expected_mean).abs() <= k_sigma * m.std_err_mean() + 1e-12;
            let variance_ok = within(
                m.variance(),
                limit_variance,
                m.std_err_variance(),
                k_sigma,
                floor,
            );
            checks.push(Check::new(
                format!("u_clt mean (alpha={} N={n} t={t})", design.alpha),
                mean_ok,
                format!(
                    "{:.5} vs {:.5} (SE {:.5})",
                    m.mean(),
                    expected_mean,
                    m.std_err_mean()
                ),
            ));
            checks.push(Check::new(
                format!("u_clt variance (alpha={} N={n} t={t})", design.alpha),
                variance_ok,
                format!(
                    "{:.5} vs limit {:.5} (SE {:.5})",
                    m.variance(),
                    limit_variance,
                    m.std_err_variance()
                ),
            ));
            rows.push(UCltRow {
                n,
                t,
                mean: m.mean(),
                mean_se: m.std_err_mean(),
                expected_mean,
                variance: m.variance(),
                variance_se: m.std_err_variance(),
                limit_variance,
                mean_ok,
                variance_ok,
            });
        }

        if let Some((t, lag)) = design.lag {
            let k0 = grid.index_of(t).expect("lag start is on the grid");
            let k1 = grid.index_of(t + lag).expect("lag end is on the grid");
            let (cov, se) = covariance_with_se(&column(k0), &column(k1));
            let limit = u_limit_covariance(model, design.alpha, t, lag)?;
            let passed = within(cov, limit, se, k_sigma, floor);
            checks.push(Check::new(
                format!(
                    "u_clt lag covariance (alpha={} N={n} t={t} u={lag})",
                    design.alpha
                ),
                passed,
                format!("{cov:.5} vs limit {limit:.5} (SE {se:.5})"),
            ));
            lags.push(LagCheck {
                n,
                t,
                u: lag,
                covariance: cov,
                covariance_se: se,
                limit_covariance: limit,
                passed,
            });
        }
    }
    Ok(UCltReport {
        alpha: design.alpha,
        beta,
        replications: design.replications,
        rows,
        lags,
        checks,
    })
}
