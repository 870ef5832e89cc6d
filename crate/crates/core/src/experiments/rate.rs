use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, TimeGrid};
use crate::mgf::{mgf_curve, MgfComparison};
use crate::model::{ModelSpec, ScalingSpec};
use crate::stats::linear_fit;

/// Least-squares slope of `log(error)` against `log(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

impl RateFit {
    /// `|slope| / SE`; infinite for an exact fit with nonzero slope.
    pub fn t_ratio(&self) -> f64 {
        if self.slope_se > 0.0 {
            self.slope.abs() / self.slope_se
        } else if self.slope != 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

pub fn rate_fit(rows: &[(u64, f64)]) -> Result<RateFit> {
    if rows.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "rate fit needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    if let Some((n, e)) = rows.iter().find(|(_, e)| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateInput(format!(
            "error {e} at N = {n} is not positive"
        )));
    }
    let x: Vec<f64> = rows.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|(_, e)| e.ln()).collect();
    let fit = linear_fit(&x, &y)
        .ok_or_else(|| Error::DegenerateInput("rate fit needs distinct N".to_string()))?;
    Ok(RateFit {
        slope: fit.slope,
        slope_se: fit.slope_se,
        intercept: fit.intercept,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub alpha: f64,
    pub theta: f64,
    pub rows: Vec<SweepRow>,
    pub fit: Option<RateFit>,
}

impl SweepResult {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sup_error < w[0].sup_error)
    }

    pub fn last_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.sup_error)
    }

    /// CSV `alpha,N,sup_error`.
    pub fn write_rows<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{}",
                fmt_f64(self.alpha),
                r.n,
                fmt_f64(r.sup_error)
            )?;
        }
        Ok(())
    }
}

/// Computes `Λ^N(·, θ)` for every `N` and the sup-norm gap to `Λ(·, θ)`.
/// Cells run in parallel; results keep the order of `n_list`.
pub fn converge_sweep(
    model: &ModelSpec,
    alpha: f64,
    theta: f64,
    n_list: &[u64],
    grid: &TimeGrid,
) -> Result<(SweepResult, Vec<MgfComparison>)> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateInput(
            "N values must be non-empty and strictly increasing".to_string(),
        ));
    }
    let curves = n_list
        .par_iter()
        .map(|&n| {
            let scale = ScalingSpec::new(n, alpha)?;
            MgfComparison::new(model, mgf_curve(model, &scale, theta, grid)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = curves
        .iter()
        .zip(n_list)
        .map(|(c, &n)| SweepRow {
            n,
            sup_error: c.sup_error(),
        })
        .collect();
    let pairs: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.sup_error)).collect();
    let fit = rate_fit(&pairs).ok();
    Ok((
        SweepResult {
            alpha,
            theta,
            rows,
            fit,
        },
        curves,
    ))
}
