//! Orchestrated studies: the two-state MGF convergence reproduction,
//! empirical checks of the occupation-time and queue-length CLTs, and the
//! log–log convergence-rate fit, plus the single-run drivers used by the CLI.

mod clt;
mod rate;
mod reproduce;
mod runs;

pub use clt::{
    verify_u_clt, verify_z_clt, LagCheck, UCltDesign, UCltReport, UCltRow, ZCltReport, ZCltScale,
    MIN_CLT_REPLICATIONS,
};
pub use rate::{converge_sweep, rate_fit, RateFit, SweepResult, SweepRow};
pub use reproduce::{reproduce_example, ReproduceOutcome};
pub use runs::{run_mgf, run_simulation};

use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::model::ModelSpec;

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(experiment: impl Into<String>, checks: Vec<Check>) -> Self {
        Self {
            experiment: experiment.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("report.json"), self)
    }
}

/// Exact chain quantities of a model, as written to `analysis.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSummary {
    pub pi: Vec<f64>,
    pub deviation: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    pub thorn: f64,
    pub lambda_inf: f64,
    pub mu: f64,
    pub rho0: f64,
}

impl AnalysisSummary {
    pub fn new(model: &ModelSpec) -> Self {
        let chain = model.chain();
        Self {
            pi: model.pi().to_vec(),
            deviation: matrix_rows(chain.deviation.matrix()),
            covariance: matrix_rows(chain.covariance.matrix()),
            thorn: model.thorn(),
            lambda_inf: model.lambda_inf(),
            mu: model.mu(),
            rho0: model.rho0(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// `|observed − expected| ≤ max(k·SE, floor·|expected|)`.
pub(crate) fn within(observed: f64, expected: f64, se: f64, k: f64, floor: f64) -> bool {
    (observed - expected).abs() <= (k * se).max(floor * expected.abs())
}
