//! JSON run configuration shared by the experiment drivers and the CLI.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ctmc::Generator;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{ModelSpec, ScalingSpec};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Written into resolved configs; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_version: Option<String>,
}

/// Background generator plus queue parameters. The generator is given either
/// as a full row-major matrix `q` or as a list of off-diagonal rates with a
/// state count; in the latter case the diagonal is filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_diagonal: Option<Vec<Transition>>,
    pub lambda: Vec<f64>,
    pub mu: f64,
    #[serde(default)]
    pub rho0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Simulation horizon `T`.
    pub horizon: f64,
    pub grid_step: f64,
    pub replications: usize,
    pub theta_list: Vec<f64>,
    pub base_seed: u64,
    /// End of the MGF comparison grid; defaults to `10/μ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mgf_horizon: Option<f64>,
    /// Step of the MGF comparison grid; defaults to `0.01/μ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mgf_step: Option<f64>,
    pub thresholds: Thresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            grid_step: 0.1,
            replications: 1000,
            theta_list: vec![0.5],
            base_seed: 42,
            mgf_horizon: None,
            mgf_step: None,
            thresholds: Thresholds::default(),
        }
    }
}

/// Pass/fail thresholds for statistical checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Allowed deviation in units of standard error.
    pub sigma_multiplier: f64,
    /// Relative tolerance for the occupation-time covariance.
    pub covariance_relative: f64,
    /// Relative slack below which a variance mismatch always passes.
    pub variance_relative_floor: f64,
    /// Required `|slope|/SE` for the convergence-rate fit.
    pub min_slope_t_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            sigma_multiplier: 3.0,
            covariance_relative: 0.05,
            variance_relative_floor: 0.03,
            min_slope_t_ratio: 3.0,
        }
    }
}

impl RunConfig {
    /// The two-state example with the default `N` sweep and all three regimes.
    pub fn example() -> Self {
        Self {
            model: ModelConfig {
                q: Some(vec![vec![-1.0, 1.0], vec![3.0, -3.0]]),
                states: None,
                off_diagonal: None,
                lambda: vec![1.0, 4.0],
                mu: 1.0,
                rho0: 0.0,
            },
            scaling: ScalingConfig {
                alpha: None,
                alpha_list: Some(vec![0.5, 1.0, 1.5]),
                n: None,
                n_list: Some(vec![4, 16, 64, 256, 1024]),
            },
            experiment: ExperimentConfig::default(),
            output: None,
            artifact_version: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks everything that can be checked without choosing a subcommand.
    pub fn validate(&self) -> Result<()> {
        self.model.to_spec()?;
        let e = &self.experiment;
        if !(e.horizon.is_finite() && e.horizon > 0.0) {
            return Err(Error::Config(format!(
                "experiment.horizon: {} must be positive",
                e.horizon
            )));
        }
        if !(e.grid_step.is_finite() && e.grid_step > 0.0) {
            return Err(Error::Config(format!(
                "experiment.grid_step: {} must be positive",
                e.grid_step
            )));
        }
        if e.theta_list.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config(
                "experiment.theta_list: non-finite value".into(),
            ));
        }
        for (key, v) in [("mgf_horizon", e.mgf_horizon), ("mgf_step", e.mgf_step)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!(
                        "experiment.{key}: {v} must be positive"
                    )));
                }
            }
        }
        for a in self.scaling.alphas_unchecked() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config(format!(
                    "scaling.alpha: {a} must be positive"
                )));
            }
        }
        if let Some(0) = self.scaling.n {
            return Err(Error::Config("scaling.n: must be at least 1".into()));
        }
        if let Some(list) = &self.scaling.n_list {
            if list.contains(&0) {
                return Err(Error::Config("scaling.n_list: N must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Fills defaults in and stamps the artifact version, producing the form
    /// written as `config.json`.
    pub fn resolved(&self) -> Self {
        let mut cfg = self.clone();
        let mu = cfg.model.mu;
        cfg.experiment.mgf_horizon.get_or_insert(10.0 / mu);
        cfg.experiment.mgf_step.get_or_insert(0.01 / mu);
        cfg.artifact_version = Some(ARTIFACT_VERSION.to_string());
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.experiment.base_seed = seed;
        self
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        self.model.to_spec()
    }

    pub fn simulation_grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.experiment.horizon, self.experiment.grid_step)
    }

    /// Grid for MGF curves and the sup-error metric.
    pub fn mgf_grid(&self) -> Result<TimeGrid> {
        let mu = self.model.mu;
        TimeGrid::uniform(
            self.experiment.mgf_horizon.unwrap_or(10.0 / mu),
            self.experiment.mgf_step.unwrap_or(0.01 / mu),
        )
    }

    /// The single scaling named by `scaling.n` and `scaling.alpha`.
    pub fn single_scaling(&self) -> Result<ScalingSpec> {
        let n = self
            .scaling
            .n
            .ok_or_else(|| Error::Config("scaling.n is required".into()))?;
        ScalingSpec::new(n, self.single_alpha()?)
            .map_err(|e| Error::Config(format!("scaling: {e}")))
    }

    pub fn single_alpha(&self) -> Result<f64> {
        self.scaling
            .alpha
            .ok_or_else(|| Error::Config("scaling.alpha is required".into()))
    }

    /// `scaling.alpha_list`, or `[scaling.alpha]`.
    pub fn alphas(&self) -> Result<Vec<f64>> {
        let list = self.scaling.alphas_unchecked();
        if list.is_empty() {
            return Err(Error::Config(
                "scaling.alpha or scaling.alpha_list is required".into(),
            ));
        }
        Ok(list)
    }

    /// `scaling.n_list`, or `[scaling.n]`.
    pub fn n_values(&self) -> Result<Vec<u64>> {
        match (&self.scaling.n_list, self.scaling.n) {
            (Some(list), _) if !list.is_empty() => Ok(list.clone()),
            (_, Some(n)) => Ok(vec![n]),
            _ => Err(Error::Config(
                "scaling.n or scaling.n_list is required".into(),
            )),
        }
    }
}

impl ScalingConfig {
    fn alphas_unchecked(&self) -> Vec<f64> {
        match (&self.alpha_list, self.alpha) {
            (Some(list), _) if !list.is_empty() => list.clone(),
            (_, Some(a)) => vec![a],
            _ => Vec::new(),
        }
    }
}

impl ModelConfig {
    pub fn to_spec(&self) -> Result<ModelSpec> {
        let generator = self.generator()?;
        ModelSpec::new(generator, self.lambda.clone(), self.mu, self.rho0).map_err(|e| {
            let key = match &e {
                Error::DimensionMismatch { .. } => "model.lambda",
                Error::InvalidModel(msg) if msg.starts_with("mu") => "model.mu",
                Error::InvalidModel(msg) if msg.starts_with("rho0") => "model.rho0",
                _ => "model.lambda",
            };
            Error::Config(format!("{key}: {e}"))
        })
    }

    fn generator(&self) -> Result<Generator> {
        match (&self.q, &self.off_diagonal) {
            (Some(_), Some(_)) => Err(Error::Config(
                "model: give either q or off_diagonal, not both".into(),
            )),
            (Some(rows), None) => {
                if let Some(s) = self.states {
                    if s != rows.len() {
                        return Err(Error::Config(format!(
                            "model.states: {s} does not match q with {} rows",
                            rows.len()
                        )));
                    }
                }
                Generator::from_rows(rows).map_err(|e| Error::Config(format!("model.q: {e}")))
            }
            (None, Some(list)) => {
                let d = self.states.ok_or_else(|| {
                    Error::Config("model.states is required with off_diagonal".into())
                })?;
                let mut m = DMatrix::<f64>::zeros(d, d);
                for (k, tr) in list.iter().enumerate() {
                    if tr.from >= d || tr.to >= d || tr.from == tr.to {
                        return Err(Error::Config(format!(
                            "model.off_diagonal[{k}]: invalid transition {} -> {}",
                            tr.from, tr.to
                        )));
                    }
                    m[(tr.from, tr.to)] += tr.rate;
                }
                Generator::from_off_diagonal(m)
                    .map_err(|e| Error::Config(format!("model.off_diagonal: {e}")))
            }
            (None, None) => Err(Error::Config(
                "model: one of q or off_diagonal is required".into(),
            )),
        }
    }
}
