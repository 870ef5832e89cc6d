use serde::{Deserialize, Serialize};

use crate::ctmc::{ChainAnalysis, Generator};
use crate::error::{Error, Result};
use crate::limits::{classify, Regime};

/// The unscaled queue: background generator, per-state arrival rates, service
/// rate and the initial scaled level `ρ0`.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    generator: Generator,
    lambda: Vec<f64>,
    mu: f64,
    rho0: f64,
    chain: ChainAnalysis,
    lambda_inf: f64,
}

impl ModelSpec {
    /// Rejects an all-zero arrival vector; see [`ModelSpec::new_allow_idle`].
    pub fn new(generator: Generator, lambda: Vec<f64>, mu: f64, rho0: f64) -> Result<Self> {
        if lambda.iter().all(|&l| l == 0.0) {
            return Err(Error::InvalidModel(
                "all arrival rates are zero".to_string(),
            ));
        }
        Self::new_allow_idle(generator, lambda, mu, rho0)
    }

    /// Like [`ModelSpec::new`] but permits a model with no arrivals at all.
    pub fn new_allow_idle(
        generator: Generator,
        lambda: Vec<f64>,
        mu: f64,
        rho0: f64,
    ) -> Result<Self> {
        if lambda.len() != generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: generator.dim(),
                found: lambda.len(),
            });
        }
        if let Some((i, l)) = lambda
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.is_finite() && **l >= 0.0))
        {
            return Err(Error::InvalidModel(format!(
                "lambda[{i}] = {l} must be finite and nonnegative"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidModel(format!("mu = {mu} must be positive")));
        }
        if !(rho0.is_finite() && rho0 >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "rho0 = {rho0} must be finite and nonnegative"
            )));
        }
        let chain = ChainAnalysis::new(&generator)?;
        let lambda_inf = chain.stationary.expectation(&lambda)?;
        Ok(Self {
            generator,
            lambda,
            mu,
            rho0,
            chain,
            lambda_inf,
        })
    }

    /// The two-state example: `q = (1, 3)`, `λ = (1, 4)`, `μ = 1`, `ρ0 = 0`.
    pub fn two_state_example() -> Self {
        let g = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]])
            .expect("example generator is valid");
        Self::new(g, vec![1.0, 4.0], 1.0, 0.0).expect("example model is valid")
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn chain(&self) -> &ChainAnalysis {
        &self.chain
    }

    pub fn pi(&self) -> &[f64] {
        self.chain.stationary.as_slice()
    }

    /// Stationary arrival rate `λ∞ = πᵀλ`.
    pub fn lambda_inf(&self) -> f64 {
        self.lambda_inf
    }

    /// `Þ = λᵀCλ` for this model.
    pub fn thorn(&self) -> f64 {
        crate::ctmc::thorn(&self.lambda, &self.chain.covariance)
            .expect("dimensions validated at construction")
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }

    /// Initial molecule count `round(N·ρ0)`, ties to even.
    pub fn initial_count(&self, n: u64) -> u64 {
        (n as f64 * self.rho0).round_ties_even() as u64
    }
}

/// Scale `N` and time-scale exponent `α`; `β = min(α/2, 1/2)` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    n: u64,
    alpha: f64,
}

impl ScalingSpec {
    pub fn new(n: u64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidScaling("N must be at least 1".to_string()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::NonpositiveAlpha(alpha));
        }
        Ok(Self { n, alpha })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_f64(&self) -> f64 {
        self.n as f64
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        classify(self.alpha).expect("alpha validated at construction")
    }

    pub fn beta(&self) -> f64 {
        self.regime().beta()
    }

    /// Speed-up of the background chain, `N^α`.
    pub fn background_speed(&self) -> f64 {
        self.n_f64().powf(self.alpha)
    }

    /// `N^{1−β}`, the divisor turning `M − Nρ` into `U`.
    pub fn u_divisor(&self) -> f64 {
        self.n_f64().powf(1.0 - self.beta())
    }

    /// `N^β`.
    pub fn u_multiplier(&self) -> f64 {
        self.n_f64().powf(self.beta())
    }
}
