//! Closed-form limit objects of the scaled queue: the fluid path `ρ(t)`, the
//! diffusion coefficient `σ(s)` of the Gaussian limit, Ornstein–Uhlenbeck
//! moments, and variance, covariance and MGF of the limit process `U(t)`
//! started from `U(0) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// `1 − e^{−x}` without cancellation at small `x`.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeKind {
    /// `α < 1`: modulation noise dominates.
    Sub,
    /// `α = 1`: both noise sources contribute.
    Critical,
    /// `α > 1`: the background averages out; arrivals look Poisson.
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub beta: f64,
}

impl Regime {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Whether the Poisson (arrival/departure) noise term is present.
    pub fn has_poisson_noise(&self) -> bool {
        matches!(self.kind, RegimeKind::Super | RegimeKind::Critical)
    }

    /// Whether the modulation noise term `Þ` is present.
    pub fn has_modulation_noise(&self) -> bool {
        matches!(self.kind, RegimeKind::Sub | RegimeKind::Critical)
    }
}

/// Regime and `β = min(α/2, 1/2)`. The comparison with 1 is exact.
pub fn classify(alpha: f64) -> Result<Regime> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonpositiveAlpha(alpha));
    }
    let kind = if alpha < 1.0 {
        RegimeKind::Sub
    } else if alpha == 1.0 {
        RegimeKind::Critical
    } else {
        RegimeKind::Super
    };
    Ok(Regime {
        kind,
        beta: (alpha / 2.0).min(0.5),
    })
}

/// Fluid limit `ρ(t) = ρ0·e^{−μt} + (λ∞/μ)(1 − e^{−μt})`, for `t ≥ 0`.
pub fn fluid_limit(model: &ModelSpec, t: f64) -> f64 {
    let mu = model.mu();
    model.rho0() * (-mu * t).exp() + model.lambda_inf() / mu * one_minus_exp_neg(mu * t)
}

/// Diffusion coefficient `σ(s)` of the limit SDE `dU = −μU dt + σ(s) dW`.
pub fn sigma_profile(model: &ModelSpec, alpha: f64, s: f64) -> Result<f64> {
    let regime = classify(alpha)?;
    Ok(sigma_squared(model, regime, s).sqrt())
}

pub(crate) fn sigma_squared(model: &ModelSpec, regime: Regime, s: f64) -> f64 {
    let mut v = 0.0;
    if regime.has_poisson_noise() {
        v += model.lambda_inf() + model.mu() * fluid_limit(model, s);
    }
    if regime.has_modulation_noise() {
        v += model.thorn();
    }
    v
}

/// Parameters of `dS = (a − bS) dt + √c dW`, `S(0) = s0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s0: f64,
}

impl OuParams {
    pub fn new(a: f64, b: f64, c: f64, s0: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::NonpositiveB(b));
        }
        if !(c >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "OU diffusion coefficient c = {c} must be nonnegative"
            )));
        }
        Ok(Self { a, b, c, s0 })
    }

    pub fn stationary_mean(&self) -> f64 {
        self.a / self.b
    }

    pub fn stationary_variance(&self) -> f64 {
        self.c / (2.0 * self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuMoments {
    pub mean: f64,
    pub variance: f64,
    /// `Cov(S(t), S(t + u))`.
    pub covariance: f64,
}

/// Mean and variance at `t` and the covariance between `t` and `t + u`.
pub fn ou_moments(p: &OuParams, t: f64, u: f64) -> Result<OuMoments> {
    if !(p.b > 0.0) {
        return Err(Error::NonpositiveB(p.b));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if !(u >= 0.0) {
        return Err(Error::NegativeTime(u));
    }
    let decay = (-p.b * t).exp();
    let mean = p.s0 * decay + p.a / p.b * one_minus_exp_neg(p.b * t);
    let variance = p.c / (2.0 * p.b) * one_minus_exp_neg(2.0 * p.b * t);
    Ok(OuMoments {
        mean,
        variance,
        covariance: (-p.b * u).exp() * variance,
    })
}

/// Variance contributed by arrival/departure noise,
/// `(ρ0·e^{−μt} + λ∞/μ)(1 − e^{−μt})`.
pub fn poisson_variance(model: &ModelSpec, t: f64) -> f64 {
    let mu = model.mu();
    (model.rho0() * (-mu * t).exp() + model.lambda_inf() / mu) * one_minus_exp_neg(mu * t)
}

/// Variance contributed by modulation noise, `Þ(1 − e^{−2μt})/(2μ)`.
pub fn modulation_variance(model: &ModelSpec, t: f64) -> f64 {
    let mu = model.mu();
    model.thorn() * one_minus_exp_neg(2.0 * mu * t) / (2.0 * mu)
}

pub(crate) fn regime_variance(model: &ModelSpec, regime: Regime, t: f64) -> f64 {
    let mut v = 0.0;
    if regime.has_poisson_noise() {
        v += poisson_variance(model, t);
    }
    if regime.has_modulation_noise() {
        v += modulation_variance(model, t);
    }
    v
}

/// `Var U(t)` of the limit process with `U(0) = 0`.
pub fn u_limit_variance(model: &ModelSpec, alpha: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(regime_variance(model, classify(alpha)?, t))
}

/// `Cov(U(t), U(t + u)) = e^{−μu}·Var U(t)`.
pub fn u_limit_covariance(model: &ModelSpec, alpha: f64, t: f64, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::NegativeTime(u));
    }
    Ok((-model.mu() * u).exp() * u_limit_variance(model, alpha, t)?)
}

/// Limiting MGF `Λ(t, θ) = exp(θ²/2 · Var U(t))`. At `α = 1` both variance
/// terms are present.
pub fn limit_mgf(model: &ModelSpec, alpha: f64, t: f64, theta: f64) -> Result<f64> {
    Ok((0.5 * theta * theta * u_limit_variance(model, alpha, t)?).exp())
}
