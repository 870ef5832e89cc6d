//! Pre-limit MGF `Λ^N(t, θ) = E exp(θ U^N_β(t))` from a linear ODE system.
//!
//! Conditionally on the background path, molecules that arrived in `[0, t]`
//! and are still present at `t` form a Poisson variable with mean
//! `∫₀ᵗ N λ_{J(v)} e^{−μ(t−v)} dv`, while each of the `M(0)` initial molecules
//! survives independently with probability `e^{−μt}`. Hence
//!
//! ```text
//! E e^{sM(t)} = (1 + e^{−μt}(e^s − 1))^{M(0)} · E exp((e^s − 1) ∫₀ᵗ Nλ_{J(v)} e^{−μ(t−v)} dv).
//! ```
//!
//! Reversing time in the stationary background chain turns the second factor
//! into `πᵀξ(t)`, where
//!
//! ```text
//! ξ'(w) = N^α Q ξ(w) + diag(N λ_i (e^s − 1) e^{−μw}) ξ(w),   ξ(0) = 1.
//! ```
//!
//! The weight `e^{−μw}` no longer depends on `t`, so one forward integration
//! yields the whole curve `t ↦ E e^{sM(t)}`.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, TimeGrid};
use crate::limits::{fluid_limit, limit_mgf};
use crate::model::{ModelSpec, ScalingSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// RK4 step as a fraction of the inverse fastest rate in the system.
    pub step_fraction: f64,
    /// Largest accepted change in `log E e^{sM(t)}` when the step is halved.
    pub tolerance: f64,
    pub max_halvings: u32,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            step_fraction: 0.05,
            tolerance: 1e-8,
            max_halvings: 4,
        }
    }
}

/// Values above this are folded into a running log scale.
const RESCALE_AT: f64 = 1e100;

struct LinearSystem {
    /// `N^α Q`, row-major.
    a: Vec<f64>,
    /// `N λ_i (e^s − 1)`.
    potential: Vec<f64>,
    mu: f64,
    d: usize,
    fastest_rate: f64,
}

impl LinearSystem {
    fn new(model: &ModelSpec, scale: &ScalingSpec, s: f64) -> Self {
        let d = model.dim();
        let speed = scale.background_speed();
        let q: &DMatrix<f64> = model.generator().rates();
        let a = (0..d * d).map(|k| speed * q[(k / d, k % d)]).collect();
        let em1 = s.exp_m1();
        let potential: Vec<f64> = model
            .lambda()
            .iter()
            .map(|l| scale.n_f64() * l * em1)
            .collect();
        let fastest_rate = (speed * model.generator().max_exit_rate())
            .max(potential.iter().fold(0.0, |acc: f64, p| acc.max(p.abs())))
            .max(model.mu());
        Self {
            a,
            potential,
            mu: model.mu(),
            d,
            fastest_rate,
        }
    }

    fn derivative(&self, w: f64, x: &[f64], out: &mut [f64]) {
        let decay = (-self.mu * w).exp();
        for i in 0..self.d {
            let row = &self.a[i * self.d..(i + 1) * self.d];
            let mut acc = self.potential[i] * decay * x[i];
            for (aij, xj) in row.iter().zip(x) {
                acc += aij * xj;
            }
            out[i] = acc;
        }
    }

    /// `log πᵀξ(t)` at every grid time with a fixed step of
    /// `step_fraction / fastest_rate` (rounded to divide each grid interval).
    fn integrate(&self, pi: &[f64], times: &[f64], step_fraction: f64) -> Vec<f64> {
        let d = self.d;
        let mut x = vec![1.0; d];
        let mut log_scale = 0.0;
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            vec![0.0; d],
            vec![0.0; d],
            vec![0.0; d],
            vec![0.0; d],
            vec![0.0; d],
        );
        let log_pi_dot = |x: &[f64], log_scale: f64| {
            pi.iter().zip(x).map(|(p, v)| p * v).sum::<f64>().ln() + log_scale
        };
        let mut out = Vec::with_capacity(times.len());
        out.push(log_pi_dot(&x, log_scale));
        for win in times.windows(2) {
            let (start, end) = (win[0], win[1]);
            let steps = ((end - start) * self.fastest_rate / step_fraction)
                .ceil()
                .max(1.0);
            let h = (end - start) / steps;
            for i in 0..steps as usize {
                let w = start + i as f64 * h;
                self.derivative(w, &x, &mut k1);
                for j in 0..d {
                    tmp[j] = x[j] + 0.5 * h * k1[j];
                }
                self.derivative(w + 0.5 * h, &tmp, &mut k2);
                for j in 0..d {
                    tmp[j] = x[j] + 0.5 * h * k2[j];
                }
                self.derivative(w + 0.5 * h, &tmp, &mut k3);
                for j in 0..d {
                    tmp[j] = x[j] + h * k3[j];
                }
                self.derivative(w + h, &tmp, &mut k4);
                for j in 0..d {
                    x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                let big = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if big > RESCALE_AT || (big < 1.0 / RESCALE_AT && big > 0.0) {
                    for v in x.iter_mut() {
                        *v /= big;
                    }
                    log_scale += big.ln();
                }
            }
            out.push(log_pi_dot(&x, log_scale));
        }
        out
    }
}

/// `log E exp(s·M^N(t))` at every grid time, with step-halving control.
pub fn log_mgf_m_curve(
    model: &ModelSpec,
    scale: &ScalingSpec,
    s: f64,
    grid: &TimeGrid,
    options: &OdeOptions,
) -> Result<Vec<f64>> {
    if !s.is_finite() {
        return Err(Error::DegenerateInput(format!("transform argument {s}")));
    }
    let times = grid.times();
    if s == 0.0 {
        return Ok(vec![0.0; times.len()]);
    }
    let system = LinearSystem::new(model, scale, s);
    let pi = model.pi();
    let mut fraction = options.step_fraction;
    let mut coarse = system.integrate(pi, times, fraction);
    let mut change = f64::INFINITY;
    for _ in 0..=options.max_halvings {
        fraction /= 2.0;
        let fine = system.integrate(pi, times, fraction);
        change = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change <= options.tolerance {
            return Ok(add_initial_molecules(model, scale, s, times, fine));
        }
        coarse = fine;
    }
    Err(Error::OdeStepFailure {
        halvings: options.max_halvings + 1,
        change,
    })
}

/// Multiplies in the binomial thinning of the `M(0)` initial molecules.
fn add_initial_molecules(
    model: &ModelSpec,
    scale: &ScalingSpec,
    s: f64,
    times: &[f64],
    mut log_arrivals: Vec<f64>,
) -> Vec<f64> {
    let m0 = model.initial_count(scale.n()) as f64;
    if m0 > 0.0 {
        let em1 = s.exp_m1();
        for (v, &t) in log_arrivals.iter_mut().zip(times) {
            *v += m0 * ((-model.mu() * t).exp() * em1).ln_1p();
        }
    }
    log_arrivals
}

/// `E exp(s·M^N(t))` with the background chain sped up by `N^α`.
pub fn transient_mgf_m(model: &ModelSpec, scale: &ScalingSpec, t: f64, s: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let grid = TimeGrid::from_points(&[t])?;
    let logs = log_mgf_m_curve(model, scale, s, &grid, &OdeOptions::default())?;
    Ok(logs.last().expect("grid is non-empty").exp())
}

/// `Λ^N(t, θ) = E e^{sM^N(t)} · e^{−θN^βρ(t)}` with `s = θ/N^{1−β}`.
pub fn transient_mgf_u(model: &ModelSpec, scale: &ScalingSpec, t: f64, theta: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let grid = TimeGrid::from_points(&[t])?;
    let curve = mgf_curve(model, scale, theta, &grid)?;
    Ok(*curve.values.last().expect("grid is non-empty"))
}

/// `Λ^N(·, θ)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MgfCurve {
    pub theta: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n: u64,
    pub alpha: f64,
}

pub fn mgf_curve(
    model: &ModelSpec,
    scale: &ScalingSpec,
    theta: f64,
    grid: &TimeGrid,
) -> Result<MgfCurve> {
    mgf_curve_with(model, scale, theta, grid, &OdeOptions::default())
}

pub fn mgf_curve_with(
    model: &ModelSpec,
    scale: &ScalingSpec,
    theta: f64,
    grid: &TimeGrid,
    options: &OdeOptions,
) -> Result<MgfCurve> {
    let values = if theta == 0.0 {
        vec![1.0; grid.len()]
    } else {
        let s = theta / scale.u_divisor();
        let shift = theta * scale.u_multiplier();
        log_mgf_m_curve(model, scale, s, grid, options)?
            .iter()
            .zip(grid.times())
            .map(|(log_m, &t)| (log_m - shift * fluid_limit(model, t)).exp())
            .collect()
    };
    Ok(MgfCurve {
        theta,
        grid: grid.times().to_vec(),
        values,
        n: scale.n(),
        alpha: scale.alpha(),
    })
}

/// The error grid `[0, 10/μ]` with step `0.01/μ`.
pub fn default_error_grid(model: &ModelSpec) -> TimeGrid {
    TimeGrid::uniform(10.0 / model.mu(), 0.01 / model.mu()).expect("positive mu gives a valid grid")
}

/// `max_k |a_k − b_k|`.
pub fn sup_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Pre-limit and limiting MGF side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct MgfComparison {
    pub curve: MgfCurve,
    pub limit: Vec<f64>,
}

impl MgfComparison {
    pub fn new(model: &ModelSpec, curve: MgfCurve) -> Result<Self> {
        let limit = curve
            .grid
            .iter()
            .map(|&t| limit_mgf(model, curve.alpha, t, curve.theta))
            .collect::<Result<_>>()?;
        Ok(Self { curve, limit })
    }

    pub fn sup_error(&self) -> f64 {
        sup_abs_gap(&self.curve.values, &self.limit)
    }

    /// CSV `t,lambda_N,lambda_limit,abs_err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,lambda_N,lambda_limit,abs_err")?;
        for ((t, v), l) in self
            .curve
            .grid
            .iter()
            .zip(&self.curve.values)
            .zip(&self.limit)
        {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(*v),
                fmt_f64(*l),
                fmt_f64((v - l).abs())
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// `max_t |Λ^N(t, θ) − Λ(t, θ)|` over the grid.
pub fn sup_error(
    model: &ModelSpec,
    scale: &ScalingSpec,
    theta: f64,
    grid: &TimeGrid,
) -> Result<f64> {
    let curve = mgf_curve(model, scale, theta, grid)?;
    Ok(MgfComparison::new(model, curve)?.sup_error())
}
