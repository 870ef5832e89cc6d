//! Independent oracles shared by the integration and acceptance targets.
//! Nothing here calls the crate's own solvers for the quantity it checks.
#![allow(dead_code, clippy::needless_range_loop)]

use mmisq_core::{Generator, ModelSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Random irreducible generator: a directed cycle through all states keeps it
/// irreducible, other off-diagonal rates are present with probability 1/2.
pub fn random_generator(rng: &mut impl Rng, d: usize) -> Generator {
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let on_cycle = j == (i + 1) % d;
            if on_cycle || rng.random_bool(0.5) {
                m[(i, j)] = rng.random_range(0.05..5.0);
            }
        }
    }
    Generator::from_off_diagonal(m).unwrap()
}

/// `e^{At}` by Taylor series with scaling and squaring.
pub fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let d = a.nrows();
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * d as f64 * t;
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.5 {
        s += 1;
    }
    let b = a * (t / f64::powi(2.0, s));
    let mut term = DMatrix::identity(d, d);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &b / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `∫₀^∞ (e^{Qt} − 1πᵀ) dt` by composite Simpson on `[0, T]`, with `T`
/// chosen from the spectral gap so the neglected tail is negligible.
pub fn deviation_by_quadrature(
    q: &DMatrix<f64>,
    pi: &[f64],
    t_end: f64,
    steps: usize,
) -> DMatrix<f64> {
    let d = q.nrows();
    let proj = DMatrix::from_fn(d, d, |_, j| pi[j]);
    let h = t_end / steps as f64;
    let step = expm(q, h);
    let mut p = DMatrix::<f64>::identity(d, d);
    let mut acc = DMatrix::<f64>::zeros(d, d);
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (&p - &proj) * w;
        p = &p * &step;
    }
    acc * (h / 3.0)
}

/// Stationary law by power iteration on the uniformized chain.
pub fn stationary_by_power(q: &DMatrix<f64>) -> Vec<f64> {
    let d = q.nrows();
    let lam = (0..d).map(|i| -q[(i, i)]).fold(0.0, f64::max) * 1.1 + 1e-12;
    let k = DMatrix::identity(d, d) + q / lam;
    let mut v = DMatrix::from_element(1, d, 1.0 / d as f64);
    for _ in 0..200_000 {
        let next = &v * &k;
        let diff = (&next - &v).abs().max();
        v = next;
        if diff < 1e-16 {
            break;
        }
    }
    v.iter().copied().collect()
}

/// Euler–Maruyama for `dU = −μU dt + σ(s) dW`, `U(0) = 0`, with `σ²(s)` given
/// per regime. All regimes share the Brownian increments. Returns the sample
/// variance of each regime at each requested time.
pub fn em_variances(
    mu: f64,
    sigma2: &[Box<dyn Fn(f64) -> f64 + Sync>],
    times: &[f64],
    dt: f64,
    paths: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let steps: Vec<usize> = times.iter().map(|t| (t / dt).round() as usize).collect();
    let total = *steps.iter().max().unwrap();
    let r = sigma2.len();
    let mut sum = vec![vec![0.0; times.len()]; r];
    let mut sum_sq = vec![vec![0.0; times.len()]; r];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_dt = dt.sqrt();
    let sig: Vec<Vec<f64>> = sigma2
        .iter()
        .map(|f| (0..total).map(|k| f(k as f64 * dt).sqrt()).collect())
        .collect();
    let mut u = vec![0.0; r];
    for _ in 0..paths {
        u.iter_mut().for_each(|x| *x = 0.0);
        let mut next = 0;
        for k in 0..total {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * sqrt_dt;
            for (i, x) in u.iter_mut().enumerate() {
                *x += -mu * *x * dt + sig[i][k] * dw;
            }
            while next < steps.len() && steps[next] == k + 1 {
                for i in 0..r {
                    sum[i][next] += u[i];
                    sum_sq[i][next] += u[i] * u[i];
                }
                next += 1;
            }
        }
    }
    let n = paths as f64;
    (0..r)
        .map(|i| {
            (0..times.len())
                .map(|j| (sum_sq[i][j] - sum[i][j] * sum[i][j] / n) / (n - 1.0))
                .collect()
        })
        .collect()
}

/// `σ²(s)` written out from the model parameters for each regime.
pub fn regime_sigma2(model: &ModelSpec) -> Vec<Box<dyn Fn(f64) -> f64 + Sync>> {
    let (li, mu, rho0, thorn) = (model.lambda_inf(), model.mu(), model.rho0(), model.thorn());
    let rho = move |s: f64| rho0 * (-mu * s).exp() + li / mu * (1.0 - (-mu * s).exp());
    vec![
        Box::new(move |_| thorn),
        Box::new(move |s| li + mu * rho(s) + thorn),
        Box::new(move |s| li + mu * rho(s)),
    ]
}

/// Poisson `(mean, variance)` of the empty-start unmodulated queue.
pub fn poisson_moments(n: f64, lambda: f64, mu: f64, t: f64) -> (f64, f64) {
    let m = n * lambda / mu * (1.0 - (-mu * t).exp());
    (m, m)
}

/// Induced infinity norm: largest absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
