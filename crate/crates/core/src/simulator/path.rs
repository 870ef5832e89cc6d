use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, CurveTable, TimeGrid};
use crate::limits::fluid_limit;
use crate::model::{ModelSpec, ScalingSpec};
use crate::rng::rng_from_seed;

pub const DEFAULT_EVENT_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Abort with [`Error::EventOverflow`] after this many events.
    pub event_cap: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            event_cap: DEFAULT_EVENT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventCounts {
    pub arrivals: u64,
    pub departures: u64,
    pub background_jumps: u64,
    /// Background transitions `i → j` on `[0, horizon]`, row-major `d×d`.
    pub transitions: Vec<u64>,
}

/// One trajectory of `(J^N, M^N, Z^N)` observed on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: Vec<f64>,
    pub j_path: Vec<usize>,
    pub m_path: Vec<u64>,
    /// Occupation times per state at each grid time.
    pub z_path: Vec<Vec<f64>>,
    pub event_counts: EventCounts,
    pub seed: u64,
    pub n: u64,
    pub alpha: f64,
    pub horizon: f64,
}

impl PathSample {
    pub fn dim(&self) -> usize {
        self.z_path.first().map_or(0, Vec::len)
    }

    pub fn transitions(&self, from: usize, to: usize) -> u64 {
        let d = self.dim();
        self.event_counts.transitions[from * d + to]
    }

    /// CSV with header `t,j,m,z_1,...,z_d`; background states are numbered
    /// from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dim();
        write!(out, "t,j,m")?;
        for i in 1..=d {
            write!(out, ",z_{i}")?;
        }
        writeln!(out)?;
        for k in 0..self.grid.len() {
            write!(
                out,
                "{},{},{}",
                fmt_f64(self.grid[k]),
                self.j_path[k] + 1,
                self.m_path[k]
            )?;
            for z in &self.z_path[k] {
                write!(out, ",{}", fmt_f64(*z))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Direct-method simulation of the scaled pair `(J^N, M^N)` on `[0, horizon]`.
///
/// Between events the total rate `N^α q_J + N λ_J + μ M` is constant, so an
/// exponential holding time followed by a categorical choice of event is
/// exact. `J(0)` is drawn from `π`; `M(0) = round(N ρ0)`.
pub fn simulate_path(
    model: &ModelSpec,
    scale: &ScalingSpec,
    horizon: f64,
    grid: &TimeGrid,
    seed: u64,
) -> Result<PathSample> {
    simulate_path_with(model, scale, horizon, grid, seed, &SimOptions::default())
}

pub fn simulate_path_with(
    model: &ModelSpec,
    scale: &ScalingSpec,
    horizon: f64,
    grid: &TimeGrid,
    seed: u64,
    options: &SimOptions,
) -> Result<PathSample> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidHorizon(horizon));
    }
    if grid.last() > horizon {
        return Err(Error::InvalidGrid(format!(
            "grid extends to {} beyond horizon {horizon}",
            grid.last()
        )));
    }
    let d = model.dim();
    let g = model.generator();
    let speed = scale.background_speed();
    let exit: Vec<f64> = (0..d).map(|i| speed * g.exit_rate(i)).collect();
    let arrival: Vec<f64> = model.lambda().iter().map(|l| scale.n_f64() * l).collect();
    let mu = model.mu();
    // Cumulative jump probabilities out of each state.
    let jump_cdf: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let q = g.exit_rate(i);
            let mut acc = 0.0;
            (0..d)
                .map(|j| {
                    if j != i && q > 0.0 {
                        acc += g.rates()[(i, j)] / q;
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let mut rng = rng_from_seed(seed);
    let mut j = sample_index(model.pi(), rng.random::<f64>());
    let mut m = model.initial_count(scale.n());
    let mut z = vec![0.0; d];
    let mut entered = 0.0;
    let mut t = 0.0;
    let mut counts = EventCounts {
        arrivals: 0,
        departures: 0,
        background_jumps: 0,
        transitions: vec![0; d * d],
    };
    let times = grid.times();
    let mut j_path = Vec::with_capacity(times.len());
    let mut m_path = Vec::with_capacity(times.len());
    let mut z_path = Vec::with_capacity(times.len());
    let mut next_grid = 0usize;
    let mut events = 0u64;

    loop {
        let total = exit[j] + arrival[j] + mu * m as f64;
        let next = if total > 0.0 {
            let e: f64 = rng.sample(Exp1);
            t + e / total
        } else {
            f64::INFINITY
        };
        while next_grid < times.len() && times[next_grid] < next {
            let s = times[next_grid];
            let mut zs = z.clone();
            zs[j] += s - entered;
            debug_assert!((zs.iter().sum::<f64>() - s).abs() <= 1e-9 * s.max(1.0));
            j_path.push(j);
            m_path.push(m);
            z_path.push(zs);
            next_grid += 1;
        }
        if next > horizon {
            break;
        }
        events += 1;
        if events > options.event_cap {
            return Err(Error::EventOverflow {
                cap: options.event_cap,
                horizon,
            });
        }
        t = next;
        let u = rng.random::<f64>() * total;
        if u < exit[j] {
            let target = sample_index_cdf(&jump_cdf[j], u / exit[j]);
            z[j] += t - entered;
            entered = t;
            counts.background_jumps += 1;
            counts.transitions[j * d + target] += 1;
            j = target;
        } else if u < exit[j] + arrival[j] || m == 0 {
            m += 1;
            counts.arrivals += 1;
        } else {
            m -= 1;
            counts.departures += 1;
        }
    }

    Ok(PathSample {
        grid: times.to_vec(),
        j_path,
        m_path,
        z_path,
        event_counts: counts,
        seed,
        n: scale.n(),
        alpha: scale.alpha(),
        horizon,
    })
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the last cumulative sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn sample_index_cdf(cdf: &[f64], u: f64) -> usize {
    match cdf.iter().position(|&c| u < c) {
        Some(i) => i,
        None => {
            // Rounding gap: take the last reachable target.
            let mut last = 0;
            let mut prev = 0.0;
            for (i, &c) in cdf.iter().enumerate() {
                if c > prev {
                    last = i;
                }
                prev = c;
            }
            last
        }
    }
}

fn check_path(path: &PathSample, model: &ModelSpec, scale: &ScalingSpec) -> Result<()> {
    if path.n != scale.n() || path.alpha != scale.alpha() {
        return Err(Error::SpecMismatch(format!(
            "path simulated at (N={}, alpha={}) but scaling is (N={}, alpha={})",
            path.n,
            path.alpha,
            scale.n(),
            scale.alpha()
        )));
    }
    if path.dim() != model.dim() {
        return Err(Error::SpecMismatch(format!(
            "path has {} background states, model has {}",
            path.dim(),
            model.dim()
        )));
    }
    Ok(())
}

/// `U^N_β(t) = (M^N(t) − Nρ(t)) / N^{1−β}` at every grid time of the path.
pub fn u_process(path: &PathSample, model: &ModelSpec, scale: &ScalingSpec) -> Result<CurveTable> {
    check_path(path, model, scale)?;
    Ok(CurveTable::new(
        path.grid.clone(),
        u_values(path, model, scale),
    ))
}

pub(crate) fn u_values(path: &PathSample, model: &ModelSpec, scale: &ScalingSpec) -> Vec<f64> {
    let n = scale.n_f64();
    let divisor = scale.u_divisor();
    path.grid
        .iter()
        .zip(&path.m_path)
        .map(|(&t, &m)| (m as f64 - n * fluid_limit(model, t)) / divisor)
        .collect()
}

/// Scaled occupation fluctuation `N^{α/2}(Z^N(t) − πt)` at grid index `k`.
pub fn scaled_occupation(
    path: &PathSample,
    model: &ModelSpec,
    scale: &ScalingSpec,
    k: usize,
) -> Result<Vec<f64>> {
    check_path(path, model, scale)?;
    let factor = scale.background_speed().sqrt();
    let t = path.grid[k];
    Ok(path.z_path[k]
        .iter()
        .zip(model.pi())
        .map(|(z, p)| factor * (z - p * t))
        .collect())
}

/// Quadratic variation of `N^{−α/2} Σ f_i X̃_i` over `[0, horizon]`:
/// `N^{−α} Σ_{i,j} (f_j − f_i)² · #(i → j jumps)`.
pub fn quadratic_variation(path: &PathSample, f: &[f64], scale: &ScalingSpec) -> Result<f64> {
    let d = path.dim();
    if f.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.len(),
        });
    }
    let mut qv = 0.0;
    for i in 0..d {
        for j in 0..d {
            qv += (f[j] - f[i]).powi(2) * path.transitions(i, j) as f64;
        }
    }
    Ok(qv / scale.background_speed())
}
