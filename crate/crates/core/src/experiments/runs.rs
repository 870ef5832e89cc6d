//! Drivers behind the `simulate` and `mgf` subcommands.

use std::fs;
use std::path::Path;

use super::{write_json, Check, Report};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mgf::{mgf_curve, MgfComparison};
use crate::model::ScalingSpec;
use crate::rng::replication_seed;
use crate::simulator::{replicate, simulate_path, EnsembleStats};

/// Monte Carlo ensemble of `U^N_β` at the single configured scaling.
///
/// Writes `config.json`, `ensemble.csv`, `trajectory.csv` (the first
/// replication) and `report.json`. The report checks the empirical mean at
/// the horizon against its exact finite-`N` value. A single time is tested
/// so the check keeps its nominal level.
pub fn run_simulation(cfg: &RunConfig, outdir: &Path) -> Result<(EnsembleStats, Report)> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let e = &cfg.experiment;
    if e.replications < 2 {
        return Err(Error::Config(format!(
            "experiment.replications: {} given, at least 2 required",
            e.replications
        )));
    }
    let model = cfg.model_spec()?;
    let scale = cfg.single_scaling()?;
    let grid = cfg.simulation_grid()?;

    fs::create_dir_all(outdir)?;
    write_json(&outdir.join("config.json"), &cfg)?;
    let stats = replicate(
        &model,
        &scale,
        e.horizon,
        &grid,
        e.replications,
        &e.theta_list,
        e.base_seed,
    )?;
    stats.save_csv(&outdir.join("ensemble.csv"))?;
    let path = simulate_path(
        &model,
        &scale,
        e.horizon,
        &grid,
        replication_seed(e.base_seed, 0),
    )?;
    let mut out = std::io::BufWriter::new(fs::File::create(outdir.join("trajectory.csv"))?);
    path.write_csv(&mut out)?;

    let offset = scale.u_multiplier()
        * (model.initial_count(scale.n()) as f64 / scale.n_f64() - model.rho0());
    let last = stats.grid.len() - 1;
    let t = stats.grid[last];
    let expected = offset * (-model.mu() * t).exp();
    let (mean, se) = (stats.mean_u[last], stats.se_mean[last]);
    let k = e.thresholds.sigma_multiplier;
    let report = Report::new(
        "simulate",
        vec![Check::new(
            format!("mean of U at t={t} matches its exact value"),
            (mean - expected).abs() <= k * se + 1e-12,
            format!("{mean:.5} vs {expected:.5} (SE {se:.5})"),
        )],
    );
    report.save(outdir)?;
    Ok((stats, report))
}

/// Transient MGF curves `Λ^N(·, θ)` with the limit, for every `N` and `θ`
/// in the config at the single configured `α`.
///
/// Writes `config.json`, `mgf_alpha_<α>_N_<N>_theta_<θ>.csv` and
/// `report.json`; the report records each sup-norm gap and always passes.
pub fn run_mgf(cfg: &RunConfig, outdir: &Path) -> Result<(Vec<MgfComparison>, Report)> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let model = cfg.model_spec()?;
    let alpha = cfg.single_alpha()?;
    let grid = cfg.mgf_grid()?;
    if cfg.experiment.theta_list.is_empty() {
        return Err(Error::Config(
            "experiment.theta_list must not be empty".into(),
        ));
    }
    fs::create_dir_all(outdir)?;
    write_json(&outdir.join("config.json"), &cfg)?;
    let mut comparisons = Vec::new();
    let mut checks = Vec::new();
    for n in cfg.n_values()? {
        let scale = ScalingSpec::new(n, alpha)?;
        for &theta in &cfg.experiment.theta_list {
            let c = MgfComparison::new(&model, mgf_curve(&model, &scale, theta, &grid)?)?;
            c.save_csv(&outdir.join(format!("mgf_alpha_{alpha}_N_{n}_theta_{theta}.csv")))?;
            checks.push(Check::new(
                format!("sup error (alpha={alpha} N={n} theta={theta})"),
                true,
                format!("{:.6e}", c.sup_error()),
            ));
            comparisons.push(c);
        }
    }
    let report = Report::new("mgf", checks);
    report.save(outdir)?;
    Ok((comparisons, report))
}
