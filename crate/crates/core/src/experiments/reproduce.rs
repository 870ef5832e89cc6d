use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{converge_sweep, write_json, AnalysisSummary, Check, Report, SweepResult};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::fmt_f64;
use crate::limits::{classify, RegimeKind};

/// Everything [`reproduce_example`] computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOutcome {
    pub analysis: AnalysisSummary,
    pub sweeps: Vec<SweepResult>,
    pub report: Report,
}

/// Solves the transient MGF for every `(α, N)` in the config at the first
/// `θ` of `theta_list`, compares each curve with the Gaussian limit and fits
/// the decay of the sup-norm error in `N`.
///
/// Writes into `outdir`: `config.json`, `analysis.json`,
/// `mgf_alpha_<α>_N_<N>.csv`, `sup_error.csv`, `rate_fit.csv` and
/// `report.json`.
pub fn reproduce_example(cfg: &RunConfig, outdir: &Path) -> Result<ReproduceOutcome> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let model = cfg.model_spec()?;
    let grid = cfg.mgf_grid()?;
    let alphas = cfg.alphas()?;
    let n_list = cfg.n_values()?;
    let theta = *cfg
        .experiment
        .theta_list
        .first()
        .ok_or_else(|| Error::Config("experiment.theta_list must not be empty".into()))?;
    let thresholds = cfg.experiment.thresholds;

    fs::create_dir_all(outdir)?;
    write_json(&outdir.join("config.json"), &cfg)?;
    let analysis = AnalysisSummary::new(&model);
    write_json(&outdir.join("analysis.json"), &analysis)?;

    let mut sweeps = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let (sweep, curves) = converge_sweep(&model, alpha, theta, &n_list, &grid)?;
        for c in &curves {
            c.save_csv(&outdir.join(format!("mgf_alpha_{}_N_{}.csv", alpha, c.curve.n)))?;
        }
        sweeps.push(sweep);
    }

    let mut out = BufWriter::new(fs::File::create(outdir.join("sup_error.csv"))?);
    writeln!(out, "alpha,N,sup_error")?;
    for s in &sweeps {
        s.write_rows(&mut out)?;
    }
    out.flush()?;

    let mut out = BufWriter::new(fs::File::create(outdir.join("rate_fit.csv"))?);
    writeln!(out, "alpha,slope,slope_se,intercept,t_ratio")?;
    for s in &sweeps {
        if let Some(f) = &s.fit {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(s.alpha),
                fmt_f64(f.slope),
                fmt_f64(f.slope_se),
                fmt_f64(f.intercept),
                fmt_f64(f.t_ratio())
            )?;
        }
    }
    out.flush()?;

    let mut checks = Vec::new();
    for s in &sweeps {
        let errors: Vec<String> = s
            .rows
            .iter()
            .map(|r| format!("{:.3e}", r.sup_error))
            .collect();
        checks.push(Check::new(
            format!("sup error strictly decreasing in N (alpha={})", s.alpha),
            s.strictly_decreasing(),
            errors.join(", "),
        ));
        // The sub-critical error decays too slowly over a short N sweep for
        // a slope test to be meaningful.
        if classify(s.alpha)?.kind == RegimeKind::Sub {
            continue;
        }
        let (passed, detail) = match &s.fit {
            Some(f) => (
                f.slope < 0.0 && f.t_ratio() > thresholds.min_slope_t_ratio,
                format!(
                    "slope {:.4} (SE {:.4}, t {:.1})",
                    f.slope,
                    f.slope_se,
                    f.t_ratio()
                ),
            ),
            None => (false, "fewer than 3 positive errors".to_string()),
        };
        checks.push(Check::new(
            format!("log-log rate fit has negative slope (alpha={})", s.alpha),
            passed,
            detail,
        ));
    }
    let lowest = sweeps.iter().min_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let highest = sweeps.iter().max_by(|a, b| a.alpha.total_cmp(&b.alpha));
    if let (Some(lo), Some(hi)) = (lowest, highest) {
        if lo.alpha < hi.alpha {
            let (e_lo, e_hi) = (
                lo.last_error().unwrap_or(0.0),
                hi.last_error().unwrap_or(0.0),
            );
            checks.push(Check::new(
                format!(
                    "alpha={} converges slower than alpha={} at the largest N",
                    lo.alpha, hi.alpha
                ),
                e_lo > e_hi,
                format!("{e_lo:.4e} vs {e_hi:.4e}"),
            ));
        }
    }
    let report = Report::new("reproduce", checks);
    report.save(outdir)?;
    Ok(ReproduceOutcome {
        analysis,
        sweeps,
        report,
    })
}
