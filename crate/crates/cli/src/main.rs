use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mmisq_core::experiments::{
    reproduce_example, run_mgf, run_simulation, write_json, AnalysisSummary, Report,
};
use mmisq_core::limits::{classify, fluid_limit, RegimeKind};
use mmisq_core::{u_limit_variance, RunConfig};

const SEED_ENV: &str = "MMISQ_SEED";

#[derive(Parser)]
#[command(
    name = "mmisq",
    version,
    about = "Markov-modulated infinite-server queue lab"
)]
struct Cli {
    /// Worker threads for parallel replications (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print exact chain quantities and limit curves as JSON.
    Analyze(RunArgs),
    /// Monte Carlo ensemble of the centered, scaled queue length.
    Simulate(RunArgs),
    /// Transient MGF curves against the Gaussian limit.
    Mgf(RunArgs),
    /// Sup-norm MGF error over an (alpha, N) sweep with a log-log rate fit.
    Converge(RunArgs),
    /// The two-state example sweep; `--config` replaces the built-in setup.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CurvePoint {
    t: f64,
    rho: f64,
    variance: f64,
}

#[derive(Serialize)]
struct RegimeSummary {
    alpha: f64,
    regime: &'static str,
    beta: f64,
    curve: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct Analysis {
    #[serde(flatten)]
    chain: AnalysisSummary,
    regimes: Vec<RegimeSummary>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` means the run finished but a check failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Analyze(args) => {
            let cfg = load(&args.config)?;
            let analysis = analyze(&cfg)?;
            print_stdout(&serde_json::to_string_pretty(&analysis)?)?;
            if let Some(dir) = output_dir(&cfg, args.out.as_deref()) {
                std::fs::create_dir_all(&dir)?;
                write_json(&dir.join("config.json"), &cfg.resolved())?;
                write_json(&dir.join("analysis.json"), &analysis)?;
            }
            Ok(true)
        }
        Command::Simulate(args) => {
            let cfg = load(&args.config)?;
            let dir = require_output(&cfg, args.out.as_deref())?;
            let (_, report) = run_simulation(&cfg, &dir)?;
            Ok(finish(&report))
        }
        Command::Mgf(args) => {
            let cfg = load(&args.config)?;
            let dir = require_output(&cfg, args.out.as_deref())?;
            let (_, report) = run_mgf(&cfg, &dir)?;
            Ok(finish(&report))
        }
        Command::Converge(args) => {
            let cfg = load(&args.config)?;
            let dir = require_output(&cfg, args.out.as_deref())?;
            let outcome = reproduce_example(&cfg, &dir)?;
            Ok(finish(&outcome.report))
        }
        Command::Reproduce(args) => {
            let cfg = match &args.config {
                Some(path) => load(path)?,
                None => with_env_seed(RunConfig::example())?,
            };
            let dir = require_output(&cfg, args.out.as_deref())?;
            let outcome = reproduce_example(&cfg, &dir)?;
            Ok(finish(&outcome.report))
        }
    }
}

/// Prints a line, treating a closed pipe (`mmisq analyze | head`) as success.
fn print_stdout(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let cfg = RunConfig::load(path)?;
    cfg.validate()?;
    with_env_seed(cfg)
}

fn with_env_seed(cfg: RunConfig) -> anyhow::Result<RunConfig> {
    match std::env::var(SEED_ENV) {
        Ok(v) => {
            let seed = v
                .trim()
                .parse::<u64>()
                .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer"))?;
            Ok(cfg.with_seed(seed))
        }
        Err(_) => Ok(cfg),
    }
}

fn output_dir(cfg: &RunConfig, flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

fn require_output(cfg: &RunConfig, flag: Option<&Path>) -> anyhow::Result<PathBuf> {
    output_dir(cfg, flag).context("no output directory: pass --out or set `output` in the config")
}

fn finish(report: &Report) -> bool {
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("[{tag}] {}: {}", c.name, c.detail);
    }
    report.passed
}

fn analyze(cfg: &RunConfig) -> anyhow::Result<Analysis> {
    let model = cfg.model_spec()?;
    let grid = cfg.simulation_grid()?;
    let alphas = if cfg.scaling.alpha.is_some() || cfg.scaling.alpha_list.is_some() {
        cfg.alphas()?
    } else {
        Vec::new()
    };
    let mut regimes = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let regime = classify(alpha)?;
        let curve = grid
            .times()
            .iter()
            .map(|&t| {
                Ok(CurvePoint {
                    t,
                    rho: fluid_limit(&model, t),
                    variance: u_limit_variance(&model, alpha, t)?,
                })
            })
            .collect::<mmisq_core::Result<_>>()?;
        regimes.push(RegimeSummary {
            alpha,
            regime: match regime.kind {
                RegimeKind::Sub => "sub",
                RegimeKind::Critical => "critical",
                RegimeKind::Super => "super",
            },
            beta: regime.beta,
            curve,
        });
    }
    Ok(Analysis {
        chain: AnalysisSummary::new(&model),
        regimes,
    })
}
