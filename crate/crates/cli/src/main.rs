//! `weibayes` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input, 3 elicitation constraint violated
//! or no finite MLE, 4 numerical non-convergence.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use weibayes::mle::{self, CalibrationCache};
use weibayes::posterior;
use weibayes::prior::{hyper_a, ln_igg_pdf};
use weibayes::simulation::{self, CsvOptions, ExperimentConfig, ReproduceOptions, Table, TableId};
use weibayes::{CensoredSample, Error, PriorSpec, QuadratureSettings};

#[derive(Parser)]
#[command(name = "weibayes", version, about = "Bayes and ML estimation for the Weibull reliable life and shape")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior means of x_R and beta for a sample and a prior.
    Estimate {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        prior: PathBuf,
        /// Relative tolerance of the adaptive quadrature.
        #[arg(long, default_value_t = QuadratureSettings::default().rel_tol)]
        rel_tol: f64,
    },
    /// Maximum likelihood estimates.
    Mle {
        #[arg(long)]
        sample: PathBuf,
        /// Reliability level R defining x_R.
        #[arg(long = "reliability", short = 'R', default_value_t = 0.98)]
        reliability: f64,
    },
    /// Inverted generalized gamma prior density on a grid, as CSV.
    PriorPdf(PriorPdfArgs),
    /// Run a Monte Carlo experiment from a config file or a built-in table.
    Simulate(SimulateArgs),
    /// Calibrate the shape-MLE unbiasing factor B_{n,r}.
    CalibrateB(CalibrateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Spacing {
    Log,
    Linear,
}

#[derive(Args)]
struct PriorPdfArgs {
    /// Scale hyperparameter a.
    #[arg(long, conflicts_with = "xbar_r")]
    a: Option<f64>,
    /// Anticipated reliable life; a is derived from it.
    #[arg(long = "xbar-r")]
    xbar_r: Option<f64>,
    /// Weight hyperparameter; repeat for several curves.
    #[arg(long, num_args = 1..)]
    w: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// a = 1, beta = 1 and w = 1.1, 1.4, ..., 3.1.
    #[arg(long, conflicts_with_all = ["a", "xbar_r", "w"])]
    fig1: bool,
    #[arg(long, default_value_t = 0.01)]
    grid_min: f64,
    #[arg(long, default_value_t = 1e4)]
    grid_max: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    spacing: Spacing,
    /// Explicit comma-separated grid, overriding the generated one.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    config: Option<PathBuf>,
    /// Built-in table: 3..8 (Bayes) or 3b..8b (MLE).
    #[arg(long)]
    table: Option<String>,
    /// Required with --table; overrides the config's value otherwise.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Replications per B_{n,r} calibration for MLE tables.
    #[arg(long, default_value_t = 100_000)]
    b_replications: usize,
    /// CSV file caching B_{n,r} calibrations.
    #[arg(long)]
    b_cache: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Two-digit scientific notation, e.g. .38E+00.
    #[arg(long)]
    paper_format: bool,
    /// Bias, DS and RQ for every cell and estimator.
    #[arg(long)]
    detailed: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    n: usize,
    r: usize,
    #[arg(value_name = "REPLICATIONS")]
    replications_pos: Option<usize>,
    #[arg(value_name = "SEED")]
    seed_pos: Option<u64>,
    #[arg(long, conflicts_with = "replications_pos")]
    replications: Option<usize>,
    #[arg(long, conflicts_with = "seed_pos")]
    seed: Option<u64>,
    /// Calibration cache to read from and append to.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ElicitationConstraint { .. } | Error::NoFiniteMle(_) | Error::SingularDensity { .. } => 3,
        Error::NonConvergence(_) => 4,
        _ => 2,
    }
}

fn readable(path: &Path) -> weibayes::Result<()> {
    File::open(path).map(drop).map_err(|e| {
        Error::invalid(format!("cannot read {}: {e}", path.display()))
    })
}

fn writable_target(path: &Path) -> weibayes::Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(Error::invalid(format!("output directory {} does not exist", dir.display()))),
        _ => Ok(()),
    }
}

fn output(path: &Option<PathBuf>) -> weibayes::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Outcome of a subcommand that ran to completion; non-convergence still
/// prints its record.
enum Done {
    Ok,
    NotConverged,
}

fn estimate(sample: &Path, prior: &Path, rel_tol: f64) -> weibayes::Result<Done> {
    readable(sample)?;
    readable(prior)?;
    let sample = CensoredSample::from_csv_path(sample)?;
    let spec = PriorSpec::from_json_path(prior)?;
    let settings = QuadratureSettings {
        rel_tol,
        ..QuadratureSettings::default()
    };
    settings.validate()?;
    if let Some(w) = spec.weight_warning(sample.r()) {
        eprintln!("warning: {w}");
    }
    let est = posterior::estimate(&spec, &sample, &settings)?;
    let record = json!({
        "x_R_tilde": est.x_r_tilde,
        "beta_tilde": est.beta_tilde,
        "ln_I0": est.log_i[0],
        "ln_I1": est.log_i[1],
        "ln_I2": est.log_i[2],
        "nodes": est.node_count,
        "converged": est.converged,
    });
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(if est.converged { Done::Ok } else { Done::NotConverged })
}

fn fit_mle(sample: &Path, reliability: f64) -> weibayes::Result<Done> {
    readable(sample)?;
    let sample = CensoredSample::from_csv_path(sample)?;
    let m = mle::fit(&sample, reliability)?;
    let record = json!({
        "alpha_hat": m.alpha_hat,
        "beta_hat": m.beta_hat,
        "x_R_hat": m.x_r_hat,
        "R": reliability,
        "iterations": m.iterations,
        "converged": m.converged,
    });
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(if m.converged { Done::Ok } else { Done::NotConverged })
}

fn prior_grid(args: &PriorPdfArgs) -> weibayes::Result<Vec<f64>> {
    if !args.grid.is_empty() {
        if let Some(x) = args.grid.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(format!("grid points must be finite and > 0, got {x}")));
        }
        return Ok(args.grid.clone());
    }
    let (lo, hi, n) = (args.grid_min, args.grid_max, args.points);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::invalid(format!(
            "need 0 < grid-min < grid-max and at least 2 points, got [{lo}, {hi}] with {n}"
        )));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    let mut grid: Vec<f64> = match args.spacing {
        Spacing::Log => (0..n).map(|i| (lo.ln() + step(i) * (hi / lo).ln()).exp()).collect(),
        Spacing::Linear => (0..n).map(|i| lo + step(i) * (hi - lo)).collect(),
    };
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

fn prior_pdf(args: &PriorPdfArgs) -> weibayes::Result<Done> {
    if let Some(out) = &args.out {
        writable_target(out)?;
    }
    let (ws, beta) = if args.fig1 {
        ((0..=6).map(|k| (11 + 3 * k) as f64 / 10.0).collect::<Vec<_>>(), 1.0)
    } else {
        (args.w.clone(), args.beta)
    };
    if ws.is_empty() {
        return Err(Error::invalid("give at least one --w (or --fig1)"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be finite and > 0, got {beta}")));
    }
    let grid = prior_grid(args)?;
    let mut curves = Vec::with_capacity(ws.len());
    for &w in &ws {
        if !(w > 1.0 / beta) {
            return Err(Error::ElicitationConstraint {
                beta,
                w,
                inv_beta: 1.0 / beta,
            });
        }
        let a = match (args.fig1, args.a, args.xbar_r) {
            (true, _, _) => 1.0,
            (_, Some(a), _) if a > 0.0 && a.is_finite() => a,
            (_, Some(a), _) => return Err(Error::invalid(format!("a must be finite and > 0, got {a}"))),
            (_, None, Some(x)) => hyper_a(x, w, beta)?,
            (_, None, None) => return Err(Error::invalid("give --a or --xbar-r (or --fig1)")),
        };
        curves.push((w, a));
    }
    let mut out = output(&args.out)?;
    writeln!(out, "w,x_R,density")?;
    for (w, a) in curves {
        for &x in &grid {
            writeln!(out, "{w},{x},{:e}", ln_igg_pdf(x, a.ln(), w, beta).exp())?;
        }
    }
    out.flush()?;
    Ok(Done::Ok)
}

fn simulate(args: &SimulateArgs) -> weibayes::Result<Done> {
    if let Some(out) = &args.out {
        writable_target(out)?;
    }
    if let Some(c) = &args.config {
        readable(c)?;
    }
    let mut cache = match &args.b_cache {
        Some(p) => CalibrationCache::open(p)?,
        None => CalibrationCache::in_memory(),
    };
    let opts = CsvOptions {
        short_scientific: args.paper_format,
        detailed: args.detailed,
    };
    let table = match (&args.config, &args.table) {
        (Some(path), _) => {
            let mut cfg = ExperimentConfig::from_json_path(path)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            if let Some(reps) = args.replications {
                cfg.replications = reps;
            }
            cfg.validate()?;
            Table::Bayes(simulation::run_experiment(&cfg, &QuadratureSettings::default())?)
        }
        (None, Some(id)) => {
            let id: TableId = id.parse()?;
            let seed = args
                .seed
                .ok_or_else(|| Error::invalid("--seed is required with --table"))?;
            let reps = args.replications.unwrap_or(2000);
            if reps == 0 {
                return Err(Error::invalid("replications must be >= 1"));
            }
            let ro = ReproduceOptions {
                b_replications: args.b_replications,
                ..ReproduceOptions::new(reps, seed)
            };
            simulation::reproduce_table(id, &ro, &mut cache)?
        }
        (None, None) => unreachable!("clap requires one of --config and --table"),
    };
    let mut out = output(&args.out)?;
    table.write_csv(&mut out, opts)?;
    out.flush()?;
    let failures: usize = table.all_metrics().iter().map(|m| m.failures).max().unwrap_or(0);
    if failures > 0 {
        eprintln!("warning: up to {failures} replications per cell did not converge and were excluded");
    }
    Ok(Done::Ok)
}

fn calibrate(args: &CalibrateArgs) -> weibayes::Result<Done> {
    let reps = args.replications_pos.or(args.replications).unwrap_or(100_000);
    let seed = args
        .seed_pos
        .or(args.seed)
        .ok_or_else(|| Error::invalid("a seed is required (positional or --seed)"))?;
    let entry = match &args.cache {
        Some(p) => {
            writable_target(p)?;
            CalibrationCache::open(p)?.get_or_calibrate(args.n, args.r, reps, seed)?
        }
        None => mle::calibrate_b(args.n, args.r, reps, seed)?,
    };
    println!("n,r,B,replications,std_error,seed");
    println!(
        "{},{},{},{},{},{}",
        entry.n, entry.r, entry.b, entry.replications, entry.std_error, entry.seed
    );
    Ok(Done::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate { sample, prior, rel_tol } => estimate(sample, prior, *rel_tol),
        Command::Mle { sample, reliability } => fit_mle(sample, *reliability),
        Command::PriorPdf(args) => prior_pdf(args),
        Command::Simulate(args) => simulate(args),
        Command::CalibrateB(args) => calibrate(args),
    };
    match result {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::NotConverged) => {
            eprintln!("error: numerical evaluation did not converge");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
