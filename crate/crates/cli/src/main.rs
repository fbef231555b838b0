//! `lse` — run level-set-estimation experiments, parameter sweeps, and
//! stopping-bound verification from TOML configs.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{FileConfig, CONFIG_REFERENCE};
use lse_core::runner::{run_suite, run_sweep, ExperimentConfig, SweepAxis};

#[derive(Parser)]
#[command(
    name = "lse",
    about = "Level set estimation with GP surrogates and a provably valid stopping criterion",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a multi-seed experiment suite and write traces plus a summary table.
    Run(RunArgs),
    /// Run with Monte-Carlo verification of the stopping bound each cadence;
    /// fails if any estimate undershoots the bound beyond Monte-Carlo error.
    Verify(VerifyArgs),
    /// Run one suite per value of a swept configuration axis.
    Sweep(SweepArgs),
    /// Print the config-file key reference.
    ConfigReference,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $LSE_OUT_ROOT or ./lse-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write into a timestamped subdirectory of the output directory.
    #[arg(long)]
    timestamp_dir: bool,
    /// Override run.base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override run.budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Worker threads for the runs of a suite.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Test hook: shift the recorded bound before the soundness check.
    #[arg(long, default_value_t = 0.0, hide = true)]
    inject_bound_offset: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Swept axis: l, theta, grid_resolution, epsilon_fixed, or noise_std.
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values, e.g. --values 1,2,3,4,5.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::ConfigReference => {
            print_config_reference();
            Ok(ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Config problems exit with 2 and name the offending key; runtime failures
/// exit with 1.
fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, ExitCode> {
    let load = || -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(&args.config)
            .with_context(|| format!("read config {}", args.config.display()))?;
        let mut config = FileConfig::parse(&text)?.resolve()?;
        if let Some(seed) = args.seed {
            config.base_seed = seed;
        }
        if let Some(budget) = args.budget {
            config.budget = budget;
            config.validate()?;
        }
        Ok(config)
    };
    load().map_err(|err| {
        eprintln!("invalid config: {err:#}");
        ExitCode::from(2)
    })
}

fn out_dir(args: &CommonArgs) -> Result<PathBuf> {
    let root = args
        .out
        .clone()
        .or_else(|| std::env::var_os("LSE_OUT_ROOT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lse-out"));
    let dir = if args.timestamp_dir {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .context("system clock before epoch")?;
        root.join(format!("run-{}", now.as_secs()))
    } else {
        root
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("create {}", dir.display()))?;
    Ok(dir)
}

fn report_failures(outcome: &lse_core::runner::SuiteOutcome) -> bool {
    for (seed, msg) in &outcome.failures {
        eprintln!("run with seed {seed} failed: {msg}");
    }
    outcome.failures.is_empty()
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let config = match load_config(&args.common) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let dir = out_dir(&args.common)?;
    let outcome = run_suite(&config, args.common.jobs);
    let traces = output::write_traces(&dir, &outcome)?;
    output::summarize_and_write(&dir, &config, &outcome)?;
    for p in &traces {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", dir.join("summary.csv").display());
    Ok(if report_failures(&outcome) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let config = match load_config(&args.common) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    if config.verify.cadence == 0 {
        eprintln!("invalid config: verify.cadence: must be at least 1 for the verify command");
        return Ok(ExitCode::from(2));
    }
    let dir = out_dir(&args.common)?;
    let outcome = run_suite(&config, args.common.jobs);
    let mut sound = true;
    for trace in &outcome.traces {
        let path = dir.join(format!("verify_seed{}.csv", trace.seed));
        output::write_verify_table(&path, &config, trace)?;
        println!("wrote {}", path.display());
        println!("seed {}: bound,estimate", trace.seed);
        for r in &trace.records {
            if let Some(v) = r.verify {
                let bound = r.stopping.proposed_bound + args.inject_bound_offset;
                println!("{},{}", bound, v.estimate);
                if v.estimate < bound - 3.0 * v.stderr {
                    eprintln!(
                        "bound violated at seed {} iteration {}: estimate {} < bound {} - 3*stderr {}",
                        trace.seed, r.iteration, v.estimate, bound, v.stderr
                    );
                    sound = false;
                }
            }
        }
    }
    let ok = report_failures(&outcome) && sound;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_axis(name: &str) -> Result<SweepAxis> {
    Ok(match name {
        "l" => SweepAxis::L,
        "theta" => SweepAxis::Theta,
        "grid_resolution" => SweepAxis::GridResolution,
        "epsilon_fixed" => SweepAxis::EpsilonFixed,
        "noise_std" => SweepAxis::NoiseStd,
        other => bail!(
            "unknown sweep axis {other:?} (expected l, theta, grid_resolution, epsilon_fixed, \
             or noise_std)"
        ),
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let config = match load_config(&args.common) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let invalid = |msg: String| {
        eprintln!("invalid config: {msg}");
        Ok(ExitCode::from(2))
    };
    let axis = match parse_axis(&args.axis) {
        Ok(a) => a,
        Err(e) => return invalid(e.to_string()),
    };
    if args.values.is_empty() {
        return invalid("sweep.values: value list must not be empty".into());
    }
    let dir = out_dir(&args.common)?;
    let sweeps = match run_sweep(&config, axis, &args.values, args.common.jobs) {
        Ok(s) => s,
        Err(e) => return invalid(e.to_string()),
    };
    let mut all_ok = true;
    for (value, outcome) in &sweeps {
        let sub = dir.join(format!("{}_{}", args.axis, value));
        std::fs::create_dir_all(&sub).with_context(|| format!("create {}", sub.display()))?;
        output::write_traces(&sub, outcome)?;
        let swept = axis.apply(&config, *value)?;
        output::summarize_and_write(&sub, &swept, outcome)?;
        println!("wrote {}", sub.join("summary.csv").display());
        all_ok &= report_failures(outcome);
    }
    let stop_path = dir.join("stop_times.csv");
    output::write_stop_times(&stop_path, &args.axis, &config, &sweeps)?;
    println!("wrote {}", stop_path.display());
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn print_config_reference() {
    println!("config file keys (TOML):");
    let width = CONFIG_REFERENCE.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut section = "";
    for (key, doc) in CONFIG_REFERENCE {
        let head = key.split('.').next().unwrap_or("");
        if head != section {
            section = head;
            println!();
        }
        println!("  {key:width$}  {doc}");
    }
}
