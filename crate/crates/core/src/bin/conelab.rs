use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conelab::config::RunConfig;
use conelab::pipeline;
use conelab::verify;

#[derive(Parser)]
#[command(name = "conelab", version, about = "Swift-Hohenberg lab on warped cones and surfaces of revolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Poles, weight window, asymptotics template and decay prediction.
    Analyze(Args),
    /// Time integration with snapshots, monitor trace and manifest.
    Simulate(Args),
    /// Near-tip decay fit of a snapshot file.
    Fit(Args),
    /// Manufactured-solution refinement study.
    Mms(Args),
    /// Run a suite of acceptance criteria.
    Verify(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Run configuration (suite file for `verify`).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted-path override, e.g. `dynamics.dt=5e-4`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load(args: &Args) -> conelab::error::Result<(RunConfig, PathBuf)> {
    let cfg = RunConfig::load(&args.config, &args.overrides)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    Ok((cfg, out))
}

fn run(cli: Cli) -> conelab::error::Result<bool> {
    match cli.command {
        Command::Analyze(a) => {
            let (cfg, out) = load(&a)?;
            let report = pipeline::cmd_analyze(&cfg, &out)?;
            println!("{}", report.summary());
            Ok(true)
        }
        Command::Simulate(a) => {
            let (cfg, out) = load(&a)?;
            let sim = pipeline::cmd_simulate(&cfg, &out)?;
            println!(
                "status={} t={} steps={} snapshots={}",
                match &sim.status {
                    conelab::integrator::RunStatus::HaltGraceful { .. } => "HALT-GRACEFUL",
                    _ => "COMPLETED",
                },
                sim.last().t,
                sim.steps,
                sim.snapshots.len()
            );
            Ok(true)
        }
        Command::Fit(a) => {
            let (cfg, out) = load(&a)?;
            let fit = pipeline::cmd_fit(&cfg, &out)?;
            let r = &fit.report;
            println!(
                "verdict={:?} alpha_dev={} r2={} shells={}",
                r.verdict,
                r.alpha_dev.map_or("none".into(), |v| format!("{v:.4}")),
                r.r2.map_or("none".into(), |v| format!("{v:.5}")),
                r.shells
            );
            Ok(true)
        }
        Command::Mms(a) => {
            let (cfg, out) = load(&a)?;
            let r = pipeline::cmd_mms(&cfg, &out)?;
            let fmt = |o: Option<f64>| o.map_or("none".into(), |v| format!("{v:.3}"));
            println!("spatial_order={} temporal_order={}", fmt(r.spatial_order), fmt(r.temporal_order));
            Ok(true)
        }
        Command::Verify(a) => {
            if !a.overrides.is_empty() {
                log::warn!("overrides are ignored by verify");
            }
            let out = a.out.clone().unwrap_or_else(|| PathBuf::from("out/verify"));
            let results = verify::cmd_verify(&a.config, &out)?;
            for r in &results {
                println!("{}", r.line());
            }
            Ok(results.iter().all(|r| r.pass))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
