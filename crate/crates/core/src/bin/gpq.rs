use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpq::config::{cmd_solve, cmd_sweep, cmd_validate, Experiment, RunOverrides};

/// Ground states of (p,q)-Laplacian systems with potential wells on graphs.
#[derive(Parser)]
#[command(name = "gpq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check graph, wells, exponents and nonlinearity assumptions.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compute the ground state at one lambda.
    Solve(RunArgs),
    /// Sweep lambda and compare against the limit problem.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the lambda of the experiment file (solve only).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the experiment's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
}

impl RunArgs {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            lambda: self.lambda,
            seed: self.seed,
            out: self.out.clone(),
            force: self.force,
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("GPQ_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        // a pool may already exist when embedded; the default is fine then
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> gpq::Result<bool> {
    match cli.command {
        Command::Validate { config } => {
            let report = cmd_validate(&Experiment::load(&config)?)?;
            print!("{}", report.render());
            Ok(report.passed)
        }
        Command::Solve(args) => {
            let (gs, dir) = cmd_solve(&Experiment::load(&args.config)?, &args.overrides())?;
            println!(
                "m_lambda = {:.12e} (certified: {}), written to {}",
                gs.energy,
                gs.certified,
                dir.display()
            );
            Ok(gs.certified)
        }
        Command::Sweep(args) => {
            let (sr, report, dir) = cmd_sweep(&Experiment::load(&args.config)?, &args.overrides())?;
            println!("m_Omega = {:.12e}", sr.m_omega);
            for r in &sr.rows {
                println!(
                    "lambda {:>10.3e}  m_lambda {:.12e}  gap {:.3e}{}",
                    r.lambda,
                    r.m_lambda,
                    r.gap,
                    if r.failed { "  (failed)" } else { "" }
                );
            }
            for m in &report.metrics {
                println!("{}: {}", m.name, if m.passed { "PASS" } else { "FAIL" });
            }
            println!("written to {}", dir.display());
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
