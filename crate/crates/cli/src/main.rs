use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use spinnoise_cli::commands::{self, Common};

#[derive(Parser, Debug)]
#[command(name = "spinnoise", version, about = "Spin-noise measurement chain simulator")]
struct Cli {
    /// Worker threads for trajectory sampling (outputs do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,

    /// Overrides the seed in the run file.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory; defaults to `output_dir` from the run file.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn common(&self, postselect_m1: Option<i64>) -> Common {
        Common {
            seed: self.seed,
            out: self.out.clone(),
            postselect_m1,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample trajectories and their per-step histograms.
    Sample {
        #[command(flatten)]
        run: RunArgs,
        /// Fix the first outcome (doubled magnetization) instead of drawing it.
        #[arg(long, allow_hyphen_values = true)]
        postselect_m1: Option<i64>,
    },
    /// Exact distributions, joint laws and covariances.
    Exact {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "1")]
        lags: String,
        /// Also write P(M; t2 | m1) for this doubled first outcome.
        #[arg(long, allow_hyphen_values = true)]
        postselect_m1: Option<i64>,
    },
    /// Covariance function by every available route.
    Covariance {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "1,2,4,8")]
        lags: String,
    },
    /// Compare the sector chain against the dense density-matrix simulator.
    OracleCheck {
        #[command(flatten)]
        run: RunArgs,
        /// Measurement rounds; defaults to min(steps, 3).
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, hide = true)]
        corrupt_kernel: bool,
    },
    /// Check the measurement kernel against the POVM constraints.
    ValidateKernel {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Largest N for which spin noise exceeds the steady-state polarization signal.
    BreakEven {
        /// Nutation angle in radians, in (0, pi/2].
        #[arg(long)]
        angle: f64,
        #[arg(long)]
        polarization: f64,
    },
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    match cli.command {
        Command::Sample { run, postselect_m1 } => {
            let dir = commands::sample(commands::load(&run.config)?, &run.common(postselect_m1))?;
            println!("wrote {}", dir.display());
        }
        Command::Exact {
            run,
            lags,
            postselect_m1,
        } => {
            let lags = commands::parse_lags(&lags)?;
            let dir = commands::exact(
                commands::load(&run.config)?,
                &run.common(postselect_m1),
                &lags,
            )?;
            println!("wrote {}", dir.display());
        }
        Command::Covariance { run, lags } => {
            let lags = commands::parse_lags(&lags)?;
            let dir = commands::covariance(commands::load(&run.config)?, &run.common(None), &lags)?;
            println!("wrote {}", dir.display());
        }
        Command::OracleCheck {
            run,
            rounds,
            tolerance,
            corrupt_kernel,
        } => {
            let (passed, report) = commands::oracle_check(
                commands::load(&run.config)?,
                &run.common(None),
                rounds,
                tolerance,
                corrupt_kernel,
            )?;
            println!(
                "{} max total variation {:e} (tolerance {:e}), max posterior deviation {:e}",
                if passed { "PASS" } else { "FAIL" },
                report.max_total_variation(),
                tolerance,
                report.max_posterior_deviation(),
            );
            return Ok(passed);
        }
        Command::ValidateKernel { run } => {
            let passed = commands::validate_kernel(commands::load(&run.config)?, &run.common(None))?;
            println!("{}", if passed { "PASS" } else { "FAIL" });
            return Ok(passed);
        }
        Command::BreakEven {
            angle,
            polarization,
        } => println!("{}", commands::break_even(angle, polarization)?),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
