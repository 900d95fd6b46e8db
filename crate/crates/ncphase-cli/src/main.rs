mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::Ctx;
use config::ScenarioConfig;
use error::CliError;
use std::path::PathBuf;

type Runner = fn(&Ctx) -> Result<Vec<PathBuf>, CliError>;

#[derive(Parser)]
#[command(
    name = "ncphase",
    version,
    about = "Simulator for planar particle systems with deformed Poisson brackets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write the requested output products.
    Simulate(CommonArgs),
    /// Sample the closed-form free-particle trajectories on the run grid.
    Analytic(CommonArgs),
    /// Verify the center-of-mass bracket table against its predicted values.
    Brackets(CommonArgs),
    /// Report whether the particle set admits common free motion.
    Conditions(CommonArgs),
    /// Emit the pairwise velocity-gap time series for a free system.
    Flyapart(CommonArgs),
    /// Compare the integrator against the closed form at two step sizes.
    Compare(CommonArgs),
    /// Verify the magnetic-field form of the one-particle free Hamiltonian.
    MagneticCheck(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the scenario configuration file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory receiving output files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Tolerance used by verification subcommands.
    #[arg(long, value_name = "REAL", default_value_t = 1e-10)]
    tol: f64,
    /// Seed for randomized checks; overrides the config seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
}

fn make_ctx(args: &CommonArgs) -> Result<Ctx, CliError> {
    if !args.tol.is_finite() || args.tol <= 0.0 {
        return Err(CliError::Config("--tol must be a positive real".into()));
    }
    Ok(Ctx {
        config: ScenarioConfig::load(&args.config)?,
        out: args.out.clone(),
        tol: args.tol,
        seed: args.seed,
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return;
            }
            eprintln!("{}", CliError::Config(err.to_string()).document());
            std::process::exit(1);
        }
    };

    let (args, runner): (&CommonArgs, Runner) = match &cli.command {
        Command::Simulate(a) => (a, commands::simulate),
        Command::Analytic(a) => (a, commands::analytic),
        Command::Brackets(a) => (a, commands::brackets),
        Command::Conditions(a) => (a, commands::conditions),
        Command::Flyapart(a) => (a, commands::flyapart),
        Command::Compare(a) => (a, commands::compare),
        Command::MagneticCheck(a) => (a, commands::magnetic_check),
    };

    match make_ctx(args).and_then(|ctx| runner(&ctx)) {
        Ok(files) => {
            for file in files {
                println!("wrote {}", file.display());
            }
        }
        Err(err) => {
            eprintln!("{}", err.document());
            std::process::exit(err.exit_code());
        }
    }
}
