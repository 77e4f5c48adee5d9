use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homoclinic::commands::{self, ExitStatus};
use homoclinic::config::RunConfig;

#[derive(Parser)]
#[command(name = "homoclinic", version, about = "Homoclinic solutions of discrete p-Laplacian equations by box-constrained energy minimization")]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    config: PathBuf,
    /// Replace a scalar config field, e.g. `--override solver.tol_pg=1e-9`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve levels 1..=N and certify the results.
    Solve(RunArgs),
    /// Probe the nonlinearity's hypotheses and growth constants.
    Probe(RunArgs),
    /// Compare the analytic gradient with central differences.
    Gradcheck(RunArgs),
}

type Runner = fn(&RunConfig) -> Result<ExitStatus, commands::CommandError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let (args, run): (&RunArgs, Runner) = match &cli.command {
        Command::Solve(a) => (a, commands::cmd_solve),
        Command::Probe(a) => (a, commands::cmd_probe),
        Command::Gradcheck(a) => (a, commands::cmd_gradcheck),
    };
    let status = match RunConfig::load(&args.config, &args.overrides) {
        Err(e) => {
            log::error!("{e}");
            ExitStatus::ConfigError
        }
        Ok(cfg) => match run(&cfg) {
            Ok(s) => {
                log::info!("wrote results to {}", cfg.output_dir.display());
                s
            }
            Err(e) => {
                log::error!("{e}");
                e.exit_status()
            }
        },
    };
    ExitCode::from(status.code() as u8)
}
