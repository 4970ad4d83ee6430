use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crystal_ground_cli::commands;
use crystal_ground_cli::config::RunConfig;
use crystal_ground_cli::CliError;

#[derive(Parser)]
#[command(name = "crystal-ground", version, about = "Ground states of a periodic ion-electron crystal model")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print optimizer progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy and write summary.toml and state.json.
    Solve,
    /// Re-verify the residuals of a state.json written by `solve`.
    Check {
        state: PathBuf,
    },
    /// Tabulate G, D and |grad G| along the `[green]` segment.
    Green,
    /// Solve at every point of the `[sweep]` range.
    Sweep,
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    RunConfig::load(path)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Check { state } => commands::check(state),
        cmd => {
            let config = load_config(cli.config.as_ref())?;
            let out = config.out_dir(cli.out.as_deref());
            match cmd {
                Command::Solve => commands::solve(&config, &out, cli.verbose),
                Command::Green => commands::green(&config, &out),
                Command::Sweep => commands::sweep(&config, &out, cli.verbose),
                Command::Check { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
