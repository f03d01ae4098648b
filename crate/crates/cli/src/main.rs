use clap::{Parser, Subcommand};
use cyclocap_cli::config::{LogBase, OutputFormat};
use cyclocap_cli::error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cyclocap",
    version,
    about = "Capacity of channels with sampled cyclostationary Gaussian noise"
)]
struct Cli {
    /// Scenario configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: scenario [output].dir, then "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_parser = ["csv", "csv+svg"])]
    format: Option<String>,

    /// Logarithm base for reported capacities.
    #[arg(long = "log-base", global = true, value_parser = ["2", "e"])]
    log_base: Option<String>,

    /// Cap on worker threads (also honored from the THREADS variable).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for Monte Carlo commands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print one line per sweep point.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the pulse shape and variance profile over one period.
    Pulse,
    /// Compute the capacity of the configured channel.
    Capacity,
    /// Run the scenario's sweep block.
    Sweep,
    /// Monte Carlo information-density statistics for the scenario.
    Infospec,
    /// Reproduce a pinned reference figure and check its reference values.
    Reproduce {
        /// One of fig3, fig4, fig5, fig6, fig7, fig8.
        #[arg(long)]
        figure: String,
    },
    /// Run the full acceptance suite.
    Acceptance,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads.or_else(|| {
        std::env::var("THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    }) {
        cyclocap::set_worker_threads(n);
    }

    let format = cli.format.as_deref().map(OutputFormat::parse).transpose()?;
    let log_base = cli.log_base.as_deref().map(LogBase::parse).transpose()?;
    let (scenario, ctx) = cyclocap_cli::load_scenario(
        cli.config.as_deref(),
        cli.out,
        format,
        log_base,
        cli.seed,
        cli.verbose,
    )?;

    let need = |name: &str| -> Result<&cyclocap_cli::config::Scenario, CliError> {
        scenario
            .as_ref()
            .ok_or_else(|| CliError::Domain(format!("the {name} command needs --config")))
    };

    match &cli.command {
        Command::Pulse => {
            let paths = cyclocap_cli::run_pulse(need("pulse")?, &ctx)?;
            announce(&paths);
            Ok(true)
        }
        Command::Capacity => {
            let paths = cyclocap_cli::run_capacity(need("capacity")?, &ctx)?;
            announce(&paths);
            Ok(true)
        }
        Command::Sweep => {
            let paths = cyclocap_cli::run_sweep(need("sweep")?, &ctx)?;
            announce(&paths);
            Ok(true)
        }
        Command::Infospec => {
            let paths = cyclocap_cli::run_infospec(need("infospec")?, &ctx)?;
            announce(&paths);
            Ok(true)
        }
        Command::Reproduce { figure } => cyclocap_cli::run_reproduce(figure, &ctx),
        Command::Acceptance => cyclocap_cli::run_acceptance(&ctx),
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("cyclocap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
