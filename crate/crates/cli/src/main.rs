use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stirap_oct_cli::{execute, output_dir, CliError, ExperimentConfig, Kind};

#[derive(Parser)]
#[command(
    name = "stirap-oct",
    version,
    about = "STIRAP and Krotov population-transfer experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(Common),
    /// Run a calibration grid search (config kind must be `calibrate`).
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory (default: config `output`, else out/<config stem>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the noise seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps and calibration grids.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(command: Command) -> Result<PathBuf, CliError> {
    let (opts, calibrate_only) = match command {
        Command::Run(c) => (c, false),
        Command::Calibrate(c) => (c, true),
    };
    let cfg = ExperimentConfig::load(&opts.config)?;
    if calibrate_only && cfg.kind != Kind::Calibrate {
        return Err(CliError::Config(format!(
            "`calibrate` needs kind = \"calibrate\", found \"{}\"",
            cfg.kind.as_str()
        )));
    }
    if let Some(n) = opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let dir = output_dir(&opts.config, &cfg, opts.out.as_deref());
    execute(&cfg, opts.seed, &dir)?;
    Ok(dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(dir) => {
            println!("artifacts written to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
