use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use transhop::config::Config;
use transhop::Error;

mod run;
mod selftest;

#[derive(Parser, Debug)]
#[command(name = "transhop", version, about = "Store-and-forward message transmission between opposite driving directions")]
struct Cli {
    /// TOML configuration; defaults apply to every missing key.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(short, long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Check the results against their acceptance bands; exit with 4 on failure.
    #[arg(long, global = true)]
    self_test: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Closed-form characteristic times, CDF curves and the range-model crossover.
    Analytic,
    /// Monte Carlo oracle against the closed forms.
    Oracle,
    /// Traffic and communication simulation against the closed forms.
    Validate,
    /// Bottleneck scenario with jam-front warnings.
    Jam,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_SELF_TEST: u8 = 4;
const EXIT_IO: u8 = 1;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::UnsupportedRangeModel { .. } => EXIT_CONFIG,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_RUNTIME,
    }
}

fn load(cli: &Cli) -> Result<Config, Error> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|config| {
        let checks = match cli.command {
            Command::Analytic => run::analytic(&config),
            Command::Oracle => run::oracle(&config),
            Command::Validate => run::validate(&config),
            Command::Jam => run::jam(&config),
        }?;
        Ok((config, checks))
    });
    match result {
        Ok((config, checks)) => {
            if !cli.self_test {
                return ExitCode::SUCCESS;
            }
            let passed = selftest::report(&checks);
            if let Err(e) = selftest::write(&config.output_dir, &checks) {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SELF_TEST)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
