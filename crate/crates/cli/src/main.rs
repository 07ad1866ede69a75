use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasilocal_cli::report::FailureReport;
use quasilocal_cli::{compute, run_convergence, run_verify, to_json, write_json, CliError, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "quasilocal", version, about = "Spinorial quasilocal energy of planar Riemannian domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the energy for one configuration and write a JSON report.
    Compute {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output`, else standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits with status 4 when a check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Refine the configured resolution `levels` times against the closed form.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: usize,
        /// Also write the table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute { config, out } => {
            let config = RunConfig::load(&config)?;
            let out = out.or_else(|| config.output.clone());
            match compute(&config) {
                Ok(report) => match out {
                    Some(path) => write_json(&path, &report),
                    None => {
                        print!("{}", to_json(&report));
                        Ok(())
                    }
                },
                Err(err) => {
                    if let Some(path) = out {
                        write_json(&path, &FailureReport::new(&err, &config))?;
                    }
                    Err(err)
                }
            }
        }
        Command::Verify { suite, seed } => {
            let checks = run_verify(suite, seed)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            if failed > 0 {
                return Err(CliError::Verification(failed));
            }
            Ok(())
        }
        Command::Convergence { config, levels, out } => {
            let config = RunConfig::load(&config)?;
            let rows = run_convergence(&config, levels)?;
            println!("{:>13} {:>22} {:>12} {:>8}", "resolution", "energy", "|E - oracle|", "order");
            for r in &rows {
                println!("{r}");
            }
            if let Some(path) = out {
                write_json(&path, &rows)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
