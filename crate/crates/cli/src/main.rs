//! `isomono <command> --config <file.json> [--out <dir>] [--seed <u64>] [--ode-tol <float>]`
//!
//! Exit status: 0 all checks pass, 1 a threshold is exceeded, 2 the
//! configuration is invalid, 3 the computation aborted.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Failure;
use config::CommandName;
use report::ErrorBody;

#[derive(Parser, Debug)]
#[command(name = "isomono", version, about = "Isomonodromy audits, Gaudin runs and W-structure checks")]
struct Cli {
    #[arg(value_enum)]
    command: CommandName,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON report and CSV series.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `integrator.ode_tol` in the config.
    #[arg(long)]
    ode_tol: Option<f64>,
}

const EXIT_THRESHOLD: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn variant_name(e: &isomono_core::Error) -> String {
    let debug = format!("{e:?}");
    debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.as_str();
    let mut cfg = match config::parse(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(t) = cli.ode_tol {
        cfg.integrator.ode_tol = t;
    }
    if let Err(e) = cfg.validate(cli.command) {
        eprintln!("config error: {}: {e:#}", cli.config.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    match commands::run(cli.command, &cfg) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!(
                    "{:<4} {:<20} {:.3e} < {:.1e}",
                    if c.pass { "ok" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                );
            }
            match report::write(&cli.out, name, cfg.seed, cfg.integrator.ode_tol, &outcome) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(EXIT_NUMERICAL);
                }
            }
            if outcome.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_THRESHOLD)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {}: {msg}", cli.config.display());
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(e)) => {
            let kind = variant_name(&e);
            let body = ErrorBody {
                kind: &kind,
                message: e.to_string(),
            };
            eprintln!("numerical abort ({kind}): {e}");
            if let Err(w) = report::write_error(&cli.out, name, body) {
                eprintln!("error: {w:#}");
            }
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
