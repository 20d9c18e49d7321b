use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msk_cli::config::OutputFormat;
use msk_cli::report::{fields_csv, CONFIG_SCHEMA, REPORT_SCHEMA};
use msk_cli::{CheckId, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "msk", version, about = "Verify curvature identities of surfaces in normed spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a configuration and write the verification report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Exit with status 1 when any check fails.
        #[arg(long)]
        strict: bool,
        /// Write the per-point field table to this CSV file.
        #[arg(long)]
        fields: Option<PathBuf>,
        /// Worker threads; MSK_THREADS takes precedence.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the available check IDs.
    ListChecks,
    /// Print the JSON schema of the report (or of the configuration).
    Schema {
        #[arg(long)]
        config: bool,
    },
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("MSK_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("MSK_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn run(config: PathBuf, strict: bool, fields: Option<PathBuf>, flag_threads: Option<usize>) -> Result<ExitCode, CliError> {
    let cfg = RunConfig::from_path(&config)?;
    let output = msk_cli::run(&cfg, threads(flag_threads)?)?;
    let text = match cfg.output.format {
        OutputFormat::Json => output.report.to_json(),
        OutputFormat::Csv => output.report.to_csv()?,
    };
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(path) = fields {
        std::fs::write(path, fields_csv(&output.geometry)?)?;
    }
    for c in &output.report.checks {
        eprintln!(
            "{} {:<32} max residual {:.3e} (tolerance {:.1e}, {} points)",
            if c.pass { "PASS" } else { "FAIL" },
            c.id.name(),
            c.max_residual,
            c.tolerance,
            c.n_points
        );
    }
    Ok(if strict && !output.report.all_passed() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, strict, fields, threads } => run(config, strict, fields, threads),
        Command::ListChecks => {
            for id in CheckId::ALL {
                println!("{:<32} {}", id.name(), id.statement());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Schema { config } => {
            print!("{}", if config { CONFIG_SCHEMA } else { REPORT_SCHEMA });
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("msk: {e}");
        ExitCode::from(e.exit_code() as u8)
    })
}
