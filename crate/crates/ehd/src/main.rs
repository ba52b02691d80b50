use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ehd::besov::FieldChoice;
use ehd::config::parse_number;
use ehd::error::{CliError, ErrorCode};
use ehd_core::solver::RunStatus;

#[derive(Parser)]
#[command(
    name = "ehd",
    version,
    about = "Electro-hydrodynamics simulator with regularity-criteria monitoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a configuration file.
    Run { config: PathBuf },
    /// Print the homogeneous Besov norm of a checkpointed field.
    Besov {
        checkpoint: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Lebesgue exponent; `inf` for the maximum.
        #[arg(long, value_parser = parse_number)]
        p: f64,
        /// Summation exponent; `inf` for the supremum over bands.
        #[arg(long, value_parser = parse_number)]
        r: f64,
        /// u, ux, uy, uz, v, w or eta.
        #[arg(long, default_value = "u")]
        field: FieldChoice,
    },
    /// Check a finished run's audit series against the energy contracts.
    Audit { dir: PathBuf },
    /// Summarize a run report and export per-criterion plot data.
    Report { report: PathBuf },
}

fn configure_threads() -> Result<(), CliError> {
    let threads = match std::env::var("EHD_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::new(
                ErrorCode::Usage,
                format!("EHD_THREADS must be a positive integer, got `{v}`"),
            )
        })?,
        Err(_) => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::new(ErrorCode::Usage, e.to_string()))
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => {
            let outcome = ehd::cmd_run(&config)?;
            match &outcome.status {
                RunStatus::Completed => println!("completed; report written to {}", outcome.report_path.display()),
                RunStatus::BlowUpSuspected(reason) => eprintln!("{}", CliError::new(ErrorCode::BlowUp, reason.clone())),
                RunStatus::InvariantViolation(reason) => {
                    eprintln!("{}", CliError::new(ErrorCode::Invariant, reason.clone()))
                }
            }
            Ok(outcome.exit_code())
        }
        Command::Besov {
            checkpoint,
            s,
            p,
            r,
            field,
        } => {
            let out = ehd::cmd_besov(&checkpoint, s, p, r, field)?;
            println!("{:?}", out.norm);
            if p.is_infinite() {
                eprintln!("spectral tail fraction: {:e}", out.tail_fraction);
            }
            Ok(0)
        }
        Command::Audit { dir } => {
            let out = ehd::cmd_audit(&dir)?;
            for line in &out.lines {
                println!("{line}");
            }
            for v in &out.violations {
                eprintln!("{}", CliError::new(ErrorCode::Invariant, v.clone()));
            }
            Ok(out.exit_code())
        }
        Command::Report { report } => {
            let out = ehd::cmd_report(&report)?;
            print!("{}", out.table);
            for f in &out.plot_files {
                println!("plot data: {}", f.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprintln!("{}", CliError::new(ErrorCode::Usage, text.trim_end()));
            return ExitCode::from(ErrorCode::Usage.exit_code());
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code.exit_code())
        }
    }
}
