use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use transpoint::detect::{Mode, Route};
use transpoint_cli::{load_config, run, ExitStatus, Overrides, RunError};

#[derive(Parser)]
#[command(name = "transpoint", version, about = "Detect and count translated points of contact Hamiltonian flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        routes: Option<RoutesArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoutesArg {
    Direct,
    Genfun,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sphere,
    Projective,
}

fn execute(cli: Cli) -> Result<ExitStatus, RunError> {
    let Command::Run {
        config,
        out,
        routes,
        mode,
    } = cli.command;
    let mut cfg = load_config(&config)?;
    let overrides = Overrides {
        out,
        routes: routes.map(|r| match r {
            RoutesArg::Direct => Route::Direct,
            RoutesArg::Genfun => Route::Genfun,
            RoutesArg::Both => Route::Both,
        }),
        mode: mode.map(|m| match m {
            ModeArg::Sphere => Mode::Sphere,
            ModeArg::Projective => Mode::Projective,
        }),
    };
    overrides.apply(&mut cfg)?;
    let report = run(&cfg)?;
    if let Some(s) = &report.sweep {
        println!(
            "{} records, events at t = {:?}, bound: {:?}",
            s.record_count, s.event_ts, s.bound
        );
        if let Some(classes) = &s.classes {
            println!("{} antipodal classes", classes.len());
        }
    }
    println!("report written to {}", cfg.output.dir.join(&cfg.output.report).display());
    Ok(report.exit_status)
}

fn main() -> ExitCode {
    let status = match execute(Cli::parse()) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.status()
        }
    };
    ExitCode::from(status.code() as u8)
}
