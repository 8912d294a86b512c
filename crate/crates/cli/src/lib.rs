//! Command-line front end: scenario files, grid sweeps and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Overrides, RawConfig, Scenario};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "vrpl",
    version,
    about = "Viewpoint leakage sweeps for proactive VR streaming"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML); every field has a default.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid override `name=spec`, e.g. `e=0:1pi:181` or `r_sv=0.5,1.0`; repeatable.
    #[arg(long, global = true)]
    pub grid: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Leakage when the HMD uploads its prediction error.
    SweepError,
    /// QoE and overlap case over r_sv × e.
    SweepQoe,
    /// Leakage when the HMD uploads QoE.
    SweepLeakage,
    /// Trace pipeline: load or generate, predict, aggregate.
    Trace,
    /// Capability and SFoV radius from the resource budget.
    Resource,
    /// Check the scenario without producing output.
    Validate,
}

/// Caps the global rayon pool from `VRPL_THREADS`.
fn apply_thread_cap() -> Result<(), CliError> {
    let Ok(v) = std::env::var("VRPL_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::config(format!("VRPL_THREADS: `{v}` is not a positive integer"))
    })?;
    #[cfg(feature = "parallel")]
    {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Text for the terminal once a command succeeds.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: Vec<String>,
    pub stderr: Vec<String>,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    apply_thread_cap()?;
    let raw = match &cli.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    let ov = Overrides {
        out: cli.out.clone(),
        format: cli.format,
        seed: cli.seed,
        grids: cli.grid.clone(),
    };
    let s = Scenario::resolve(raw, &ov)?;
    let report = match cli.command {
        Command::SweepError => commands::sweep_error(&s)?,
        Command::SweepQoe => commands::sweep_qoe(&s)?,
        Command::SweepLeakage => commands::sweep_leakage(&s)?,
        Command::Trace => commands::trace_pipeline(&s)?,
        Command::Resource => commands::resource_report(&s)?,
        Command::Validate => {
            return Ok(Outcome {
                stdout: commands::validate(&s)?,
                stderr: Vec::new(),
            })
        }
    };
    let written = output::emit(&report, s.out_dir.as_deref(), s.format)?;
    Ok(Outcome {
        stdout: Vec::new(),
        stderr: written
            .iter()
            .map(|p| format!("wrote {}", p.display()))
            .collect(),
    })
}

/// Parses `args`, runs the command and maps failures to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            for l in out.stdout {
                println!("{l}");
            }
            for l in out.stderr {
                eprintln!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("vrpl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
