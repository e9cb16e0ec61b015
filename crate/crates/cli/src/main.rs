use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use density_lab::Exec;
use density_lab_cli::{config, load_config, report, run, Failure, RunOptions};

#[derive(Parser)]
#[command(name = "density-lab", version, about = "Stochastic Navier-Stokes density experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a TOML config (or rerun a manifest.json).
    Run {
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long, env = "DENSITY_LAB_OUTPUT")]
        output: Option<PathBuf>,
        /// Worker threads for the ensemble loops.
        #[arg(long, env = "DENSITY_LAB_THREADS")]
        threads: Option<usize>,
        /// Single-threaded execution.
        #[arg(long)]
        sequential: bool,
        /// Exit 3 when a statistical acceptance check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Summaries and plot CSVs for a run directory.
    Report { dir: PathBuf },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, output, threads, sequential, strict } => {
            if let Some(n) = threads {
                if n == 0 {
                    return Err(Failure::Invalid("thread count must be positive".into()));
                }
                density_lab::exec::set_threads(n)?;
            }
            let cfg = load_config(&config)?;
            let exec = if sequential { Exec::Sequential } else { Exec::Parallel };
            let m = run(&cfg, &RunOptions { output, strict, exec })?;
            println!("{} finished in {:.2} s, config hash {}", m.kind.name(), m.wall_time_s, m.config_hash);
            for v in &m.verdicts {
                println!("  {} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.check, v.detail);
            }
            Ok(())
        }
        Command::Report { dir } => {
            let s = report(&dir)?;
            print!("{}", s.text);
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = config::load(&config)?;
            cfg.validate()?;
            println!("ok: {} config, hash {}", cfg.kind.name(), cfg.hash()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
