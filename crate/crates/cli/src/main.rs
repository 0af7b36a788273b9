//! `potlab`: runs JSON scenario batches and writes CSV/SVG artifacts.
//!
//! Exit status: 0 when every hard assertion passes, 1 when a scenario fails
//! numerically or an assertion does not hold, 2 for unreadable or invalid
//! configurations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use potlab::scenario::{catalog, list_builtin_scenarios, run_batch, Batch, RunOptions};
use potlab::Error;

#[derive(Parser)]
#[command(name = "potlab", version, about = "Nonlinear potential estimates, computed")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario batch.
    Run {
        /// Batch JSON; `builtin` runs every bundled scenario and
        /// `builtin:<id>` a single one.
        #[arg(long)]
        config: String,
        /// Scenarios run concurrently (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value = "potlab-out")]
        out: PathBuf,
        /// Skip SVG plots.
        #[arg(long)]
        no_svg: bool,
    },
    /// List the bundled scenarios.
    List,
    /// Check a batch without running it.
    Validate {
        #[arg(long)]
        config: String,
    },
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

fn load(config: &str) -> Result<Batch, Failure> {
    let text = if config == "builtin" {
        return apply_seed(catalog::builtin_batch(catalog::BUILTIN_SEED));
    } else if let Some(name) = config.strip_prefix("builtin:") {
        catalog::builtin_config(name)
            .ok_or_else(|| Failure::Config(anyhow::anyhow!("no bundled scenario named {name:?}")))?
            .to_string()
    } else {
        std::fs::read_to_string(Path::new(config))
            .with_context(|| format!("cannot read {config}"))
            .map_err(Failure::Config)?
    };
    let batch = Batch::from_json(&text).map_err(|e| match e {
        Error::Schema { path, message } => {
            Failure::Config(anyhow::anyhow!("{config}: invalid field `{path}`: {message}"))
        }
        other => Failure::Config(anyhow::Error::new(other)),
    })?;
    apply_seed(batch)
}

fn apply_seed(mut batch: Batch) -> Result<Batch, Failure> {
    if let Ok(s) = std::env::var("POTLAB_SEED") {
        batch.seed = s
            .trim()
            .parse()
            .with_context(|| format!("POTLAB_SEED must be an unsigned integer, got {s:?}"))
            .map_err(Failure::Config)?;
    }
    Ok(batch)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::List => {
            for e in list_builtin_scenarios() {
                println!("{:<36} {}", e.id, e.description);
            }
            Ok(())
        }
        Command::Validate { config } => {
            let batch = load(&config)?;
            println!("{config}: {} scenario(s), valid", batch.scenarios.len());
            Ok(())
        }
        Command::Run {
            config,
            jobs,
            out,
            no_svg,
        } => {
            let batch = load(&config)?;
            log::info!(
                "running {} scenario(s) with seed {} into {}",
                batch.scenarios.len(),
                batch.seed,
                out.display()
            );
            let opts = RunOptions {
                out_dir: out.clone(),
                jobs,
                svg: !no_svg,
            };
            let summary = run_batch(&batch, &opts).map_err(|e| Failure::Run(e.into()))?;
            for o in &summary.scenarios {
                let status = if o.passed { "pass" } else { "FAIL" };
                println!("{status} {} ({})", o.id, o.task);
                if let Some(err) = &o.error {
                    eprintln!("error: scenario {}: {err}", o.id);
                }
                for a in o.assertions.iter().filter(|a| !a.passed) {
                    eprintln!("error: scenario {}: assertion {} failed: {}", o.id, a.name, a.detail);
                }
            }
            println!("summary written to {}", out.join("summary.json").display());
            if summary.passed {
                Ok(())
            } else {
                Err(Failure::Run(anyhow::anyhow!("one or more scenarios failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
