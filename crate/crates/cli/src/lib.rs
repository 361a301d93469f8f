//! Command-line front end: `run`, `sweep` and `verify`.

pub mod experiment;
pub mod sweep;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use sellock::verify::{run_suite, Suite};
use sellock::ExperimentConfig;

pub const THREADS_ENV: &str = "SEL_LOCK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sellock", version, about = "Self-locking experiments: training runs, sweeps and acceptance checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train every seed of a config; write per-seed metrics, a summary and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross product of a grid over a base config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite: core, theory, arew or all.
    Verify {
        suite: String,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or config: exit 2.
    Usage(String),
    /// Anything that went wrong after the inputs validated: exit 1.
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

/// Sizes the global worker pool from `SEL_LOCK_THREADS` when set.
pub fn configure_threads() -> Result<usize, Failure> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out } => {
            let threads = configure_threads()?;
            let cfg = load_config(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let manifest = experiment::run(&cfg, &out, threads)?;
            eprintln!(
                "wrote {} seed(s) to {} in {:.1}s",
                manifest.seeds.len(),
                out.display(),
                manifest.total_seconds
            );
            Ok(())
        }
        Command::Sweep { config, grid, out } => {
            let threads = configure_threads()?;
            let cfg = load_config(&config)?;
            let grid = sweep::GridSpec::load(&grid)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let manifest = sweep::run(&cfg, &grid, &out, threads)?;
            eprintln!("wrote {} cell(s) to {}", manifest.cells.len(), out.display());
            Ok(())
        }
        Command::Verify { suite, report } => {
            let suite: Suite = suite.parse().map_err(|e: sellock::Error| Failure::Usage(e.to_string()))?;
            configure_threads()?;
            let result = run_suite(suite, |r| eprintln!("{}", r.line()));
            let text = serde_json::to_string_pretty(&result).map_err(Failure::runtime)?;
            match report {
                Some(path) => std::fs::write(&path, text).map_err(Failure::runtime)?,
                None => println!("{text}"),
            }
            if result.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = result.results.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
                Err(Failure::Runtime(format!("failed criteria: {}", failed.join(", "))))
            }
        }
    }
}
