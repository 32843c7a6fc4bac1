//! Command-line front end for `dilation-core`.
//!
//! Exit codes: 0 success, 1 assertion or computation failure, 2 input error.

pub mod commands;
pub mod config;
pub mod report;
pub mod tuple_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use dilation_core::Execution;

pub use config::{Format, RunConfig, SEED_ENV};
pub use report::Report;
pub use tuple_file::TupleFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot access {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("refusing to dump {entries} matrix entries (limit {limit}); lower --degree or raise --max-dump-entries")]
    DumpTooLarge { entries: usize, limit: usize },
    #[error(transparent)]
    Core(#[from] dilation_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dilation_core::Error as E;
        match self {
            CliError::Core(E::NotCoInvariant { .. } | E::CharacterizationMismatch(_) | E::Diagonalization(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Pure,
    Symmetric,
    Schaeffer,
    CuntzState,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximal commuting piece of a tuple.
    Piece,
    /// Build a dilation and report its invariants.
    Dilate,
    /// Spherical decomposition and atoms of one tuple, or an equivalence verdict for two.
    Classify,
    /// Run a verification suite.
    Check {
        /// prop6, thm15, thm9, lemma10, chain, corollary5 or all.
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Debug, Parser)]
#[command(name = "dilation-lab", version, about = "Dilations and commuting pieces of operator tuples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Tuple file (JSON); classify accepts it twice.
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Vec<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "schaeffer")]
    pub method: Method,
    /// Fock truncation degree M.
    #[arg(long, global = true, default_value_t = 5)]
    pub degree: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-9)]
    pub rank_tol: f64,
    /// Overridden by the DILATION_LAB_SEED environment variable.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// dilate: also write the dilation matrices as a tuple file.
    #[arg(long, global = true, value_name = "FILE")]
    pub dump: Option<PathBuf>,
    #[arg(long = "max-dump-entries", global = true, default_value_t = config::DEFAULT_DUMP_LIMIT)]
    pub max_dump_entries: usize,
    /// check: number of random cases, overriding each suite's default.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Run batch work on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
}

impl Cli {
    pub fn config(&self, env_seed: Option<String>) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig {
            degree: self.degree,
            tol: self.tol,
            rank_tol: self.rank_tol,
            seed: self.seed,
            format: self.format,
        };
        cfg.apply_env(env_seed)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

/// Runs a parsed command line and returns the report.
pub fn run(cli: &Cli, env_seed: Option<String>) -> Result<Report, CliError> {
    let cfg = cli.config(env_seed)?;
    match &cli.command {
        Command::Piece => commands::piece(&cfg, &cli.input),
        Command::Dilate => commands::dilate(&cfg, &cli.input, cli.method, cli.dump.as_deref(), cli.max_dump_entries),
        Command::Classify => commands::classify(&cfg, &cli.input),
        Command::Check { suite } => commands::check(&cfg, suite, cli.trials, cli.execution()),
    }
}

/// Renders the report in the configured format.
pub fn render(report: &Report) -> String {
    match report.config.format {
        Format::Json => report.to_json(),
        Format::Markdown => report.to_markdown(),
    }
}
