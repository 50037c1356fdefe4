//! Command-line front end: reads CSV/JSON inputs, runs the analyses in
//! `paradox-core`, and renders text or JSON reports.

pub mod input;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};
use paradox_core::contingency::ContingencyError;
use paradox_core::prospect::ProspectError;
use paradox_core::quantum_belief::BeliefError;
use paradox_core::stpetersburg::StPetersburgError;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use input::parse_stratified_csv;
pub use report::Report;

pub const DEFAULT_PRECISION: u8 = 12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Arity(String),
    #[error("{path}: invalid JSON: {message}")]
    Json { path: String, message: String },
    #[error("precision must be in [1, 15], got {0}")]
    Precision(u8),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Contingency(#[from] ContingencyError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Prospect(#[from] ProspectError),
    #[error(transparent)]
    StPetersburg(#[from] StPetersburgError),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Simpson reversal check, significance tests and back-door adjustment
    /// on a stratified count CSV.
    Reversal {
        #[arg(long)]
        input: PathBuf,
        /// Apply Yates' continuity correction to the chi-squared test.
        #[arg(long)]
        yates: bool,
        /// One-sided Fisher test (first arm's success rate greater).
        #[arg(long)]
        one_sided: bool,
    },
    /// Joint table, belief state, staged tree and order metrics from a
    /// two-stage fraction grid.
    Belief {
        #[arg(long)]
        input: PathBuf,
    },
    /// Disjunction-effect report with optional unrevealed-play trajectory.
    Disjunction {
        #[arg(long)]
        input: PathBuf,
        /// Rotation per unrevealed round, in radians toward |loss>.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        rounds: Option<u32>,
        /// Exit with status 2 when the effect calibration is infeasible.
        #[arg(long)]
        strict: bool,
    },
    /// Truncated, bankroll-capped and log-utility valuations.
    Stpetersburg {
        #[arg(long)]
        input: PathBuf,
        /// A truncated game with no heads pays its final amount instead of 0.
        #[arg(long)]
        pay_final: bool,
    },
}

impl Command {
    pub fn input(&self) -> &Path {
        match self {
            Command::Reversal { input, .. }
            | Command::Belief { input }
            | Command::Disjunction { input, .. }
            | Command::Stpetersburg { input, .. } => input,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "paradox",
    version,
    about = "Probability reversal and disjunction-effect analysis"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Significant digits for reported real numbers.
    #[arg(long, default_value_t = DEFAULT_PRECISION, global = true)]
    pub precision: u8,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=15).contains(&self.precision) {
            return Err(CliError::Precision(self.precision));
        }
        let path = self.command.input();
        if !path.is_file() {
            return Err(CliError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
            ));
        }
        Ok(())
    }
}

/// Process exit status of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    InputError,
    InfeasibleCalibration,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::InputError => 1,
            ExitStatus::InfeasibleCalibration => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub status: ExitStatus,
    pub report: Report,
}

impl RunOutput {
    pub fn render(&self, format: Format) -> String {
        self.report.render(format)
    }
}

/// Runs one subcommand. Input problems are `Err`; an infeasible calibration
/// under `--strict` still produces its report with a nonzero status.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let precision = config.precision;
    let report = match &config.command {
        Command::Reversal {
            input,
            yates,
            one_sided,
        } => report::reversal(&parse_stratified_csv(input)?, *yates, *one_sided, precision),
        Command::Belief { input } => report::belief(&input::read_json(input)?, precision)?,
        Command::Disjunction {
            input,
            theta,
            rounds,
            ..
        } => report::disjunction(&input::read_json(input)?, *theta, *rounds, precision)?,
        Command::Stpetersburg { input, pay_final } => {
            report::stpetersburg(&input::read_json(input)?, *pay_final, precision)?
        }
    };
    let strict = matches!(config.command, Command::Disjunction { strict: true, .. });
    let status = if strict && report.is_infeasible() {
        ExitStatus::InfeasibleCalibration
    } else {
        ExitStatus::Success
    };
    Ok(RunOutput { status, report })
}
