//! `tontine`: reproduce the payout, loading and certainty-equivalent tables,
//! emit fan and depletion data, and run scenario files.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tontine_core::TontineError;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "tontine", version, about = "Optimal tontine payout design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal payout rate (percent) by risk aversion and attained age.
    PayoutTable(PayoutTableArgs),
    /// Indifference annuity loading (basis points) by risk aversion and pool size.
    LoadingTable(LoadingTableArgs),
    /// Natural vs optimal tontine certainty-equivalent ratio by issue age.
    CeTable(CeTableArgs),
    /// Percentile fan of the dividend received by a surviving member.
    Fan(FanArgs),
    /// Share of initial capital paid out by each date.
    Depletion(DepletionArgs),
    /// Utility comparison of annuity and tontines.
    Welfare(WelfareArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
    /// Execute a scenario file.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Table1,
    Table2,
    Table3,
    Figure1,
}

#[derive(Debug, Clone, Args)]
struct BasisArgs {
    /// Parameter set to start from; the flags below override it.
    #[arg(long, value_enum)]
    basis: Option<Preset>,
    /// Issue age x.
    #[arg(long)]
    age: Option<f64>,
    /// Continuously compounded interest rate.
    #[arg(long)]
    r: Option<f64>,
    /// Gompertz modal age.
    #[arg(long)]
    m: Option<f64>,
    /// Gompertz dispersion.
    #[arg(long)]
    b: Option<f64>,
    /// Stop payments at this age.
    #[arg(long)]
    cap_age: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; relative paths resolve against TONTINE_OUT_DIR when set.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct PayoutTableArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, default_value_t = 25)]
    n: u64,
    #[arg(long, num_args = 1.., default_values_t = [0.5, 1.0, 1.5, 2.0, 4.0, 9.0])]
    gamma: Vec<f64>,
    /// Attained ages.
    #[arg(long, num_args = 1.., default_values_t = [65.0, 80.0, 95.0])]
    ages: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct LoadingTableArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, num_args = 1.., default_values_t = [20, 100, 500, 1000, 5000])]
    n: Vec<u64>,
    #[arg(long, num_args = 1.., default_values_t = [0.5, 1.0, 1.5, 2.0, 3.0, 9.0])]
    gamma: Vec<f64>,
    /// Add the (1/n)(c0/r - 1) bound next to every cell.
    #[arg(long)]
    report_bound: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Valuation {
    /// Continuous payments.
    Continuous,
    /// Annual payments in advance over a fixed number of dates.
    Annual,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CeTableArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long, num_args = 1.., default_values_t = [0.5, 1.0, 2.0])]
    gamma: Vec<f64>,
    /// Issue ages (rows).
    #[arg(long, num_args = 1..)]
    ages: Option<Vec<f64>>,
    /// Default: annual for the printed table, continuous with --cap-age.
    #[arg(long, value_enum)]
    valuation: Option<Valuation>,
    /// Payment dates for annual valuation; default 81 below age 65 and 51 from 65 on.
    #[arg(long)]
    annual_terms: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveChoice {
    Flat,
    Natural,
    Optimal,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FanArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, default_value_t = 400)]
    n: u64,
    #[arg(long, value_enum, default_value_t = CurveChoice::Flat)]
    product: CurveChoice,
    /// Risk aversion for the optimal curve.
    #[arg(long)]
    gamma: Option<f64>,
    /// Attained ages; default every year from issue to 100.
    #[arg(long, num_args = 1..)]
    ages: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., default_values_t = [0.1, 0.5, 0.9])]
    levels: Vec<f64>,
    /// Monte Carlo paths to add next to the exact fan.
    #[arg(long, default_value_t = 0)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct DepletionArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long, num_args = 1.., default_values_t = [2.0, 1.0])]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long)]
    until_age: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct WelfareArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long, num_args = 1.., default_values_t = [100])]
    n: Vec<u64>,
    #[arg(long, num_args = 1.., default_values_t = [2.0])]
    gamma: Vec<f64>,
    /// Loading used for the loaded-annuity utility.
    #[arg(long, default_value_t = 0.0)]
    loading: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file (TOML).
    scenario: std::path::PathBuf,
    /// Output directory; defaults to TONTINE_OUT_DIR, then the working directory.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Engine(TontineError),
    Violations(usize),
}

impl From<TontineError> for Failure {
    fn from(e: TontineError) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Violations(_) => 1,
            Failure::Engine(e) => match e {
                TontineError::InvalidParameter { .. } | TontineError::Config { .. } => 2,
                TontineError::Domain(_) => 3,
                TontineError::Accuracy { .. }
                | TontineError::Divergence(_)
                | TontineError::Budget { .. }
                | TontineError::Root(_) => 4,
                TontineError::Io(_) => 1,
            },
        }
    }

    fn record(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Violations(k) => ("invariant", format!("{k} invariant check(s) failed")),
            Failure::Engine(e) => (e.kind(), e.to_string()),
        };
        serde_json::json!({
            "error": kind,
            "message": message,
            "exit_code": self.exit_code(),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let failure = Failure::Usage(e.kind().to_string());
            eprintln!("{}", failure.record());
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.record());
            ExitCode::from(failure.exit_code())
        }
    }
}
