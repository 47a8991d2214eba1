mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

/// Power-distortion bounds, power allocation and path planning for
/// amplify-and-forward Gaussian sensor networks.
#[derive(Debug, Parser)]
#[command(name = "sensorpath", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Scenario JSON file or bundled scenario name.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Seed for randomised commands; overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for output files and the run manifest; stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds at the scenario's powers, seen from one collector position.
    Metrics {
        /// Metric names such as `sr-upper-fixed` or `fr-lower-fixed:highrate`.
        #[arg(long = "spec", value_delimiter = ',')]
        specs: Vec<String>,
        /// Collector position `x,y`; defaults to the scenario start.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        at: Option<Vec<f64>>,
    },
    /// Optimal power allocations under the scenario budget.
    Optimize {
        #[arg(long = "spec", value_delimiter = ',')]
        specs: Vec<String>,
        /// Weighted power budget; defaults to the scenario budget.
        #[arg(long)]
        total: Option<f64>,
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        at: Option<Vec<f64>>,
    },
    /// Mean bounds over random networks with matched and mismatched gains.
    Sweep {
        /// Sensors per network.
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Policy::Both)]
        policy: Policy,
        /// Explicit per-sensor powers; overrides the log grid.
        #[arg(long, value_delimiter = ',')]
        powers: Vec<f64>,
        /// Log grid: lowest decade exponent.
        #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
        lo: i32,
        /// Log grid: highest decade exponent.
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        hi: i32,
        #[arg(long, default_value_t = 2)]
        per_decade: usize,
    },
    /// Greedy collector paths for one or more metrics.
    Plan {
        /// Metrics to plan with; all eight when omitted.
        #[arg(long = "spec", value_delimiter = ',')]
        specs: Vec<String>,
        #[arg(long, default_value_t = 30)]
        steps: usize,
    },
    /// Rate-distortion curves of the source and of the field.
    Rd {
        /// Sensing gains; taken from the scenario when omitted.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        /// Field weights; ones (or the scenario's) when omitted.
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<f64>,
        /// Largest rate in bits.
        #[arg(long, default_value_t = 4.0)]
        rate_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Run the acceptance checks.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        /// Simulated channel noise variance for the Monte Carlo check.
        #[arg(long, hide = true)]
        corrupt_noise_variance: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Uniform,
    Optimized,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(f.code())
        }
    }
}
