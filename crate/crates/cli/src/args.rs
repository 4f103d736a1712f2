use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use comaction::TimePair;

#[derive(Parser, Debug)]
#[command(
    name = "comaction",
    version,
    about = "Check commuting principal actions, Poisson brackets and discrete Lagrangian maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the built-in systems and their parameters
    Catalog {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Principal action between two configurations
    Action {
        #[command(flatten)]
        system: SystemArg,
        /// Initial configuration, comma separated
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        from: Vec<f64>,
        /// Final configuration, comma separated
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        to: Vec<f64>,
        #[arg(long)]
        time: f64,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate the Hamiltonian flow of a system's Legendre transform
    Flow {
        #[command(flatten)]
        system: SystemArg,
        /// Phase point q1,..,qn,p1,..,pn
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x0: Vec<f64>,
        #[arg(long)]
        time: f64,
        /// RK4 steps
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hamilton–Jacobi residuals of the principal action
    HjCheck {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        to: Vec<f64>,
        #[arg(long)]
        time: f64,
        /// Relative central-difference step
        #[arg(long, default_value_t = 1e-4)]
        fd_step: f64,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Composed action S12 or S21 through the intermediate point
    Compose {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        to: Vec<f64>,
        /// One pair t1:t2
        #[arg(long, value_parser = parse_time_pairs, default_value = "1:1")]
        times: TimePairs,
        #[arg(long, value_enum, default_value_t = OrderArg::Twelve)]
        order: OrderArg,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Commutativity report for two continuous Lagrangians
    CheckCommute {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Time pairs t1:t2, comma separated
        #[arg(long, value_parser = parse_time_pairs, default_value = "0.5:0.5,1:1")]
        times: TimePairs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One step of the symplectic map of a discrete Lagrangian
    DiscreteMap {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        q0: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        p0: Vec<f64>,
        /// Newton starting point for the new configuration (default q0)
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        guess: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Commutativity report for two discrete Lagrangians
    CheckCommuteDiscrete {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Error attributed to each composed action
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Poisson bracket of the Legendre transforms of two Lagrangians
    Poisson {
        #[command(flatten)]
        pair: PairArgs,
        /// Phase point q1,..,qn,p1,..,pn
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
pub struct SystemArg {
    /// System spec: a JSON file path or an inline JSON document
    #[arg(long)]
    pub system: String,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// First system spec (file path or inline JSON)
    #[arg(long)]
    pub l1: String,
    /// Second system spec (file path or inline JSON)
    #[arg(long)]
    pub l2: String,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Target Richardson error estimate
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Coarse resolution of the first Richardson pair
    #[arg(long, default_value_t = 32)]
    pub resolution: usize,
    /// Largest resolution tried before giving up
    #[arg(long, default_value_t = comaction::trajectories::MAX_RESOLUTION)]
    pub max_resolution: usize,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Samples per axis
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    /// Configuration samples lie in [-qrange, qrange]
    #[arg(long, default_value_t = 0.5)]
    pub qrange: f64,
    /// Momentum samples of the phase probes lie in [-prange, prange]
    #[arg(long, default_value_t = 1.0)]
    pub prange: f64,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    #[value(name = "12")]
    Twelve,
    #[value(name = "21")]
    TwentyOne,
}

#[derive(Clone, Debug)]
pub struct TimePairs(pub Vec<TimePair>);

fn parse_time_pairs(s: &str) -> Result<TimePairs, String> {
    let pairs = s
        .split(',')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| format!("`{part}` is not of the form t1:t2"))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("`{v}`: {e}"))
                    .and_then(|t| {
                        if t > 0.0 && t.is_finite() {
                            Ok(t)
                        } else {
                            Err(format!("times must be positive, got {t}"))
                        }
                    })
            };
            Ok(TimePair {
                t1: parse(a)?,
                t2: parse(b)?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(TimePairs(pairs))
}
