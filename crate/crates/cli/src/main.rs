//! Command-line front end: parameter sweeps, weight-factor optimization,
//! scheme comparisons and the quadrature-versus-Monte-Carlo battery.
//!
//! Data goes to stdout as CSV with a unit-annotated header; summary lines
//! start with `#`. Warnings and progress go to stderr.

// Negated comparisons are the NaN-rejecting form of range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relay_fbl::evaluate::{McConfig, Metric, SchemeKind, Variable};
use relay_fbl::scenario::Scenario;
use relay_fbl::Error;

/// Exit status of invalid input.
const EXIT_INVALID: u8 = 2;
/// Exit status of numerical non-convergence.
const EXIT_NONCONVERGENCE: u8 = 3;
/// Exit status when validation checks disagree beyond the allowed deviation.
const EXIT_CHECKS_FAILED: u8 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "relay-fbl",
    version,
    about = "Finite-blocklength analysis of two-hop relaying"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Scenario file with `key = value` lines; flags override its values.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Seed of every Monte Carlo estimate.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Samples per Monte Carlo estimate (accepts forms such as 1e6).
    #[arg(long, global = true, default_value = "1e6", value_parser = parse_count)]
    mc_samples: u64,
    #[command(flatten)]
    fields: ScenarioFlags,
}

/// One flag per scenario key.
#[derive(Args, Debug, Default)]
struct ScenarioFlags {
    /// Source-relay distance, m.
    #[arg(long, global = true, allow_hyphen_values = true)]
    d_backhaul: Option<String>,
    /// Relay-destination distance, m.
    #[arg(long, global = true, allow_hyphen_values = true)]
    d_relaying: Option<String>,
    /// Source-destination distance, m.
    #[arg(long, global = true, allow_hyphen_values = true)]
    d_direct: Option<String>,
    /// Transmit power, dBm.
    #[arg(long, global = true, allow_hyphen_values = true)]
    p_tx_dbm: Option<String>,
    /// Noise power, dBm.
    #[arg(long, global = true, allow_hyphen_values = true)]
    noise_dbm: Option<String>,
    /// Carrier frequency, GHz.
    #[arg(long, global = true, allow_hyphen_values = true)]
    f_c: Option<String>,
    /// Per-hop blocklength, channel uses.
    #[arg(long, global = true, allow_hyphen_values = true)]
    m: Option<String>,
    /// Weight factor in (0, ln 2].
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Nominal error target of the rate rule.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps_nominal: Option<String>,
    /// Delay budget, channel uses.
    #[arg(long, global = true, allow_hyphen_values = true)]
    qos_d: Option<String>,
    /// Delay-violation probability.
    #[arg(long, global = true, allow_hyphen_values = true)]
    qos_p_d: Option<String>,
    /// cost231_hata_urban, cost231_wi_los, cost231_wi_nlos or fixed_gains.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pathloss_model: Option<String>,
    /// Model of the direct link.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pathloss_model_direct: Option<String>,
    /// Fixed average gain of the direct link.
    #[arg(long, global = true, allow_hyphen_values = true)]
    g1: Option<String>,
    /// Fixed average gain of the backhaul link.
    #[arg(long, global = true, allow_hyphen_values = true)]
    g2: Option<String>,
    /// Fixed average gain of the relaying link.
    #[arg(long, global = true, allow_hyphen_values = true)]
    g3: Option<String>,
}

impl ScenarioFlags {
    fn pairs(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("d_backhaul", &self.d_backhaul),
            ("d_relaying", &self.d_relaying),
            ("d_direct", &self.d_direct),
            ("p_tx_dbm", &self.p_tx_dbm),
            ("noise_dbm", &self.noise_dbm),
            ("f_c", &self.f_c),
            ("m", &self.m),
            ("eta", &self.eta),
            ("eps_nominal", &self.eps_nominal),
            ("qos_d", &self.qos_d),
            ("qos_p_d", &self.qos_p_d),
            ("pathloss_model", &self.pathloss_model),
            ("pathloss_model_direct", &self.pathloss_model_direct),
            ("g1", &self.g1),
            ("g2", &self.g2),
            ("g3", &self.g3),
        ]
    }
}

/// Grid of the swept variable.
#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Explicit comma-separated grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["lo", "hi", "n"])]
    pub grid: Option<Vec<f64>>,
    /// Lower end of an evenly spaced grid.
    #[arg(long)]
    pub lo: Option<f64>,
    /// Upper end of an evenly spaced grid.
    #[arg(long)]
    pub hi: Option<f64>,
    /// Number of points of an evenly spaced grid.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Objective {
    BlThroughput,
    Msdr,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Pair {
    RelayVsDirect,
    AvgVsPerfect,
    FblVsOutage,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DirectModeArg {
    Matched,
    Weighted,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate schemes and metrics over a grid of one variable.
    Sweep {
        /// coding_rate, eta or blocklength.
        #[arg(long, value_parser = parse_named::<Variable>)]
        variable: Variable,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated schemes.
        #[arg(long, value_delimiter = ',', default_value = "relay_avg", value_parser = parse_named::<SchemeKind>)]
        schemes: Vec<SchemeKind>,
        /// Comma-separated metrics.
        #[arg(long, value_delimiter = ',', default_value = "bl_throughput,msdr", value_parser = parse_named::<Metric>)]
        metrics: Vec<Metric>,
    },
    /// Maximize the throughput or the MSDR over the weight factor.
    Optimize {
        #[arg(long, value_enum, default_value_t = Objective::Both)]
        objective: Objective,
        /// Tolerance on the optimal weight factor.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Evaluate two families of schemes on a shared grid and summarize the gap.
    Compare {
        #[arg(long, value_enum)]
        pair: Pair,
        /// eta or blocklength.
        #[arg(long, default_value = "eta", value_parser = parse_named::<Variable>)]
        variable: Variable,
        #[command(flatten)]
        grid: GridArgs,
        /// Rate rule of direct transmission in relay_vs_direct.
        #[arg(long, value_enum, default_value_t = DirectModeArg::Matched)]
        direct_mode: DirectModeArg,
    },
    /// Compare quadrature with Monte Carlo on a randomized battery.
    Validate {
        /// Number of random parameter points.
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Allowed deviation in standard errors.
        #[arg(long, default_value_t = 3.0)]
        sigma: f64,
    },
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as u64)
    } else {
        Err(format!("{s} is not a positive integer count"))
    }
}

fn parse_named<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

fn load_scenario(global: &GlobalArgs) -> relay_fbl::Result<Scenario> {
    let mut s = match &global.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid {
                field: "scenario".into(),
                reason: format!("{}: {e}", path.display()),
            })?;
            Scenario::from_text(&text)?
        }
        None => Scenario::default(),
    };
    for (key, value) in global.fields.pairs() {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    s.validate()?;
    Ok(s)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Domain { .. } | Error::Invalid { .. } => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let mc = McConfig {
        samples: cli.global.mc_samples,
        seed: cli.global.seed,
    };
    let result = load_scenario(&cli.global).and_then(|scenario| match cli.command {
        Command::Sweep {
            variable,
            grid,
            schemes,
            metrics,
        } => commands::sweep(&scenario, mc, variable, &grid, &schemes, &metrics),
        Command::Optimize { objective, tol } => commands::optimize(&scenario, mc, objective, tol),
        Command::Compare {
            pair,
            variable,
            grid,
            direct_mode,
        } => commands::compare(&scenario, mc, pair, variable, &grid, direct_mode),
        Command::Validate { points, sigma } => commands::validate(mc, points, sigma),
    });
    match result {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
