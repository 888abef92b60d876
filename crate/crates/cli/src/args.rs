use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vnc", version, about = "Simulate and verify virtual nonholonomic constraints")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Builtin system name (see `--help` of the `check` command for the list).
    #[arg(long, global = true, conflicts_with = "config")]
    pub system: Option<String>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Builtin parameter override, `name=value`; repeatable.
    #[arg(long = "param", global = true, value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Seed for random state sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Global {
    pub fn param_map(&self) -> BTreeMap<String, f64> {
        self.params.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Constrained,
    Levicivita,
    Nonholonomic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one formulation and write the trajectory.
    Simulate(SimulateArgs),
    /// Run the identity, invariance and control checks on random samples.
    Check(CheckArgs),
    /// Dump the nonzero connection coefficients at a point as JSON.
    Christoffel(ChristoffelArgs),
    /// Integrate two formulations from the same state and measure their distance.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Initial configuration, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q0: Option<Vec<f64>>,
    /// Initial velocity, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Option<Vec<f64>>,
    /// Time horizon.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Step (RK4) or initial step (RK45).
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Add `-k φ` to the invariance equation so residuals decay (extension).
    #[arg(long, value_name = "K")]
    pub stabilize: Option<f64>,
    /// Use the minimum-norm control when it is not unique instead of failing.
    #[arg(long)]
    pub allow_nonunique: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// closedloop | constrained | nonholonomic | uncontrolled
    #[arg(long, default_value = "closedloop")]
    pub formulation: String,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Random points for the pointwise identities.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Initial states for the geodesic-invariance run.
    #[arg(long, default_value_t = 20)]
    pub invariance_samples: usize,
    /// Horizon of the geodesic-invariance run.
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Run batch work on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct ChristoffelArgs {
    /// Chart point, comma separated; the origin when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "constrained")]
    pub kind: KindArg,
    /// Include a diff against the reference rolling-disk table.
    #[arg(long)]
    pub diff_reference: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Two formulations, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "closedloop,constrained")]
    pub formulations: Vec<String>,
    /// Exit with status 1 when the distance exceeds this bound.
    #[arg(long)]
    pub tol: Option<f64>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), value))
}
