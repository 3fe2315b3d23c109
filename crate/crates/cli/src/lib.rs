//! Command-line driver: argument parsing, dispatch and result files.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "EULER_CHAOS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "euler-chaos",
    version,
    about = "Galerkin-truncated stochastic 2D Euler experiments: constants, flows, chaos operators and Kolmogorov solvers"
)]
pub struct Cli {
    /// Directory receiving CSV tables and their JSON manifests.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a_N(γ) and β_N.
    Constants(ConstantsArgs),
    /// Simulate trajectories of the truncated flow from white-noise starts.
    Simulate(SimulateArgs),
    /// Check that white noise stays invariant under the flow.
    Invariance(InvarianceArgs),
    /// Chaos decomposition of L⁰_N H_n and the variance of R_{l,l}.
    Chaos(ChaosArgs),
    /// Variance of the nonlinear pairing increments, exact against Monte Carlo.
    Nonlinear(NonlinearArgs),
    /// Monte Carlo solution of the Kolmogorov equation.
    Kolmogorov(KolmogorovArgs),
    /// Run the acceptance suite and print a pass/fail table.
    VerifyAll(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// All modes with |k| <= N.
    Ball,
    /// Modes with |k| <= θN.
    Gamma,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = 4)]
    pub n_max: i64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
    #[arg(long, default_value = "constants")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 4)]
    pub n: i64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = Noise::Ball)]
    pub noise: Noise,
    /// Used when `--noise gamma`.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Defaults to 200 steps per unit time.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub drift: Switch,
    /// Strang-symmetric ordering of the noise maps.
    #[arg(long)]
    pub symmetric: bool,
    /// Modes whose coefficients are written, as `k1,k2;k1,k2`.
    #[arg(long, default_value = "1,0;0,1;1,1")]
    pub watch: String,
    #[arg(long, default_value = "simulate")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct InvarianceArgs {
    #[arg(long, default_value_t = 4)]
    pub n: i64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = Noise::Ball)]
    pub noise: Noise,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub drift: Switch,
    /// Moments are reported for the coordinates in Box(watch_box).
    #[arg(long, default_value_t = 2)]
    pub watch_box: i64,
    #[arg(long, default_value = "invariance")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ChaosArgs {
    /// Multi-index `n` of `H_n`, as `k1,k2:n;...`.
    #[arg(long, default_value = "1,0:2")]
    pub multi_index: String,
    #[arg(long, value_delimiter = ',', default_value = "6,9")]
    pub n_list: Vec<i64>,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
    /// Mode `l` of the reported `R_{l,l}(2N) − R_{l,l}(N)` variance.
    #[arg(long, default_value = "1,0")]
    pub l: String,
    #[arg(long, default_value = "chaos")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct NonlinearArgs {
    #[arg(long, default_value = "1,2")]
    pub l: String,
    #[arg(long, default_value_t = 3)]
    pub n: i64,
    #[arg(long, default_value_t = 6)]
    pub m: i64,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "nonlinear")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct KolmogorovArgs {
    /// `constant[:c]`, `hermite:<k1,k2:n;...>` or `norm-poly:<d>`.
    #[arg(long, default_value = "hermite:1,0:2")]
    pub rho0: String,
    #[arg(long, default_value_t = 0.01)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub p: Vec<f64>,
    /// Inner trajectories per evaluation point.
    #[arg(long, default_value_t = 100)]
    pub trajectories: usize,
    /// Outer white-noise evaluation points.
    #[arg(long, default_value_t = 1_000)]
    pub points: usize,
    /// Samples of the chaos projection (Hermite data only).
    #[arg(long, default_value_t = 1_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = Noise::Ball)]
    pub noise: Noise,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub n_list: Vec<i64>,
    #[arg(long, default_value_t = 200)]
    pub steps_per_unit: usize,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub drift: Switch,
    #[arg(long, default_value = "kolmogorov")]
    pub out: String,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Reduced sample sizes.
    #[arg(long)]
    pub quick: bool,
    /// Restrict to these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[arg(long, default_value = "verify")]
    pub out: String,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| anyhow::anyhow!("invalid {THREADS_ENV}=`{v}`: must be a positive integer"))?;
        // A second call in the same process (tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match configure_threads().and_then(|_| commands::run(cli, argv)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
