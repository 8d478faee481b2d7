use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "steerkit",
    version,
    about = "Two-setting EPR steerability of two-qubit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steerability S of one state.
    Steer(StateCmd),
    /// Maximal CHSH violation N.
    Chsh(StateCmd),
    /// Steering radius of an X-state.
    Radius(StateCmd),
    /// Steering ellipsoid center and volume of an X-state.
    Ellipsoid(StateCmd),
    /// S in both directions along one family parameter.
    Asym(SweepCmd),
    /// S over a grid of family parameters.
    Sweep(SweepCmd),
    /// Seeded (N, S) scan of zero-state X-states.
    Region(RegionCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    #[value(name = "AtoB", alias = "atob", alias = "a2b")]
    AtoB,
    #[value(name = "BtoA", alias = "btoa", alias = "b2a")]
    BtoA,
    #[value(name = "both")]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// State file (JSON with one of the keys rho, pauli, family).
    #[arg(long, conflicts_with = "family")]
    pub state: Option<PathBuf>,
    /// Inline family, e.g. "w_v_theta,V=0.2,theta=pi/6".
    #[arg(long)]
    pub family: Option<String>,
    /// Extra family parameter key=value (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Shorthand for --param theta=VALUE.
    #[arg(long)]
    pub theta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "AtoB")]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Output format; JSON for single states, CSV for sweeps and scans by default.
    #[arg(long, value_enum)]
    pub output: Option<OutputArg>,
    /// Tolerance override name=value (repeatable).
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
    /// Seed for optimizer jitter and sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 18)]
    pub grid_per_angle: usize,
    #[arg(long, default_value_t = 8)]
    pub top_k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct StateCmd {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepCmd {
    #[command(flatten)]
    pub state: StateArgs,
    /// Swept parameter key=lo:hi:step (repeatable; grids combine as a product).
    #[arg(long = "grid", value_name = "KEY=LO:HI:STEP", required = true)]
    pub grids: Vec<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegionCmd {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}
