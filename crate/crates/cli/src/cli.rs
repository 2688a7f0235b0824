//! Command-line definition and configuration-file merging.
//!
//! Every numeric option can also be supplied through `--config <file>`, a flat
//! JSON object whose keys match the long option names with dashes replaced by
//! underscores (for example `beta_grid`).  Explicit command-line flags always
//! override configuration-file values, which in turn override built-in
//! defaults.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

/// Output encoding for a command.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Comma-separated values with `#`-prefixed metadata lines.
    Csv,
    /// A single JSON object.
    Json,
}

/// Which discrimination strategies the `simulate` command should run.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyChoice {
    /// Per-copy projective measurement at the optimal analyzer angle.
    Single,
    /// Pairwise entangled measurement in the rotated Bell basis.
    Entangled,
    /// Run both strategies on independent sample streams.
    Both,
}

#[derive(Parser, Debug)]
#[command(
    name = "qdg",
    version,
    about = "Distinguishability geometry of qubit states: entropy sweeps, \
             metric ellipses, curvature, geodesics, measurement benchmarks, \
             and sampling simulations.",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the measured relative entropy of a planar state pair as a
    /// function of the analyzer angle beta, next to the quantum value.
    SweepBeta(SweepBetaArgs),
    /// Tabulate the optimized measured relative entropy and the quantum
    /// relative entropy over the angular separation theta.
    SweepTheta(SweepThetaArgs),
    /// Sample distinguishability ellipses (Bures-Helstrom and
    /// Bogoliubov-Kubo-Mori) on a lattice of Bloch-disk points.
    EllipseField(EllipseFieldArgs),
    /// Tabulate the scalar curvature of the Bogoliubov-Kubo-Mori metric on
    /// the Bloch ball as a function of the radius.
    Curvature(CurvatureArgs),
    /// Integrate a geodesic of the Bogoliubov-Kubo-Mori metric, either
    /// between two states (boundary-value mode) or from one state with a
    /// given angular momentum (initial-value mode).
    Geodesic(GeodesicArgs),
    /// Compare measurement strategies on one state pair: optimal single-qubit,
    /// rotated-Bell, Monte-Carlo block searches, and the quantum limit.
    Benchmark(BenchmarkArgs),
    /// Simulate sequential discrimination experiments with finite samples and
    /// report empirical rates with jackknife standard errors.
    Simulate(SimulateArgs),
}

/// Options shared by every subcommand.
#[derive(Parser, Debug, Clone)]
pub struct CommonArgs {
    /// JSON configuration file supplying defaults for any option.
    #[arg(long, value_name = "FILE", global = false)]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output to a file instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Seed recorded in the output and used by stochastic commands.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Parser, Debug)]
pub struct SweepBetaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bloch radius of the first state.
    #[arg(long)]
    pub r1: Option<f64>,
    /// Bloch radius of the second state.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Angle between the two Bloch vectors in radians.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of analyzer angles, evenly spaced over [0, 2*pi).
    #[arg(long)]
    pub beta_grid: Option<usize>,
}

#[derive(Parser, Debug)]
pub struct SweepThetaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bloch radius of the first state.
    #[arg(long)]
    pub r1: Option<f64>,
    /// Bloch radius of the second state.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Number of separation angles, evenly spaced over [0, 2*pi].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Parser, Debug)]
pub struct EllipseFieldArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lattice points per axis over [-0.9, 0.9] in the measurement plane.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Coordinate displacement at which ellipse semi-axes are drawn.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Parser, Debug)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of interior radii; row k uses r = k / (grid + 1).
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Parser, Debug)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bloch radius of the start state (at polar angle zero).
    #[arg(long)]
    pub r1: Option<f64>,
    /// Bloch radius of the end state (boundary-value mode).
    #[arg(long)]
    pub r2: Option<f64>,
    /// Polar angle of the end state in radians (boundary-value mode).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Conserved angular momentum for initial-value mode; selecting this
    /// flag switches the command from endpoint mode to launch mode.
    #[arg(long)]
    pub j: Option<f64>,
    /// Arc-length budget for initial-value mode.
    #[arg(long)]
    pub max_length: Option<f64>,
    /// Maximum number of table rows (the path is thinned evenly).
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Parser, Debug)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bloch radius of the first state.
    #[arg(long)]
    pub r1: Option<f64>,
    /// Bloch radius of the second state.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Angle between the two Bloch vectors in radians.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Monte-Carlo proposal steps per chain.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Independent Monte-Carlo chains per block size.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Largest measured block size (2 or 3).
    #[arg(long)]
    pub blocks: Option<usize>,
}

#[derive(Parser, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bloch radius of the first state (the sampled one).
    #[arg(long)]
    pub r1: Option<f64>,
    /// Bloch radius of the second state.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Angle between the two Bloch vectors in radians.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of simulated copies of the sampled state.
    #[arg(long)]
    pub copies: Option<u64>,
    /// Which strategies to simulate.
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyChoice>,
}

/// Flat JSON configuration file.  Unknown keys are rejected so that typos
/// fail loudly instead of being ignored.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub theta: Option<f64>,
    pub beta_grid: Option<usize>,
    pub grid: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub restarts: Option<usize>,
    pub blocks: Option<usize>,
    pub copies: Option<u64>,
    pub j: Option<f64>,
    pub max_length: Option<f64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub strategy: Option<String>,
}

impl ConfigFile {
    /// Load and parse the configuration file, if one was requested.
    pub fn load(path: Option<&PathBuf>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("invalid config file {}: {e}", path.display()))
    }

    pub fn format(&self) -> Result<Option<Format>, String> {
        match self.format.as_deref() {
            None => Ok(None),
            Some("csv") => Ok(Some(Format::Csv)),
            Some("json") => Ok(Some(Format::Json)),
            Some(other) => Err(format!(
                "invalid config value for format: {other:?} (expected \"csv\" or \"json\")"
            )),
        }
    }

    pub fn strategy(&self) -> Result<Option<StrategyChoice>, String> {
        match self.strategy.as_deref() {
            None => Ok(None),
            Some("single") => Ok(Some(StrategyChoice::Single)),
            Some("entangled") => Ok(Some(StrategyChoice::Entangled)),
            Some("both") => Ok(Some(StrategyChoice::Both)),
            Some(other) => Err(format!(
                "invalid config value for strategy: {other:?} \
                 (expected \"single\", \"entangled\", or \"both\")"
            )),
        }
    }
}

/// Pick the first present value: explicit flag, then config file, then default.
pub fn resolve<T: Clone>(flag: &Option<T>, config: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| config.clone()).unwrap_or(default)
}

/// Like [`resolve`] but without a default.
pub fn resolve_opt<T: Clone>(flag: &Option<T>, config: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| config.clone())
}
