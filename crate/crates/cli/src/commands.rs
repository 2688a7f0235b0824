//! Implementations of the seven subcommands.
//!
//! Each command resolves its parameters (flags > config file > defaults),
//! validates them, calls into the `qdg` library, and renders either a CSV
//! table or a JSON document.  All stochastic commands take an explicit seed
//! and are bitwise reproducible.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qdg::{
    bkm_curvature, bloch_to_density, ellipse_field, geodesic_bvp, geodesic_ivp, mc_optimize,
    optimize_beta, planar_pair, qubit_measured_entropy, run_discrimination,
    two_qubit_bell_strategy, umegaki_entropy, f_alpha, GeodesicPath, McConfig, Strategy,
};

use crate::cli::{
    resolve, resolve_opt, BenchmarkArgs, ConfigFile, CurvatureArgs, EllipseFieldArgs, Format,
    GeodesicArgs, SimulateArgs, StrategyChoice, SweepBetaArgs, SweepThetaArgs,
};
use crate::error::AppError;
use crate::output::{deliver, KvTable, Table};

/// Default benchmark state pair: the working example used throughout the
/// documentation (r₁ = 0.9, r₂ = 0.5, θ = π/2).
const DEFAULT_R1: f64 = 0.9;
const DEFAULT_R2: f64 = 0.5;
const DEFAULT_THETA: f64 = FRAC_PI_2;

fn check_radius(name: &'static str, r: f64) -> Result<(), AppError> {
    if !(0.0..1.0).contains(&r) || !r.is_finite() {
        return Err(AppError::usage(format!(
            "{name} must be a Bloch radius in [0, 1), got {r}"
        )));
    }
    Ok(())
}

fn check_finite(name: &'static str, x: f64) -> Result<(), AppError> {
    if !x.is_finite() {
        return Err(AppError::usage(format!("{name} must be finite, got {x}")));
    }
    Ok(())
}

/// Resolved output destination and encoding shared by all commands.
struct Sink {
    format: Format,
    out: Option<PathBuf>,
}

impl Sink {
    fn resolve(
        common: &crate::cli::CommonArgs,
        config: &ConfigFile,
        default_format: Format,
    ) -> Result<Self, AppError> {
        let config_format = config.format().map_err(AppError::usage)?;
        Ok(Sink {
            format: resolve(&common.format, &config_format, default_format),
            out: resolve_opt(&common.out, &config.out),
        })
    }

    fn emit_table(&self, table: &Table) -> Result<(), AppError> {
        let text = match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        };
        deliver(self.out.as_ref(), &text).map_err(AppError::usage)
    }

    fn emit_report<T: Serialize>(&self, json: &T, kv: &KvTable) -> Result<(), AppError> {
        let text = match self.format {
            Format::Json => {
                let mut text = serde_json::to_string(json)
                    .map_err(|e| AppError::usage(format!("cannot serialize report: {e}")))?;
                text.push('\n');
                text
            }
            Format::Csv => kv.to_csv(),
        };
        deliver(self.out.as_ref(), &text).map_err(AppError::usage)
    }
}

// ---------------------------------------------------------------------------
// sweep-beta
// ---------------------------------------------------------------------------

pub fn sweep_beta(args: &SweepBetaArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Csv)?;

    let r1 = resolve(&args.r1, &config.r1, DEFAULT_R1);
    let r2 = resolve(&args.r2, &config.r2, DEFAULT_R2);
    let theta = resolve(&args.theta, &config.theta, DEFAULT_THETA);
    let beta_grid = resolve(&args.beta_grid, &config.beta_grid, 512);
    check_radius("r1", r1)?;
    check_radius("r2", r2)?;
    check_finite("theta", theta)?;
    if beta_grid < 2 {
        return Err(AppError::usage(format!(
            "beta_grid must be at least 2, got {beta_grid}"
        )));
    }

    let (x1, x2) = planar_pair(r1, r2, theta)?;
    let quantum = umegaki_entropy(&bloch_to_density(&x1), &bloch_to_density(&x2))?;
    let optimum = optimize_beta(r1, r2, theta)?;

    let mut table = Table::new(
        "sweep-beta",
        vec!["beta", "measured_entropy", "quantum_entropy"],
    );
    table.meta_float("r1", r1);
    table.meta_float("r2", r2);
    table.meta_float("theta", theta);
    table.meta_int("beta_grid", beta_grid as u64);
    if let Some(beta_star) = optimum.beta {
        table.meta_float("beta_star", beta_star);
    }
    table.meta_float("optimized_entropy", optimum.value);
    table.meta_float("quantum_entropy", quantum);

    for k in 0..beta_grid {
        let beta = 2.0 * PI * (k as f64) / (beta_grid as f64);
        let s = qubit_measured_entropy(r1, r2, theta, beta)?;
        table.rows.push(vec![beta, s, quantum]);
    }
    sink.emit_table(&table)
}

// ---------------------------------------------------------------------------
// sweep-theta
// ---------------------------------------------------------------------------

pub fn sweep_theta(args: &SweepThetaArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Csv)?;

    let r1 = resolve(&args.r1, &config.r1, DEFAULT_R1);
    let r2 = resolve(&args.r2, &config.r2, DEFAULT_R1);
    let grid = resolve(&args.grid, &config.grid, 361);
    check_radius("r1", r1)?;
    check_radius("r2", r2)?;
    if grid < 2 {
        return Err(AppError::usage(format!("grid must be at least 2, got {grid}")));
    }

    let mut table = Table::new(
        "sweep-theta",
        vec!["theta", "optimized_entropy", "quantum_entropy"],
    );
    table.meta_float("r1", r1);
    table.meta_float("r2", r2);
    table.meta_int("grid", grid as u64);

    for k in 0..grid {
        let theta = 2.0 * PI * (k as f64) / ((grid - 1) as f64);
        let optimized = optimize_beta(r1, r2, theta)?.value;
        let (x1, x2) = planar_pair(r1, r2, theta)?;
        let quantum = umegaki_entropy(&bloch_to_density(&x1), &bloch_to_density(&x2))?;
        table.rows.push(vec![theta, optimized, quantum]);
    }
    sink.emit_table(&table)
}

// ---------------------------------------------------------------------------
// ellipse-field
// ---------------------------------------------------------------------------

pub fn ellipse_field_cmd(args: &EllipseFieldArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Csv)?;

    let grid = resolve(&args.grid, &config.grid, 13);
    let epsilon = resolve(&args.epsilon, &config.epsilon, 0.1);
    if grid < 2 {
        return Err(AppError::usage(format!("grid must be at least 2, got {grid}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(AppError::usage(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }

    // Square lattice over [-0.9, 0.9]², clipped to the disk of radius 0.9 so
    // every kept point is safely interior.
    let half = 0.9;
    let mut points = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let x = -half + 2.0 * half * (i as f64) / ((grid - 1) as f64);
            let z = -half + 2.0 * half * (j as f64) / ((grid - 1) as f64);
            if x * x + z * z <= half * half + 1e-12 {
                points.push((x, z));
            }
        }
    }
    let ellipses = ellipse_field(&points, epsilon)?;

    let mut table = Table::new(
        "ellipse-field",
        vec![
            "x",
            "z",
            "bh_radial",
            "bh_tangential",
            "bkm_radial",
            "bkm_tangential",
        ],
    );
    table.meta_int("grid", grid as u64);
    table.meta_float("epsilon", epsilon);
    table.meta_int("points", ellipses.len() as u64);
    for e in &ellipses {
        table.rows.push(vec![
            e.center.0,
            e.center.1,
            e.bh_semi_axes.0,
            e.bh_semi_axes.1,
            e.bkm_semi_axes.0,
            e.bkm_semi_axes.1,
        ]);
    }
    sink.emit_table(&table)
}

// ---------------------------------------------------------------------------
// curvature
// ---------------------------------------------------------------------------

pub fn curvature(args: &CurvatureArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Csv)?;

    let grid = resolve(&args.grid, &config.grid, 199);
    if grid < 1 {
        return Err(AppError::usage(format!("grid must be at least 1, got {grid}")));
    }

    let mut table = Table::new("curvature", vec!["r", "scalar_curvature"]);
    table.meta_int("grid", grid as u64);
    for k in 1..=grid {
        let r = (k as f64) / ((grid + 1) as f64);
        table.rows.push(vec![r, bkm_curvature(r)?]);
    }
    sink.emit_table(&table)
}

// ---------------------------------------------------------------------------
// geodesic
// ---------------------------------------------------------------------------

/// Thin a path to at most `cap` evenly spaced rows, always keeping the
/// first and last sample.
fn thin_rows(path: &GeodesicPath, cap: usize) -> Vec<Vec<f64>> {
    let all: Vec<[f64; 5]> = path.rows().collect();
    if all.len() <= cap {
        return all.iter().map(|r| r.to_vec()).collect();
    }
    let last = all.len() - 1;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(cap);
    for k in 0..cap {
        let idx = (k as f64 / (cap - 1) as f64 * last as f64).round() as usize;
        rows.push(all[idx.min(last)].to_vec());
    }
    rows.dedup_by(|a, b| a[0] == b[0]);
    rows
}

pub fn geodesic(args: &GeodesicArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Csv)?;

    let r1 = resolve(&args.r1, &config.r1, DEFAULT_R1);
    let cap = resolve(&args.grid, &config.grid, 2001);
    check_radius("r1", r1)?;
    if cap < 2 {
        return Err(AppError::usage(format!("grid must be at least 2, got {cap}")));
    }

    let momentum = resolve_opt(&args.j, &config.j);
    let mut table = Table::new("geodesic", vec!["s", "r", "phi", "E", "J"]);

    let path = if let Some(j) = momentum {
        // Launch mode: start at (r1, phi = 0) with conserved angular
        // momentum j, launched outward at unit speed.
        check_finite("j", j)?;
        let max_length = resolve(&args.max_length, &config.max_length, 3.0);
        if !(max_length > 0.0 && max_length.is_finite()) {
            return Err(AppError::usage(format!(
                "max_length must be positive and finite, got {max_length}"
            )));
        }
        let alpha0 = r1.asin();
        let direction = if r1 < 1e-12 {
            if j != 0.0 {
                return Err(AppError::usage(
                    "angular momentum must be zero when launching from the origin".to_string(),
                ));
            }
            (1.0, 0.0)
        } else {
            let f = f_alpha(alpha0)?;
            let dphi = j / f;
            let radial_sq = 1.0 - j * j / f;
            if radial_sq < -1e-12 {
                return Err(AppError::usage(format!(
                    "angular momentum {j} exceeds the unit-speed bound sqrt(F(alpha)) = {} \
                     at r1 = {r1}",
                    f.sqrt()
                )));
            }
            (radial_sq.max(0.0).sqrt(), dphi)
        };
        table.meta_text("mode", "launch");
        table.meta_float("r1", r1);
        table.meta_float("j", j);
        table.meta_float("max_length", max_length);
        geodesic_ivp(alpha0, 0.0, direction, 1e-4, max_length)?
    } else {
        // Endpoint mode: solve the boundary-value problem between
        // (r1, phi = 0) and (r2, phi = theta) in the canonical plane.
        let r2 = resolve(&args.r2, &config.r2, DEFAULT_R2);
        let theta = resolve(&args.theta, &config.theta, DEFAULT_THETA);
        check_radius("r2", r2)?;
        check_finite("theta", theta)?;
        table.meta_text("mode", "endpoint");
        table.meta_float("r1", r1);
        table.meta_float("r2", r2);
        table.meta_float("theta", theta);
        geodesic_bvp((r1, 0.0), (r2, theta))?
    };

    table.meta_float("length", path.length);
    table.meta_float("energy", path.energy);
    table.meta_float("angular_momentum", path.angular_momentum);
    table.meta_float("max_energy_drift", path.max_energy_drift);
    table.meta_float("max_momentum_drift", path.max_momentum_drift);
    table.meta_bool("reached_boundary", path.reached_boundary);
    if let Some(total) = path.length_to_boundary() {
        table.meta_float("length_to_boundary", total);
    }
    if let Some(angle) = path.boundary_angle {
        table.meta_float("boundary_angle", angle);
    }
    table.rows = thin_rows(&path, cap);
    sink.emit_table(&table)
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

#[derive(Serialize, Debug)]
pub struct BenchmarkReport {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub r1: f64,
    pub r2: f64,
    pub theta: f64,
    pub steps: usize,
    pub restarts: usize,
    pub blocks: usize,
    /// Best per-copy rate of a fixed projective measurement on single qubits.
    pub single_qubit_rate: f64,
    pub single_qubit_beta: Option<f64>,
    /// Best per-qubit rate over the rotated-Bell family on qubit pairs.
    pub bell_two_qubit_rate: f64,
    pub bell_two_qubit_beta: Option<f64>,
    /// Monte-Carlo search over orthogonal bases of two-qubit blocks.
    pub mc_two_qubit_rate: f64,
    /// Monte-Carlo search over orthogonal bases of three-qubit blocks
    /// (absent when --blocks 2).
    pub mc_three_qubit_rate: Option<f64>,
    /// Quantum relative entropy: the per-copy ceiling for any measurement.
    pub quantum_rate: f64,
    /// True when the rates are nondecreasing in the order listed above.
    pub ladder_monotone: bool,
    /// True when every measured rate stays at or below the quantum rate.
    pub below_quantum: bool,
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Json)?;

    let r1 = resolve(&args.r1, &config.r1, DEFAULT_R1);
    let r2 = resolve(&args.r2, &config.r2, DEFAULT_R2);
    let theta = resolve(&args.theta, &config.theta, DEFAULT_THETA);
    let steps = resolve(&args.steps, &config.steps, 150_000);
    let restarts = resolve(&args.restarts, &config.restarts, 4);
    let blocks = resolve(&args.blocks, &config.blocks, 3);
    let seed = resolve(&args.common.seed, &config.seed, 1);
    check_radius("r1", r1)?;
    check_radius("r2", r2)?;
    check_finite("theta", theta)?;
    if !(2..=3).contains(&blocks) {
        return Err(AppError::usage(format!("blocks must be 2 or 3, got {blocks}")));
    }
    if steps == 0 || restarts == 0 {
        return Err(AppError::usage(
            "steps and restarts must both be positive".to_string(),
        ));
    }

    let (x1, x2) = planar_pair(r1, r2, theta)?;
    let rho1 = bloch_to_density(&x1);
    let rho2 = bloch_to_density(&x2);

    let single = optimize_beta(r1, r2, theta)?;
    let bell = two_qubit_bell_strategy(r1, r2, theta)?;
    let quantum = umegaki_entropy(&rho1, &rho2)?;

    let mc_cfg = McConfig { steps, step_size: 0.1, seed, restarts };
    let mc2 = mc_optimize(&rho1, &rho2, 2, &mc_cfg)?;
    let mc3 = if blocks >= 3 {
        let cfg3 = McConfig { seed: seed.wrapping_add(1), ..mc_cfg };
        Some(mc_optimize(&rho1, &rho2, 3, &cfg3)?)
    } else {
        None
    };

    let mc3_rate = mc3.as_ref().map(|m| m.per_qubit_value);
    let slack = 1e-9;
    let ladder_monotone = single.value <= bell.value + slack
        && bell.value <= mc2.per_qubit_value + slack
        && mc3_rate.is_none_or(|m3| mc2.per_qubit_value <= m3 + slack);
    let best = mc3_rate.unwrap_or(mc2.per_qubit_value);
    let below_quantum = best <= quantum + slack;

    let report = BenchmarkReport {
        command: "benchmark",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        r1,
        r2,
        theta,
        steps,
        restarts,
        blocks,
        single_qubit_rate: single.value,
        single_qubit_beta: single.beta,
        bell_two_qubit_rate: bell.value,
        bell_two_qubit_beta: bell.beta,
        mc_two_qubit_rate: mc2.per_qubit_value,
        mc_three_qubit_rate: mc3_rate,
        quantum_rate: quantum,
        ladder_monotone,
        below_quantum,
    };

    let mut kv = KvTable::new("benchmark");
    kv.meta_int("seed", seed);
    kv.meta_float("r1", r1);
    kv.meta_float("r2", r2);
    kv.meta_float("theta", theta);
    kv.meta_int("steps", steps as u64);
    kv.meta_int("restarts", restarts as u64);
    kv.meta_int("blocks", blocks as u64);
    kv.meta_bool("ladder_monotone", ladder_monotone);
    kv.meta_bool("below_quantum", below_quantum);
    kv.entry("single_qubit_rate", single.value);
    kv.entry("bell_two_qubit_rate", bell.value);
    kv.entry("mc_two_qubit_rate", mc2.per_qubit_value);
    if let Some(m3) = mc3_rate {
        kv.entry("mc_three_qubit_rate", m3);
    }
    kv.entry("quantum_rate", quantum);

    sink.emit_report(&report, &kv)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize, Debug)]
pub struct StrategyReport {
    pub strategy: String,
    pub copies: u64,
    /// Empirical log-likelihood-ratio rate, nats per copy.
    pub rate: f64,
    /// Jackknife standard error of the per-copy rate.
    pub stderr: f64,
    /// Analytic rate the empirical one converges to.
    pub expected_rate: f64,
    /// (rate - expected_rate) / stderr.
    pub deviation_sigmas: f64,
    /// Analyzer angle used by the measurement.
    pub beta: f64,
    pub outcome_counts: Vec<u64>,
}

#[derive(Serialize, Debug)]
pub struct SimulateReport {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub r1: f64,
    pub r2: f64,
    pub theta: f64,
    pub copies: u64,
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single: Option<StrategyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entangled: Option<StrategyReport>,
    /// Entangled-minus-single rate difference when both strategies ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entangled_advantage: Option<f64>,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), AppError> {
    let config = ConfigFile::load(args.common.config.as_ref()).map_err(AppError::usage)?;
    let sink = Sink::resolve(&args.common, &config, Format::Json)?;

    let r1 = resolve(&args.r1, &config.r1, DEFAULT_R1);
    let r2 = resolve(&args.r2, &config.r2, DEFAULT_R2);
    let theta = resolve(&args.theta, &config.theta, DEFAULT_THETA);
    let copies = resolve(&args.copies, &config.copies, 1_000_000);
    let seed = resolve(&args.common.seed, &config.seed, 1);
    let config_strategy = config.strategy().map_err(AppError::usage)?;
    let choice = resolve(&args.strategy, &config_strategy, StrategyChoice::Both);
    check_radius("r1", r1)?;
    check_radius("r2", r2)?;
    check_finite("theta", theta)?;

    let (x1, x2) = planar_pair(r1, r2, theta)?;
    let rho1 = bloch_to_density(&x1);
    let rho2 = bloch_to_density(&x2);

    let run = |strategy: Strategy, stream: u64| -> Result<StrategyReport, AppError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(stream));
        let report = run_discrimination(&rho1, &rho2, strategy, copies, &mut rng)?;
        let deviation = if report.stderr > 0.0 {
            (report.rate - report.expected_rate) / report.stderr
        } else {
            0.0
        };
        Ok(StrategyReport {
            strategy: report.strategy.to_string(),
            copies: report.copies,
            rate: report.rate,
            stderr: report.stderr,
            expected_rate: report.expected_rate,
            deviation_sigmas: deviation,
            beta: report.beta,
            outcome_counts: report.outcome_counts,
        })
    };

    // Each strategy draws from its own seeded stream so that results do not
    // depend on whether the other strategy also ran.
    let single = match choice {
        StrategyChoice::Single | StrategyChoice::Both => Some(run(Strategy::SingleQubit, 0)?),
        StrategyChoice::Entangled => None,
    };
    let entangled = match choice {
        StrategyChoice::Entangled | StrategyChoice::Both => Some(run(Strategy::Entangled, 1)?),
        StrategyChoice::Single => None,
    };
    let entangled_advantage = match (&single, &entangled) {
        (Some(s), Some(e)) => Some(e.rate - s.rate),
        _ => None,
    };

    let strategy_name = match choice {
        StrategyChoice::Single => "single",
        StrategyChoice::Entangled => "entangled",
        StrategyChoice::Both => "both",
    };

    let mut kv = KvTable::new("simulate");
    kv.meta_int("seed", seed);
    kv.meta_float("r1", r1);
    kv.meta_float("r2", r2);
    kv.meta_float("theta", theta);
    kv.meta_int("copies", copies);
    kv.meta_text("strategy", strategy_name);
    if let Some(rep) = &single {
        kv.entry("single_rate", rep.rate);
        kv.entry("single_stderr", rep.stderr);
        kv.entry("single_expected_rate", rep.expected_rate);
        kv.entry("single_beta", rep.beta);
    }
    if let Some(rep) = &entangled {
        kv.entry("entangled_rate", rep.rate);
        kv.entry("entangled_stderr", rep.stderr);
        kv.entry("entangled_expected_rate", rep.expected_rate);
        kv.entry("entangled_beta", rep.beta);
    }
    if let Some(adv) = entangled_advantage {
        kv.entry("entangled_advantage", adv);
    }

    let report = SimulateReport {
        command: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        r1,
        r2,
        theta,
        copies,
        strategy: strategy_name.to_string(),
        single,
        entangled,
        entangled_advantage,
    };
    sink.emit_report(&report, &kv)
}
