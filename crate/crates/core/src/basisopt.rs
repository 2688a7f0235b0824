//! Measurement-basis optimization.
//!
//! Discriminating two states with a projective measurement turns on the
//! choice of basis. For a single qubit the problem is one-dimensional (the
//! angle β of the measurement direction in the shared plane of the two Bloch
//! vectors) and is solved by scan + golden-section refinement. For blocks of
//! N copies the basis can be entangled across copies; the search then runs as
//! greedy Monte-Carlo ascent over the orthogonal group O(2^N), exploiting
//! that both states can always be rotated into the x-z plane so that all
//! relevant matrices are real.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::entropy::{measured_entropy, planar_pair};
use crate::error::{Error, Result};
use crate::qstate::{
    density_to_bloch, tensor_power, BlochVector, CMatrix, DensityMatrix, C64, EPS_INTERIOR,
};

/// An orthonormal projective measurement basis; vectors are the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: CMatrix,
}

impl MeasurementBasis {
    /// Validate orthonormality (Gram matrix within 1e-10 of the identity).
    pub fn from_columns(vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() {
            return Err(Error::DimensionMismatch {
                expected: vectors.nrows(),
                got: vectors.ncols(),
            });
        }
        let gram = vectors.adjoint() * &vectors;
        let mut dev: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                dev = dev.max((gram[(i, j)] - target).norm());
            }
        }
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal { max_dev: dev });
        }
        Ok(MeasurementBasis { vectors })
    }

    /// Promote a real orthogonal matrix (columns = basis vectors).
    pub fn from_real(o: &DMatrix<f64>) -> Result<Self> {
        Self::from_columns(o.map(|v| C64::new(v, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        DVector::from(self.vectors.column(i))
    }

    /// Born probabilities ⟨i|ρ|i⟩ for each basis vector; tiny negative
    /// roundoff is clamped to zero.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        let m = rho.entries();
        let d = self.dim();
        let mut probs = Vec::with_capacity(d);
        for k in 0..d {
            let b = self.vectors.column(k);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                let mut row = C64::new(0.0, 0.0);
                for j in 0..d {
                    row += m[(i, j)] * b[j];
                }
                acc += b[i].conj() * row;
            }
            probs.push(acc.re.max(0.0));
        }
        probs
    }
}

/// Single-qubit basis diagonalizing m̂·σ with m̂ = (cos β, 0, sin β):
/// columns are the ± eigenvectors, real for every β.
pub fn single_qubit_basis(beta: f64) -> MeasurementBasis {
    MeasurementBasis::from_real(&real_single_qubit_basis(beta)).expect("rotation columns are orthonormal")
}

fn real_single_qubit_basis(beta: f64) -> DMatrix<f64> {
    // Polar angle of m̂ measured from the z-axis.
    let gamma = std::f64::consts::FRAC_PI_2 - beta;
    let (s, c) = (gamma / 2.0).sin_cos();
    DMatrix::from_column_slice(2, 2, &[c, s, -s, c])
}

/// Two radii and the angle between two Bloch vectors — the full invariant
/// content of a qubit state pair under global unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalPair {
    pub r1: f64,
    pub r2: f64,
    pub theta: f64,
}

/// Reduce a pair of Bloch vectors to (|X|, |Y|, angle). Every unitarily
/// invariant quantity of the pair (entropies, metrics) is preserved by
/// re-embedding the canonical pair in the x-z plane.
pub fn canonicalize(x: &BlochVector, y: &BlochVector) -> Result<CanonicalPair> {
    for v in [x, y] {
        let min_eig = 0.5 * (1.0 - v.norm());
        if min_eig < EPS_INTERIOR {
            return Err(Error::BoundaryState { min_eigenvalue: min_eig, required: EPS_INTERIOR });
        }
    }
    let (a, b) = (x.coords(), y.coords());
    let theta = if a.norm() < 1e-15 || b.norm() < 1e-15 {
        0.0
    } else {
        a.cross(&b).norm().atan2(a.dot(&b))
    };
    Ok(CanonicalPair { r1: a.norm(), r2: b.norm(), theta })
}

/// Result of a β optimization. `beta` is `None` when the objective is
/// identically zero (the two states coincide), in which case `value` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOptimum {
    pub beta: Option<f64>,
    pub value: f64,
}

fn validate_radii(r1: f64, r2: f64) -> Result<()> {
    for (name, r) in [("r1", r1), ("r2", r2)] {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::parameter(name, format!("radius {r} outside [0, 1)")));
        }
    }
    Ok(())
}

/// Golden-section maximization on [a, b]; assumes a single maximum inside.
fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Scan a 1024-point grid over [0, 2π) and refine the best point by
/// golden-section search to absolute tolerance 1e-10 in the angle. The grid
/// guards against secondary stationary points of the objective.
fn maximize_over_angle(f: &dyn Fn(f64) -> f64) -> BetaOptimum {
    const GRID: usize = 1024;
    let step = 2.0 * std::f64::consts::PI / GRID as f64;
    let mut best_k = 0;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..GRID {
        let v = f(k as f64 * step);
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    if best_v < 1e-15 {
        return BetaOptimum { beta: None, value: 0.0 };
    }
    let center = best_k as f64 * step;
    let (beta, value) = golden_max(f, center - step, center + step, 1e-10);
    BetaOptimum { beta: Some(beta.rem_euclid(2.0 * std::f64::consts::PI)), value }
}

/// Maximize the single-qubit measured relative entropy over the measurement
/// angle β for the planar pair (r₁, r₂, θ).
pub fn optimize_beta(r1: f64, r2: f64, theta: f64) -> Result<BetaOptimum> {
    validate_radii(r1, r2)?;
    let f = move |beta: f64| {
        crate::entropy::qubit_measured_entropy(r1, r2, theta, beta).expect("validated radii")
    };
    Ok(maximize_over_angle(&f))
}

/// The Bell-mixed two-qubit basis over the single-qubit frame at angle β:
/// {(|+−⟩+|−+⟩)/√2, (|+−⟩−|−+⟩)/√2, |++⟩, |−−⟩}. Two maximally entangled
/// vectors and two product vectors.
pub fn bell_mixed_basis(beta: f64) -> MeasurementBasis {
    MeasurementBasis::from_real(&real_bell_mixed_basis(beta)).expect("columns are orthonormal")
}

fn real_bell_mixed_basis(beta: f64) -> DMatrix<f64> {
    let b1 = real_single_qubit_basis(beta);
    let plus = b1.column(0);
    let minus = b1.column(1);
    let kron = |u: &[f64; 2], v: &[f64; 2]| -> [f64; 4] {
        [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]]
    };
    let p = [plus[0], plus[1]];
    let m = [minus[0], minus[1]];
    let pm = kron(&p, &m);
    let mp = kron(&m, &p);
    let pp = kron(&p, &p);
    let mm = kron(&m, &m);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = DMatrix::zeros(4, 4);
    for i in 0..4 {
        out[(i, 0)] = s * (pm[i] + mp[i]);
        out[(i, 1)] = s * (pm[i] - mp[i]);
        out[(i, 2)] = pp[i];
        out[(i, 3)] = mm[i];
    }
    out
}

/// Best Bell-mixed strategy on two copies: maximizes the measured relative
/// entropy of ρ₁⊗ρ₁ vs ρ₂⊗ρ₂ over β and reports the per-qubit value.
pub fn two_qubit_bell_strategy(r1: f64, r2: f64, theta: f64) -> Result<BetaOptimum> {
    validate_radii(r1, r2)?;
    let (x1, x2) = planar_pair(r1, r2, theta)?;
    let rho1 = tensor_power(&crate::qstate::bloch_to_density(&x1), 2)?;
    let rho2 = tensor_power(&crate::qstate::bloch_to_density(&x2), 2)?;
    let f = move |beta: f64| {
        0.5 * measured_entropy(&rho1, &rho2, &bell_mixed_basis(beta)).expect("dims match")
    };
    Ok(maximize_over_angle(&f))
}

/// exp(εA) for a random real antisymmetric A with independent standard-normal
/// entries above the diagonal: an orthogonal matrix near the identity,
/// exactly orthogonal by construction.
pub fn random_orthogonal_step<R: Rng + ?Sized>(dim: usize, eps: f64, rng: &mut R) -> DMatrix<f64> {
    assert!(eps > 0.0 && eps <= 1.0, "step size must lie in (0, 1]");
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let g: f64 = rng.sample(StandardNormal);
            a[(i, j)] = eps * g;
            a[(j, i)] = -eps * g;
        }
    }
    a.exp()
}

/// Monte-Carlo search configuration. `steps` proposals per chain,
/// `restarts` independent chains from jittered initializations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub steps: usize,
    pub step_size: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { steps: 150_000, step_size: 0.1, seed: 1, restarts: 4 }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::parameter("steps", "must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::parameter("step_size", "must lie in (0, 1]"));
        }
        if self.restarts == 0 {
            return Err(Error::parameter("restarts", "must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a Monte-Carlo basis search. The basis is expressed in the
/// canonical frame (both states rotated into the x-z plane) and `trace` is
/// the monotone sequence of accepted objective values of the winning chain.
#[derive(Debug, Clone)]
pub struct McResult {
    pub basis: MeasurementBasis,
    pub per_qubit_value: f64,
    pub trace: Vec<f64>,
}

/// Greedy Monte-Carlo ascent over orthogonal bases of an N-copy block,
/// N ∈ {1,2,3}. Proposals multiply the basis by `random_orthogonal_step`;
/// a move is accepted only if it increases the measured relative entropy.
/// The step size halves after 500 consecutive rejections (floor 1e-4).
/// Chains run independently (in parallel) from the best known structured
/// basis: the optimal product basis for N=1, the Bell-mixed optimum for
/// N=2, and Bell-mixed ⊗ product for N=3; chains after the first start from
/// a jittered copy. Returns the best chain's result.
pub fn mc_optimize(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    n_block: usize,
    cfg: &McConfig,
) -> Result<McResult> {
    if !(1..=3).contains(&n_block) {
        return Err(Error::parameter("n_block", format!("block size {n_block} not in 1..=3")));
    }
    cfg.validate()?;
    let pair = canonicalize(&density_to_bloch(rho1)?, &density_to_bloch(rho2)?)?;
    let dim = 1usize << n_block;

    // Real symmetric N-copy states in the canonical frame.
    let (x1, x2) = planar_pair(pair.r1, pair.r2, pair.theta)?;
    let ra = real_block_state(&x1, n_block);
    let rb = real_block_state(&x2, n_block);

    let init = initial_block_basis(&pair, n_block)?;

    let chains: Vec<(f64, DMatrix<f64>, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|chain| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add((chain as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let mut basis = init.clone();
            if chain > 0 {
                basis = random_orthogonal_step(dim, 0.05, &mut rng) * basis;
            }
            run_chain(&ra, &rb, basis, cfg, &mut rng)
        })
        .collect();

    let best = chains
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart");
    Ok(McResult {
        basis: MeasurementBasis::from_real(&best.1)?,
        per_qubit_value: best.0 / n_block as f64,
        trace: best.2,
    })
}

fn run_chain<R: Rng>(
    ra: &DMatrix<f64>,
    rb: &DMatrix<f64>,
    mut basis: DMatrix<f64>,
    cfg: &McConfig,
    rng: &mut R,
) -> (f64, DMatrix<f64>, Vec<f64>) {
    let dim = basis.nrows();
    let mut current = real_measured_entropy(ra, rb, &basis);
    let mut trace = vec![current];
    let mut eps = cfg.step_size;
    let mut rejected = 0usize;
    for _ in 0..cfg.steps {
        let candidate = random_orthogonal_step(dim, eps, rng) * &basis;
        let value = real_measured_entropy(ra, rb, &candidate);
        if value > current {
            current = value;
            basis = candidate;
            trace.push(value);
            rejected = 0;
        } else {
            rejected += 1;
            if rejected >= 500 {
                eps = (eps * 0.5).max(1e-4);
                rejected = 0;
            }
        }
    }
    (current, basis, trace)
}

/// ρ(x)^{⊗n} as a real matrix — valid because x lies in the x-z plane.
fn real_block_state(x: &BlochVector, n: usize) -> DMatrix<f64> {
    let v = x.coords();
    debug_assert!(v.y.abs() < 1e-15);
    let single = DMatrix::from_row_slice(
        2,
        2,
        &[0.5 * (1.0 + v.z), 0.5 * v.x, 0.5 * v.x, 0.5 * (1.0 - v.z)],
    );
    let mut out = single.clone();
    for _ in 1..n {
        out = out.kronecker(&single);
    }
    out
}

fn initial_block_basis(pair: &CanonicalPair, n_block: usize) -> Result<DMatrix<f64>> {
    let beta1 = optimize_beta(pair.r1, pair.r2, pair.theta)?.beta.unwrap_or(0.0);
    Ok(match n_block {
        1 => real_single_qubit_basis(beta1),
        2 => {
            let beta2 = two_qubit_bell_strategy(pair.r1, pair.r2, pair.theta)?.beta.unwrap_or(0.0);
            real_bell_mixed_basis(beta2)
        }
        3 => {
            let beta2 = two_qubit_bell_strategy(pair.r1, pair.r2, pair.theta)?.beta.unwrap_or(0.0);
            real_bell_mixed_basis(beta2).kronecker(&real_single_qubit_basis(beta1))
        }
        _ => unreachable!("validated block size"),
    })
}

/// KL divergence of the outcome distributions of a real basis on real
/// symmetric states. Interior states keep every q strictly positive, so no
/// infinity handling is needed on this hot path.
fn real_measured_entropy(ra: &DMatrix<f64>, rb: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    let d = basis.nrows();
    let mut sum = 0.0;
    for k in 0..d {
        let mut p = 0.0;
        let mut q = 0.0;
        for i in 0..d {
            let bi = basis[(i, k)];
            let mut rowa = 0.0;
            let mut rowb = 0.0;
            for j in 0..d {
                let bj = basis[(j, k)];
                rowa += ra[(i, j)] * bj;
                rowb += rb[(i, j)] * bj;
            }
            p += bi * rowa;
            q += bi * rowb;
        }
        if p > 0.0 {
            sum += p * (p / q).ln();
        }
    }
    sum.max(0.0)
}
