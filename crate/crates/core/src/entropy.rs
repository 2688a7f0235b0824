//! Classical and quantum relative entropies.
//!
//! All entropies are in nats. The classical KL divergence Σ pᵢ log(pᵢ/qᵢ) is
//! the asymptotic per-sample rate at which the likelihood of a wrong model
//! decays; its quantum counterpart here is the Umegaki relative entropy
//! Tr[ρ₁ log ρ₁ − ρ₁ log ρ₂]. Measuring in a fixed basis b maps states to
//! outcome distributions, and the KL divergence of those distributions (the
//! measured relative entropy) can never exceed the Umegaki value.

use crate::basisopt::MeasurementBasis;
use crate::error::{Error, Result};
use crate::qstate::{matrix_log, BlochVector, DensityMatrix};

/// A validated probability vector: nonnegative entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    p: Vec<f64>,
}

impl ProbabilityDistribution {
    /// Entries may carry roundoff as low as -1e-12; such values are clamped
    /// to zero. The sum must be 1 within 1e-12.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution { reason: "empty vector".into() });
        }
        let mut clean = p;
        for v in &mut clean {
            if !v.is_finite() {
                return Err(Error::InvalidDistribution {
                    reason: "non-finite entry".into(),
                });
            }
            if *v < 0.0 {
                if *v < -1e-12 {
                    return Err(Error::InvalidDistribution {
                        reason: format!("negative entry {v:.3e}"),
                    });
                }
                *v = 0.0;
            }
        }
        let sum: f64 = clean.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution {
                reason: format!("entries sum to {sum}, expected 1"),
            });
        }
        Ok(ProbabilityDistribution { p: clean })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Σᵢ pᵢ log(pᵢ/qᵢ) in nats, with 0·log(0/q) = 0. Returns `f64::INFINITY`
/// when some pᵢ > 0 has qᵢ = 0, so callers ranking divergences can compare
/// without a separate error path.
pub fn kl_divergence(p: &ProbabilityDistribution, q: &ProbabilityDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    let mut sum = 0.0;
    for (&pi, &qi) in p.probabilities().iter().zip(q.probabilities()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        sum += pi * (pi / qi).ln();
    }
    // The divergence is nonnegative for exact arithmetic; clamp roundoff.
    Ok(sum.max(0.0))
}

/// Per-sample log-likelihood rate of mistaking Q for the true binary
/// distribution P after N samples, including the Stirling correction:
/// (1/N)·log L = −D(P‖Q) − (1/2N)·log(2πN p(1−p)).
pub fn log_likelihood_rate(
    n: u64,
    p: &ProbabilityDistribution,
    q: &ProbabilityDistribution,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::parameter("n", "sample count must be positive"));
    }
    if p.len() != 2 || q.len() != 2 {
        return Err(Error::InvalidDistribution {
            reason: format!("rate is defined for binary distributions, got lengths {} and {}", p.len(), q.len()),
        });
    }
    let ps = p.probabilities()[0];
    if ps <= 0.0 || ps >= 1.0 {
        return Err(Error::parameter(
            "p",
            "the correction term requires 0 < p < 1",
        ));
    }
    let d = kl_divergence(p, q)?;
    let nf = n as f64;
    Ok(-d - (2.0 * std::f64::consts::PI * nf * ps * (1.0 - ps)).ln() / (2.0 * nf))
}

/// Umegaki relative entropy Tr[ρ₁ log ρ₁ − ρ₁ log ρ₂] in nats. ρ₂ must be an
/// interior state (no eigenvalue below `EPS_INTERIOR`); ρ₁ may be pure, with
/// the 0·log 0 = 0 convention applied to its spectrum.
pub fn umegaki_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch { expected: rho1.dim(), got: rho2.dim() });
    }
    let log2 = matrix_log(rho2)?;
    let mut self_term = 0.0;
    for lambda in rho1.eigenvalues().iter() {
        if *lambda > 0.0 {
            self_term += lambda * lambda.ln();
        }
    }
    // Tr[ρ₁ log ρ₂] = Σ_ij (ρ₁)_ij (log ρ₂)_ji; both matrices Hermitian, so
    // the result is real up to roundoff.
    let m1 = rho1.entries();
    let mut cross = 0.0;
    for i in 0..m1.nrows() {
        for j in 0..m1.ncols() {
            cross += (m1[(i, j)] * log2[(j, i)]).re;
        }
    }
    Ok((self_term - cross).max(0.0))
}

/// KL divergence of the outcome distributions of a projective measurement in
/// basis `b`: D({⟨i|ρ₁|i⟩} ‖ {⟨i|ρ₂|i⟩}).
pub fn measured_entropy(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    b: &MeasurementBasis,
) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch { expected: rho1.dim(), got: rho2.dim() });
    }
    if b.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch { expected: rho1.dim(), got: b.dim() });
    }
    let p = ProbabilityDistribution::new(b.outcome_probabilities(rho1))?;
    let q = ProbabilityDistribution::new(b.outcome_probabilities(rho2))?;
    kl_divergence(&p, &q)
}

/// Measured relative entropy for two qubit states in the x-z plane and a
/// measurement direction m̂ = (cos β, 0, sin β): the binary KL divergence of
/// p± = ½(1 ± r₁ cos β) against q± = ½(1 ± r₂ cos(θ+β)).
///
/// The corresponding Bloch vectors are x₁ = (r₁, 0, 0) and
/// x₂ = (r₂ cos θ, 0, −r₂ sin θ), which `measured_entropy` reproduces.
pub fn qubit_measured_entropy(r1: f64, r2: f64, theta: f64, beta: f64) -> Result<f64> {
    for (name, r) in [("r1", r1), ("r2", r2)] {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::parameter(name, format!("radius {r} outside [0, 1)")));
        }
    }
    let p = 0.5 * (1.0 + r1 * beta.cos());
    let q = 0.5 * (1.0 + r2 * (theta + beta).cos());
    let p = ProbabilityDistribution::new(vec![p, 1.0 - p])?;
    let q = ProbabilityDistribution::new(vec![q, 1.0 - q])?;
    kl_divergence(&p, &q)
}

/// The two in-plane Bloch vectors whose measurement statistics
/// `qubit_measured_entropy` evaluates.
pub fn planar_pair(r1: f64, r2: f64, theta: f64) -> Result<(BlochVector, BlochVector)> {
    let x1 = BlochVector::new(r1, 0.0, 0.0)?;
    let x2 = BlochVector::new(r2 * theta.cos(), 0.0, -r2 * theta.sin())?;
    Ok((x1, x2))
}
