//! The three Riemannian structures on state space.
//!
//! Fisher-Rao is the classical information metric Σ dpᵢ²/pᵢ. Its quantum
//! extensions used here are the Bures–Helstrom form Tr[ρLL] built from the
//! symmetric logarithmic derivative, and the BKM form defined as the Hessian
//! of the Umegaki relative entropy. For a qubit, ρ = (I + x·σ)/2, both have
//! closed forms: BH is dr²/(1−r²) + r² dΩ², while BKM keeps the radial
//! coefficient C(r) = 1/(1−r²) but stretches the angular one to
//! D(r) = (1/2r)·log((1+r)/(1−r)) ≥ 1 — the source of the discrimination
//! advantage quantified elsewhere in this crate.

use nalgebra::{Matrix3, Vector3};

use crate::basisopt::MeasurementBasis;
use crate::entropy::{umegaki_entropy, ProbabilityDistribution};
use crate::error::{Error, Result};
use crate::qstate::{
    bloch_to_density, density_to_bloch, eig_hermitian, BlochVector, CMatrix, DensityMatrix,
    TangentVector, C64, EPS_INTERIOR,
};

/// Symmetric logarithmic derivative: the Hermitian solution L of
/// dρ = ½(ρL + Lρ).
#[derive(Debug, Clone, PartialEq)]
pub struct Sld {
    l: CMatrix,
}

impl Sld {
    pub fn matrix(&self) -> &CMatrix {
        &self.l
    }
}

/// Solve dρ = ½(ρL + Lρ) in the eigenbasis of ρ: L_ij = 2 dρ_ij/(λᵢ+λⱼ).
pub fn solve_sld(rho: &DensityMatrix, drho: &TangentVector) -> Result<Sld> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: drho.dim() });
    }
    rho.require_interior()?;
    let (vals, vecs) = eig_hermitian(rho.entries())?;
    let d_eig = vecs.adjoint() * drho.entries() * &vecs;
    let n = rho.dim();
    let mut l_eig = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l_eig[(i, j)] = d_eig[(i, j)].scale(2.0 / (vals[i] + vals[j]));
        }
    }
    Ok(Sld { l: &vecs * l_eig * vecs.adjoint() })
}

/// Classical Fisher-Rao quadratic form Σ dPᵢ²/pᵢ for a displacement dP of a
/// distribution P. Requires strictly positive probabilities and Σ dPᵢ = 0.
pub fn fisher_rao(p: &ProbabilityDistribution, dp: &[f64]) -> Result<f64> {
    if p.len() != dp.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: dp.len() });
    }
    let sum: f64 = dp.iter().sum();
    if sum.abs() > 1e-10 {
        return Err(Error::parameter("dp", format!("components sum to {sum:.3e}, expected 0")));
    }
    let mut g = 0.0;
    for (&pi, &di) in p.probabilities().iter().zip(dp) {
        if pi <= 0.0 {
            return Err(Error::InvalidDistribution {
                reason: "zero probability component in Fisher-Rao form".into(),
            });
        }
        g += di * di / pi;
    }
    Ok(g)
}

/// Fisher-Rao form of the outcome statistics of basis `b`:
/// pᵢ = ⟨bᵢ|ρ|bᵢ⟩, dpᵢ = ⟨bᵢ|dρ|bᵢ⟩. Maximized over bases by the
/// eigenbasis of the SLD, where it reaches `bh_metric`.
pub fn measured_fisher(
    rho: &DensityMatrix,
    drho: &TangentVector,
    b: &MeasurementBasis,
) -> Result<f64> {
    if b.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: b.dim() });
    }
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: drho.dim() });
    }
    let p = ProbabilityDistribution::new(b.outcome_probabilities(rho))?;
    let mut dp = Vec::with_capacity(b.dim());
    for k in 0..b.dim() {
        let v = b.vector(k);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..b.dim() {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..b.dim() {
                row += drho.entries()[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        dp.push(acc.re);
    }
    fisher_rao(&p, &dp)
}

/// Bures–Helstrom quadratic form g(dρ, dρ) = Tr[ρLL]. No extra ¼: the
/// normalization is fixed so the qubit radial component is exactly
/// dr²/(1−r²).
pub fn bh_metric(rho: &DensityMatrix, drho: &TangentVector) -> Result<f64> {
    let l = solve_sld(rho, drho)?.l;
    let m = rho.entries() * &l * &l;
    Ok(m.trace().re)
}

/// Closed qubit BH form at a point on the equatorial plane (sin θ = 1, which
/// any point reaches by spherical symmetry):
/// ds² = dr²/(1−r²) + r²(dθ² + dφ²).
pub fn bh_qubit_polar(r: f64, dr: f64, dtheta: f64, dphi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::parameter("r", format!("radius {r} outside [0, 1)")));
    }
    Ok(dr * dr / (1.0 - r * r) + r * r * (dtheta * dtheta + dphi * dphi))
}

/// C(r) = 1/(1−r²): shared radial coefficient of the BH and BKM forms.
pub(crate) fn bkm_c(r: f64) -> f64 {
    1.0 / (1.0 - r * r)
}

/// D(r) = (1/2r)·log((1+r)/(1−r)), the BKM angular coefficient, with the
/// limit D(0) = 1. Evaluated via ln_1p for accuracy at small r.
pub(crate) fn bkm_d(r: f64) -> f64 {
    if r < 1e-15 {
        return 1.0;
    }
    ((r.ln_1p() - (-r).ln_1p()) / (2.0 * r)).max(1.0)
}

/// BKM quadratic form on a qubit in Bloch coordinates:
/// g_ij = C(r)·xᵢxⱼ/r² + D(r)·(δ_ij − xᵢxⱼ/r²), with g = δ at the origin.
pub fn bkm_qubit(x: &BlochVector, dx: &Vector3<f64>) -> Result<f64> {
    let v = x.coords();
    let r = v.norm();
    if r >= 1.0 {
        return Err(Error::parameter("x", format!("requires |x| < 1, got {r}")));
    }
    if r < 1e-15 {
        return Ok(dx.norm_squared());
    }
    let radial = v.dot(dx) / r;
    let radial_sq = radial * radial;
    Ok(bkm_c(r) * radial_sq + bkm_d(r) * (dx.norm_squared() - radial_sq))
}

/// Coordinate chart for quadratic forms on the qubit state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Bloch coordinates (x, y, z).
    Bloch,
    /// Spherical coordinates (r, θ, φ) with θ the polar angle from z.
    Polar,
}

/// A symmetric quadratic form over a labelled coordinate chart.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    g: Matrix3<f64>,
    chart: Chart,
}

impl QuadraticForm {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.g
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn evaluate(&self, d: &Vector3<f64>) -> f64 {
        (d.transpose() * self.g * d)[(0, 0)]
    }
}

fn polar_of(v: &Vector3<f64>) -> Vector3<f64> {
    let r = v.norm();
    Vector3::new(r, (v.z / r).acos(), v.y.atan2(v.x))
}

fn bloch_of_polar(p: &Vector3<f64>) -> Vector3<f64> {
    let (r, theta, phi) = (p.x, p.y, p.z);
    Vector3::new(
        r * theta.sin() * phi.cos(),
        r * theta.sin() * phi.sin(),
        r * theta.cos(),
    )
}

/// Central finite-difference Hessian of λ ↦ S(ρ ‖ ρ(λ)) at the base point,
/// with one Richardson extrapolation level and mixed-partial symmetrization.
/// This is the numeric route to the BKM metric; `bkm_qubit` is its closed
/// form in the Bloch chart.
pub fn bkm_hessian_numeric(rho: &DensityMatrix, chart: Chart, h: f64) -> Result<QuadraticForm> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.dim() });
    }
    rho.require_interior()?;
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::parameter("h", format!("step {h:.3e} outside [1e-6, 1e-3]")));
    }
    let x0 = density_to_bloch(rho)?.coords();
    let r = x0.norm();

    // Keep the widest stencil point (radius ≤ r + 2h) strictly interior;
    // near the boundary shrink the step, and give up if that pushes it
    // below the resolvable range.
    let mut h_eff = h;
    let margin = 1.0 - 2.0 * EPS_INTERIOR - 1e-10;
    if r + 2.0 * h_eff > margin {
        h_eff = (margin - r) / 2.0;
        if h_eff < 1e-7 {
            return Err(Error::parameter(
                "h",
                format!("stencil cannot stay inside state space at r = {r}"),
            ));
        }
    }

    let lambda0 = match chart {
        Chart::Bloch => x0,
        Chart::Polar => {
            if r < 10.0 * h_eff {
                return Err(Error::parameter(
                    "chart",
                    "polar chart is singular at the origin; use the Bloch chart",
                ));
            }
            let p = polar_of(&x0);
            if p.y.sin() < 10.0 * h_eff {
                return Err(Error::parameter(
                    "chart",
                    "polar chart is singular on the z-axis; use the Bloch chart",
                ));
            }
            p
        }
    };

    let s = |lambda: Vector3<f64>| -> Result<f64> {
        let x = match chart {
            Chart::Bloch => lambda,
            Chart::Polar => bloch_of_polar(&lambda),
        };
        let sigma = bloch_to_density(&BlochVector::new(x.x, x.y, x.z)?);
        umegaki_entropy(rho, &sigma)
    };

    let hessian_at = |step: f64| -> Result<Matrix3<f64>> {
        let mut m = Matrix3::zeros();
        let s0 = s(lambda0)?;
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = step;
            let plus = s(lambda0 + e)?;
            let minus = s(lambda0 - e)?;
            m[(i, i)] = (plus - 2.0 * s0 + minus) / (step * step);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mut ei = Vector3::zeros();
                let mut ej = Vector3::zeros();
                ei[i] = step;
                ej[j] = step;
                let pp = s(lambda0 + ei + ej)?;
                let pm = s(lambda0 + ei - ej)?;
                let mp = s(lambda0 - ei + ej)?;
                let mm = s(lambda0 - ei - ej)?;
                let v = (pp - pm - mp + mm) / (4.0 * step * step);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    };

    let coarse = hessian_at(h_eff)?;
    let fine = hessian_at(h_eff / 2.0)?;
    let extrapolated = (fine * 4.0 - coarse) / 3.0;
    let g = (extrapolated + extrapolated.transpose()) * 0.5;
    Ok(QuadraticForm { g, chart })
}

/// Both sides of the additivity identity g(ρ^{⊗N}) = N·g(ρ) for product
/// tangents: returns ((1/N)·BH on the N-copy block, BH on one copy).
pub fn bh_additivity_check(
    rho: &DensityMatrix,
    drho: &TangentVector,
    n: usize,
) -> Result<(f64, f64)> {
    if !(1..=3).contains(&n) {
        return Err(Error::parameter("n", format!("copy count {n} not in 1..=3")));
    }
    let block = crate::qstate::tensor_power(rho, n)?;
    let dblock = crate::qstate::product_tangent(rho, drho, n)?;
    let lhs = bh_metric(&block, &dblock)? / n as f64;
    let rhs = bh_metric(rho, drho)?;
    Ok((lhs, rhs))
}

/// Cramér–Rao bound on the variance of an unbiased estimator along a tangent
/// direction v: V ≥ 1/g(v,v). A larger metric value means a less stringent
/// (smaller) bound.
pub fn cramer_rao_bound(g_vv: f64) -> Result<f64> {
    if g_vv <= 0.0 {
        return Err(Error::parameter("g_vv", format!("requires a positive form value, got {g_vv}")));
    }
    Ok(1.0 / g_vv)
}

/// Unit-cost ellipse {v : g(v,v) = ε²} of both metrics at one point of a
/// planar slice of the Bloch ball. Semi-axes are along the radial/tangential
/// principal directions in polar (dr, dθ) coordinates; at the origin, where
/// the polar chart degenerates, they are Cartesian and the ellipses are
/// circles of radius ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    /// In-plane Cartesian center (x, z).
    pub center: (f64, f64),
    /// (radial, tangential) BH semi-axes ε/√g.
    pub bh_semi_axes: (f64, f64),
    /// (radial, tangential) BKM semi-axes ε/√g.
    pub bkm_semi_axes: (f64, f64),
}

/// Evaluate BH and BKM cost ellipses at each in-plane point. Points must lie
/// strictly inside the unit disk. The BKM ellipse is contained in the BH
/// ellipse everywhere, with the radial semi-axes exactly equal.
pub fn ellipse_field(points: &[(f64, f64)], epsilon: f64) -> Result<Vec<Ellipse>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::parameter("epsilon", format!("requires ε > 0, got {epsilon}")));
    }
    let mut out = Vec::with_capacity(points.len());
    for &(x, z) in points {
        let r = (x * x + z * z).sqrt();
        if r >= 1.0 {
            return Err(Error::parameter(
                "grid",
                format!("point ({x}, {z}) lies outside the unit disk (r = {r})"),
            ));
        }
        if r < 1e-15 {
            out.push(Ellipse {
                center: (x, z),
                bh_semi_axes: (epsilon, epsilon),
                bkm_semi_axes: (epsilon, epsilon),
            });
            continue;
        }
        let radial = epsilon / bkm_c(r).sqrt();
        let f_angular = r * r * bkm_d(r);
        out.push(Ellipse {
            center: (x, z),
            bh_semi_axes: (radial, epsilon / r),
            bkm_semi_axes: (radial, epsilon / f_angular.sqrt()),
        });
    }
    Ok(out)
}
