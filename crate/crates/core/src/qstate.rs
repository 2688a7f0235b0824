//! States, Bloch vectors, and tangent directions.
//!
//! A qubit state is written ρ = (I + x·σ)/2 with |x| ≤ 1, and a direction of
//! change dρ = dx·σ/2 is a traceless Hermitian matrix. Multi-qubit blocks are
//! built from these with Kronecker products. Everything downstream (entropies,
//! metrics, geodesics) consumes the validated types defined here.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
/// Dense complex matrix; the working representation for states, tangents,
/// unitaries, and measurement bases.
pub type CMatrix = DMatrix<C64>;

/// States with an eigenvalue below this are treated as boundary states and
/// rejected by logarithm-based quantities (relative entropies, BKM/BH forms).
pub const EPS_INTERIOR: f64 = 1e-9;

/// Largest supported Hilbert-space dimension (12 qubits).
pub const DIM_CAP: usize = 1 << 12;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-12;

fn max_antihermitian_dev(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, columns of
/// the second return value are the matching orthonormal eigenvectors.
pub fn eig_hermitian(m: &CMatrix) -> Result<(DVector<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let dev = max_antihermitian_dev(m);
    if dev > 1e-10 {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    // Symmetrize to kill roundoff-level asymmetry before factorizing.
    let h = (m + m.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let mut vecs = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix. Tolerances: hermiticity and trace to
    /// 1e-12, eigenvalues allowed down to -1e-12 to absorb roundoff.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if entries.nrows() > DIM_CAP {
            return Err(Error::DimensionTooLarge { requested: entries.nrows(), cap: DIM_CAP });
        }
        let dev = max_antihermitian_dev(&entries);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_dev: dev });
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace { trace: tr.re });
        }
        let entries = (&entries + entries.adjoint()).scale(0.5);
        let (vals, _) = eig_hermitian(&entries)?;
        let min_eigenvalue = vals[0];
        if min_eigenvalue < PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix { entries, min_eigenvalue })
    }

    /// Rank-one state |ψ⟩⟨ψ| from a state vector (normalized internally).
    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(Error::parameter("psi", "state vector has zero norm"));
        }
        let v = psi.unscale(norm);
        let mut m = CMatrix::zeros(v.len(), v.len());
        for i in 0..v.len() {
            for j in 0..v.len() {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        DensityMatrix::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if dim > DIM_CAP {
            return Err(Error::DimensionTooLarge { requested: dim, cap: DIM_CAP });
        }
        let m = CMatrix::identity(dim, dim).unscale(dim as f64);
        DensityMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> DVector<f64> {
        eig_hermitian(&self.entries).expect("validated state stays Hermitian").0
    }

    /// True when every eigenvalue is at least `EPS_INTERIOR`, i.e. the state
    /// is far enough from the boundary for logarithms to be taken safely.
    pub fn is_interior(&self) -> bool {
        self.min_eigenvalue >= EPS_INTERIOR
    }

    pub fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::BoundaryState {
                min_eigenvalue: self.min_eigenvalue,
                required: EPS_INTERIOR,
            })
        }
    }
}

/// A point of the Bloch ball, |x| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::parameter("bloch", "components must be finite"));
        }
        let norm = v.norm();
        if norm > 1.0 + 1e-12 {
            return Err(Error::BlochOutsideBall { norm });
        }
        Ok(BlochVector(v))
    }

    pub fn coords(&self) -> Vector3<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// A direction of change of a state: Hermitian and traceless.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    entries: CMatrix,
}

impl TangentVector {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let dev = max_antihermitian_dev(&entries);
        if dev > HERMITICITY_TOL {
            return Err(Error::InvalidTangent {
                reason: format!("not Hermitian (max deviation {dev:.3e})"),
            });
        }
        let tr = entries.trace();
        if tr.norm() > TRACE_TOL {
            return Err(Error::InvalidTangent {
                reason: format!("trace {:.3e} is not zero", tr.norm()),
            });
        }
        let entries = (&entries + entries.adjoint()).scale(0.5);
        Ok(TangentVector { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// The Pauli matrices (σx, σy, σz).
pub fn pauli() -> [CMatrix; 3] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// ρ = (I + x·σ)/2.
pub fn bloch_to_density(x: &BlochVector) -> DensityMatrix {
    let v = x.coords();
    let [sx, sy, sz] = pauli();
    let m = (CMatrix::identity(2, 2) + sx.scale(v.x) + sy.scale(v.y) + sz.scale(v.z)).scale(0.5);
    DensityMatrix::new(m).expect("Bloch ball point is a valid state")
}

/// Recover x_k = Tr[ρ σ_k] from a qubit state.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: rho.dim() });
    }
    let m = rho.entries();
    let x = 2.0 * m[(0, 1)].re;
    let y = -2.0 * m[(0, 1)].im;
    let z = (m[(0, 0)] - m[(1, 1)]).re;
    // Roundoff can push a boundary state's norm just above 1; rescale instead
    // of rejecting a matrix that already passed positivity checks.
    let norm = (x * x + y * y + z * z).sqrt();
    if norm > 1.0 && norm <= 1.0 + 1e-9 {
        return BlochVector::new(x / norm, y / norm, z / norm);
    }
    BlochVector::new(x, y, z)
}

/// The tangent matrix dx·σ/2 matching a displacement dx of the Bloch vector.
pub fn bloch_tangent(dx: &Vector3<f64>) -> TangentVector {
    let [sx, sy, sz] = pauli();
    let m = (sx.scale(dx.x) + sy.scale(dx.y) + sz.scale(dx.z)).scale(0.5);
    TangentVector::new(m).expect("dx·σ/2 is Hermitian and traceless")
}

/// ρ^{⊗n}.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::parameter("n", "tensor power requires n >= 1"));
    }
    let total_dim = rho
        .dim()
        .checked_pow(n as u32)
        .filter(|&d| d <= DIM_CAP)
        .ok_or(Error::DimensionTooLarge { requested: usize::MAX, cap: DIM_CAP })
        .map_err(|_| Error::DimensionTooLarge {
            requested: rho.dim().saturating_pow(n as u32),
            cap: DIM_CAP,
        })?;
    let mut out = rho.entries().clone();
    for _ in 1..n {
        out = out.kronecker(rho.entries());
    }
    debug_assert_eq!(out.nrows(), total_dim);
    DensityMatrix::new(out)
}

/// Product-rule tangent on ρ^{⊗n}: Σ_k ρ ⊗ … ⊗ dρ_(k) ⊗ … ⊗ ρ.
pub fn product_tangent(rho: &DensityMatrix, drho: &TangentVector, n: usize) -> Result<TangentVector> {
    if n == 0 {
        return Err(Error::parameter("n", "product tangent requires n >= 1"));
    }
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: drho.dim() });
    }
    let dim = rho
        .dim()
        .checked_pow(n as u32)
        .filter(|&d| d <= DIM_CAP)
        .ok_or(Error::DimensionTooLarge { requested: usize::MAX, cap: DIM_CAP })
        .map_err(|_| Error::DimensionTooLarge {
            requested: rho.dim().saturating_pow(n as u32),
            cap: DIM_CAP,
        })?;
    let mut total = CMatrix::zeros(dim, dim);
    for k in 0..n {
        let mut term = if k == 0 { drho.entries().clone() } else { rho.entries().clone() };
        for slot in 1..n {
            let factor = if slot == k { drho.entries() } else { rho.entries() };
            term = term.kronecker(factor);
        }
        total += term;
    }
    TangentVector::new(total)
}

/// log ρ through the eigenbasis. Defined only for interior states.
pub fn matrix_log(rho: &DensityMatrix) -> Result<CMatrix> {
    rho.require_interior()?;
    let (vals, vecs) = eig_hermitian(rho.entries())?;
    let mut diag = CMatrix::zeros(rho.dim(), rho.dim());
    for i in 0..rho.dim() {
        diag[(i, i)] = C64::new(vals[i].ln(), 0.0);
    }
    Ok(&vecs * diag * vecs.adjoint())
}
