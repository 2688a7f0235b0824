//! Distinguishability geometry of qubit states.
//!
//! Numerical toolkit for the information geometry of quantum state
//! discrimination: classical and quantum (Umegaki) relative entropies,
//! measured relative entropies under projective bases, the Bures–Helstrom
//! and BKM metrics with their Cramér–Rao bounds, Monte-Carlo optimization of
//! entangled measurement bases over multi-copy blocks, BKM geodesics and
//! scalar curvature, and a sampling-level simulation of a Heisenberg-pulse
//! discrimination protocol.
//!
//! The central objects are qubit density matrices ρ = (1 + x⃗·σ⃗)/2 described
//! by Bloch vectors x⃗, and pairs (ρ₁, ρ₂) to be distinguished. The library
//! quantifies how fast repeated measurements tell them apart — per copy for
//! product measurements, per qubit for entangled block measurements — and
//! the Riemannian geometry that governs those rates in the infinitesimal
//! limit.

pub mod basisopt;
pub mod entropy;
pub mod error;
pub mod expsim;
pub mod geometry;
pub mod metrics;
pub mod qstate;

pub use basisopt::{
    bell_mixed_basis, canonicalize, mc_optimize, optimize_beta, random_orthogonal_step,
    single_qubit_basis, two_qubit_bell_strategy, BetaOptimum, CanonicalPair, McConfig, McResult,
    MeasurementBasis,
};
pub use entropy::{
    kl_divergence, log_likelihood_rate, measured_entropy, planar_pair, qubit_measured_entropy,
    umegaki_entropy, ProbabilityDistribution,
};
pub use error::{Error, Result};
pub use expsim::{
    benchmark_entangler, heisenberg_unitary, run_discrimination, sample_measurement, sqrt_swap,
    DiscriminationReport, Entangler, PulseSchedule, PulseSegment, StateLabel, Strategy,
    TrialRecord,
};
pub use geometry::{
    bkm_curvature, bkm_distance, f_alpha, geodesic_bvp, geodesic_ivp, shooting_miss_profile,
    GeodesicPath, PathSample, BOUNDARY_GUARD_R,
};
pub use metrics::{
    bh_additivity_check, bh_metric, bh_qubit_polar, bkm_hessian_numeric, bkm_qubit,
    cramer_rao_bound, ellipse_field, fisher_rao, measured_fisher, solve_sld, Chart, Ellipse,
    QuadraticForm, Sld,
};
pub use qstate::{
    bloch_tangent, bloch_to_density, density_to_bloch, eig_hermitian, matrix_log, pauli,
    product_tangent, tensor_power, BlochVector, DensityMatrix, TangentVector, C64, CMatrix,
    DIM_CAP, EPS_INTERIOR,
};
