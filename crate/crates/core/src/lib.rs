//! A pseudospectral laboratory for finite truncations of the periodic
//! Benjamin-Ono equation u_t + Hu_xx = uu_x on the 2π torus.
//!
//! The crate simulates the smoothly truncated Hamiltonian flow, samples the
//! Wiener/Gibbs ensembles attached to it, applies the gauge transform
//! w = P₊(e^{-iP/2}u), and verifies the structural facts the construction
//! rests on: conservation laws, Liouville volume preservation, finite-N
//! measure invariance, the operator identities behind the gauge transform,
//! the exact cancellation of the resonant coefficient polynomials, and the
//! counting bounds (Eisenstein norm representations, constrained frequency
//! quadruples, factorial composition sums).
//!
//! Everything numerical fixes the Plancherel convention
//! ∫|u|²dx = 2π Σ|û_n|²; the exact-arithmetic modules use big rationals and
//! never touch floating point.

pub mod counting;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod gibbs;
pub mod params;
pub mod report;
pub mod resonant;
pub mod spectral;
pub mod stats;

pub use counting::{
    eisenstein_count, eisenstein_count_boxed, quadruple_count, snk, snk_bound_check, snk_prime,
    CountReport, QuadrupleQuery,
};
pub use dynamics::{
    divergence_check, evolve_to, flow, hamiltonian, mass, step_ifrk4, symplectic_pairing,
    vector_field, IntegratorConfig, Stepper, TrajectoryRecord,
};
pub use error::{Error, Result};
pub use gauge::{
    commutator_identity_check, exp_series_discrepancy, g_identity_residual,
    gauge_evolution_residual, gauge_v, gauge_w, op_m, op_p, op_q, GaugeConfig, GaugeWorkspace,
    MSeries,
};
pub use gibbs::{
    alpha, build_ensemble, gaussian_moment_check, gibbs_weight, invariance_experiment,
    quartic_tail_check, sample_rng, weighted_expectation, wiener_state, z1_tail_curve,
    GibbsEnsemble, Observable, WeightVariant, ZetaProfile,
};
pub use params::{parameter_set, ParameterSet};
pub use report::{CheckLine, ExperimentReport, RunManifest};
pub use resonant::{resonant_coefficient, verify_cancellation, Family, ThetaPolynomial};
pub use spectral::{
    z1_norm, z1_norm_bracket, CutoffProfile, FourierState, ProductPolicy, Selector, Spectrum,
    Truncation,
};
