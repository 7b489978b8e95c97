//! The truncated Benjamin-Ono vector field u_t = -Hu_xx + S_N(S_N u · S_N u_x),
//! integrating-factor RK4 time stepping, and the conservation/Liouville
//! diagnostics of the finite-dimensional Hamiltonian structure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    quadrature_integral, CutoffProfile, FourierState, ProductPolicy, Spectrum, Truncation, TWO_PI,
};

/// Time-integration setup. The scheme is integrating-factor RK4: the linear
/// phase e^{-i|n|n t} is applied exactly, RK4 handles the nonlinearity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub trunc: Truncation,
    pub n_max: usize,
    pub psi: CutoffProfile,
    /// Test hook: suppress the nonlinearity so a step is the exact phase.
    #[serde(default)]
    pub linear_only: bool,
}

pub const SCHEME_TAG: &str = "ifrk4";

impl IntegratorConfig {
    pub fn new(dt: f64, trunc: Truncation, n_max: usize) -> Result<Self> {
        let cfg = IntegratorConfig {
            dt,
            trunc,
            n_max,
            psi: CutoffProfile::standard(),
            linear_only: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if let Truncation::Finite(n) = self.trunc {
            if self.n_max < n {
                return Err(Error::InvalidConfig(format!(
                    "n_max = {} below truncation N = {n}",
                    self.n_max
                )));
            }
        }
        Ok(())
    }
}

/// Right-hand side of the truncated equation: -Hu_xx + S_N(S_N u · S_N u_x).
///
/// For finite N the product is S_N-filtered, so the result fits whenever
/// n_max >= ⌈3N/4⌉; resolutions below that are rejected. For N = ∞ the
/// product is projected onto the state's resolution (Galerkin truncation).
pub fn vector_field(u: &FourierState, trunc: Truncation, psi: &CutoffProfile) -> Result<FourierState> {
    if let Truncation::Finite(n) = trunc {
        let needed = (3 * n).div_ceil(4);
        if u.n_max() < needed {
            return Err(Error::ResolutionOverflow { needed, have: u.n_max() });
        }
    }
    let linear = linear_part(u);
    let su = u.smooth_truncation(trunc, psi);
    let sux = u.dx().smooth_truncation(trunc, psi);
    let prod = su.multiply(&sux, u.n_max(), ProductPolicy::Truncate)?;
    let filtered = prod.smooth_truncation(trunc, psi);
    // u·u_x is a perfect derivative: the mean vanishes identically, so the
    // symmetrization only clears roundoff.
    let nonlinear = FourierState::symmetrized(&filtered);
    Ok(linear.add(&nonlinear))
}

/// -Hu_xx alone: coefficientwise -i|n|n·û_n.
fn linear_part(u: &FourierState) -> FourierState {
    FourierState::symmetrized(
        &u.map_modes(|n, c| Complex64::new(0.0, -((n.unsigned_abs() as i64 * n) as f64)) * c),
    )
}

/// Exact one-step phase of the linear flow: e^{-i|n|n h}.
fn linear_phase(n_max: usize, h: f64) -> Vec<Complex64> {
    (-(n_max as i64)..=n_max as i64)
        .map(|n| {
            let omega = (n.unsigned_abs() as i128 * n as i128) as f64;
            Complex64::from_polar(1.0, -omega * h)
        })
        .collect()
}

fn apply_phase(u: &Spectrum, phase: &[Complex64]) -> Spectrum {
    let n_max = u.n_max() as i64;
    u.map_modes(|n, c| phase[(n + n_max) as usize] * c)
}

/// Precomputed phases for repeated stepping at a fixed (dt, n_max). The step
/// size is signed: negative h runs the reversed flow.
pub struct Stepper {
    cfg: IntegratorConfig,
    h: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
}

impl Stepper {
    pub fn new(cfg: IntegratorConfig) -> Result<Self> {
        let h = cfg.dt;
        Self::with_signed_step(cfg, h)
    }

    pub fn with_signed_step(cfg: IntegratorConfig, h: f64) -> Result<Self> {
        cfg.validate()?;
        let half = linear_phase(cfg.n_max, h / 2.0);
        let full = linear_phase(cfg.n_max, h);
        Ok(Stepper { cfg, h, half, full })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// One IFRK4 step of size h (t is only used for blow-up reporting).
    pub fn step(&self, u: &FourierState, t: f64) -> Result<FourierState> {
        let cfg = &self.cfg;
        let v = u.resized(cfg.n_max);
        if cfg.linear_only {
            return Ok(FourierState::symmetrized(&apply_phase(&v, &self.full)));
        }
        let h = self.h;
        let nl = |w: &FourierState| -> Result<Spectrum> {
            let su = w.smooth_truncation(cfg.trunc, &cfg.psi);
            let sux = w.dx().smooth_truncation(cfg.trunc, &cfg.psi);
            let prod = su.multiply(&sux, cfg.n_max, ProductPolicy::Truncate)?;
            Ok(FourierState::symmetrized(&prod.smooth_truncation(cfg.trunc, &cfg.psi)).into_spectrum())
        };
        // RK4 in the rotating frame a(τ) = e^{-Lτ}û(t₀+τ); the linear phase is exact.
        let wrap = |s: Spectrum| FourierState::symmetrized(&s);
        let a1 = nl(&v)?;
        let s2 = apply_phase(&(v.spectrum() + &(h / 2.0 * &a1)), &self.half);
        let a2 = apply_phase(&nl(&wrap(s2))?, &inverse(&self.half));
        let s3 = apply_phase(&(v.spectrum() + &(h / 2.0 * &a2)), &self.half);
        let a3 = apply_phase(&nl(&wrap(s3))?, &inverse(&self.half));
        let s4 = apply_phase(&(v.spectrum() + &(h * &a3)), &self.full);
        let a4 = apply_phase(&nl(&wrap(s4))?, &inverse(&self.full));
        let mut incr = &a1 + &(2.0 * &a2);
        incr = &incr + &(2.0 * &a3);
        incr = &incr + &a4;
        let a_end = v.spectrum() + &((h / 6.0) * &incr);
        let out = FourierState::symmetrized(&apply_phase(&a_end, &self.full));
        if !out.is_finite() {
            return Err(Error::Blowup { t: t + h, last_finite: Box::new(v) });
        }
        Ok(out)
    }
}

fn inverse(phase: &[Complex64]) -> Vec<Complex64> {
    phase.iter().map(|p| p.conj()).collect()
}

/// One IFRK4 step with a throwaway phase table.
pub fn step_ifrk4(u: &FourierState, cfg: &IntegratorConfig) -> Result<FourierState> {
    Stepper::new(cfg.clone())?.step(u, 0.0)
}

/// Advance u by time t (either sign) without recording intermediate states.
/// The horizon splits into equal steps of size <= cfg.dt.
pub fn evolve_to(u0: &FourierState, t: f64, cfg: &IntegratorConfig) -> Result<FourierState> {
    if t == 0.0 {
        return Ok(u0.resized(cfg.n_max));
    }
    let steps = (t.abs() / cfg.dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let stepper = Stepper::with_signed_step(cfg.clone(), h)?;
    let mut u = u0.resized(cfg.n_max);
    for k in 0..steps {
        u = stepper.step(&u, k as f64 * h)?;
    }
    Ok(u)
}

/// Time series of states plus conserved-quantity diagnostics along a flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<FourierState>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    /// Max |û_n| beyond the truncation N at each recorded time.
    pub leak: Vec<f64>,
}

impl TrajectoryRecord {
    /// CSV with columns t, mass, energy, leak [, re_n/im_n ...].
    pub fn to_csv(&self, include_coeffs: bool) -> String {
        let mut out = String::from("t,mass,energy,leak");
        if include_coeffs {
            if let Some(first) = self.states.first() {
                for n in -(first.n_max() as i64)..=first.n_max() as i64 {
                    out += &format!(",re_{n},im_{n}");
                }
            }
        }
        out.push('\n');
        for i in 0..self.times.len() {
            out += &format!(
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[i], self.mass[i], self.energy[i], self.leak[i]
            );
            if include_coeffs {
                for (_, c) in self.states[i].modes() {
                    out += &format!(",{:.17e},{:.17e}", c.re, c.im);
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn final_state(&self) -> &FourierState {
        self.states.last().expect("trajectory never empty")
    }

    /// Max relative drift of a recorded scalar from its initial value.
    pub fn relative_drift(series: &[f64]) -> f64 {
        let s0 = series[0];
        let scale = s0.abs().max(f64::MIN_POSITIVE);
        series.iter().map(|s| (s - s0).abs() / scale).fold(0.0, f64::max)
    }
}

/// The time-t solution map with per-step diagnostics.
pub fn flow(u0: &FourierState, t: f64, cfg: &IntegratorConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let steps = if t == 0.0 { 0 } else { (t.abs() / cfg.dt).ceil().max(1.0) as usize };
    let dt_signed = if steps == 0 { cfg.dt } else { t / steps as f64 };
    let stepper = Stepper::with_signed_step(cfg.clone(), dt_signed)?;
    let mut u = u0.resized(cfg.n_max);
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        mass: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        leak: Vec::with_capacity(steps + 1),
    };
    let observe = |rec: &mut TrajectoryRecord, time: f64, u: &FourierState| {
        rec.times.push(time);
        rec.mass.push(mass(u));
        rec.energy.push(hamiltonian(u, cfg.trunc, &cfg.psi));
        rec.leak.push(match cfg.trunc {
            Truncation::Finite(n) => u.max_beyond(n),
            Truncation::Infinite => 0.0,
        });
        rec.states.push(u.clone());
    };
    observe(&mut rec, 0.0, &u);
    for k in 0..steps {
        u = stepper.step(&u, k as f64 * dt_signed)?;
        observe(&mut rec, (k + 1) as f64 * dt_signed, &u);
    }
    Ok(rec)
}

/// L² mass 2π Σ |û_n|².
pub fn mass(u: &FourierState) -> f64 {
    TWO_PI * u.modes().map(|(_, c)| c.norm_sqr()).sum::<f64>()
}

/// Truncated energy E_N[u] = ∫ (1/2)|∂_x^{1/2}u|² - (1/6)(S_N u)³.
///
/// The quadratic term is π Σ |n||û_n|²; the cubic term is evaluated by
/// alias-free quadrature (the grid resolves the full cubic degree).
pub fn hamiltonian(u: &FourierState, trunc: Truncation, psi: &CutoffProfile) -> f64 {
    let quad: f64 =
        std::f64::consts::PI * u.modes().map(|(n, c)| n.unsigned_abs() as f64 * c.norm_sqr()).sum::<f64>();
    let su = u.smooth_truncation(trunc, psi);
    let grid = (3 * su.n_max() + 1).max(8).next_power_of_two();
    let vals = su.spectrum().grid_values(grid);
    let cubic: Vec<Complex64> = vals.iter().map(|v| v * v * v).collect();
    let integral = quadrature_integral(&cubic);
    quad - integral.re / 6.0
}

/// Symplectic pairing ω(u, v) = ∫ u · ∂_x^{-1}v = 2π Σ_{n≠0} (i/n) û_n conj(v̂_n).
pub fn symplectic_pairing(u: &FourierState, v: &FourierState) -> f64 {
    let sum: Complex64 = u
        .modes()
        .filter(|&(n, _)| n != 0)
        .map(|(n, c)| Complex64::new(0.0, 1.0 / n as f64) * c * v.get(n).conj())
        .sum();
    TWO_PI * sum.re
}

/// Normalized divergence of the truncated vector field on 𝒱_N ≅ ℝ^{2N}:
/// |trace J| / (‖J‖_F + 1), J computed by central differences with offset h.
///
/// Liouville's theorem makes the exact trace zero; the returned value is the
/// finite-difference + roundoff residue.
pub fn divergence_check(u: &FourierState, trunc: Truncation, psi: &CutoffProfile, h: f64) -> Result<f64> {
    let n = trunc
        .finite()
        .ok_or_else(|| Error::InvalidConfig("divergence check needs a finite truncation".into()))?;
    if u.max_beyond(n) > 0.0 {
        return Err(Error::InvalidConfig("state must be supported in |n| <= N".into()));
    }
    let dim = 2 * n;
    let base = u.resized(n);
    let field = |v: &FourierState| -> Result<Vec<f64>> {
        let f = vector_field(v, trunc, psi)?;
        let mut out = Vec::with_capacity(dim);
        for k in 1..=n as i64 {
            let c = f.get(k);
            out.push(c.re);
            out.push(c.im);
        }
        Ok(out)
    };
    let perturbed = |j: usize, delta: f64| -> FourierState {
        let k = (j / 2 + 1) as i64;
        let mut s = base.spectrum().clone();
        let mut c = s.get(k);
        if j % 2 == 0 {
            c.re += delta;
        } else {
            c.im += delta;
        }
        s.set(k, c);
        s.set(-k, c.conj());
        FourierState::try_new(s).expect("perturbation preserves symmetry")
    };
    let mut trace = 0.0;
    let mut frob_sq = 0.0;
    for j in 0..dim {
        let fp = field(&perturbed(j, h))?;
        let fm = field(&perturbed(j, -h))?;
        for i in 0..dim {
            let entry = (fp[i] - fm[i]) / (2.0 * h);
            frob_sq += entry * entry;
            if i == j {
                trace += entry;
            }
        }
    }
    Ok(trace.abs() / (frob_sq.sqrt() + 1.0))
}
