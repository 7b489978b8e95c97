//! Fourier-side representation of functions on the torus T = R/2πZ and the
//! multiplier/product operators everything else is built from.
//!
//! Conventions, fixed repo-wide:
//!   u(x) = Σ_n û_n e^{inx},   ∫_T |u|² dx = 2π Σ_n |û_n|²  (Plancherel),
//! and real-valued mean-zero data satisfies û_{-n} = conj(û_n), û_0 = 0.

use std::cell::RefCell;
use std::ops::{Add, Deref, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterSet;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A complex coefficient vector on frequencies |n| <= n_max.
///
/// No symmetry is imposed: gauge-transformed objects (w, v, G) are genuinely
/// complex. [`FourierState`] wraps this with the real/mean-zero invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    n_max: usize,
    /// Coefficients in natural order: index i holds frequency n = i - n_max.
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(n_max: usize) -> Self {
        Spectrum { n_max, coeffs: vec![Complex64::new(0.0, 0.0); 2 * n_max + 1] }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.n_max as i64) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, n: i64, value: Complex64) {
        assert!(
            n.unsigned_abs() as usize <= self.n_max,
            "frequency {n} outside resolution {}",
            self.n_max
        );
        self.coeffs[(n + self.n_max as i64) as usize] = value;
    }

    /// Iterate over (n, coefficient) pairs.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_max = self.n_max as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n_max, c))
    }

    /// New spectrum with coefficient at n replaced by f(n, û_n).
    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Spectrum {
        let n_max = self.n_max as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i as i64 - n_max, c))
            .collect();
        Spectrum { n_max: self.n_max, coeffs }
    }

    /// Copy into a different resolution (pad with zeros or drop outer modes).
    pub fn resized(&self, n_max: usize) -> Spectrum {
        let mut out = Spectrum::zeros(n_max);
        let keep = self.n_max.min(n_max) as i64;
        for n in -keep..=keep {
            out.set(n, self.get(n));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Multiplier -i·sgn(n), with sgn(0) = 0.
    pub fn hilbert(&self) -> Spectrum {
        self.map_modes(|n, c| Complex64::new(0.0, -(n.signum() as f64)) * c)
    }

    /// Multiplier in.
    pub fn dx(&self) -> Spectrum {
        self.map_modes(|n, c| Complex64::new(0.0, n as f64) * c)
    }

    /// Multiplier (in)² = -n².
    pub fn dxx(&self) -> Spectrum {
        self.map_modes(|n, c| -((n * n) as f64) * c)
    }

    /// Multiplier |n| (the square of the half-derivative).
    pub fn abs_dx(&self) -> Spectrum {
        self.map_modes(|n, c| (n.unsigned_abs() as f64) * c)
    }

    /// The unique mean-zero antiderivative: û_n/(in) for n ≠ 0, zero at n = 0.
    pub fn antiderivative(&self) -> Spectrum {
        self.map_modes(|n, c| {
            if n == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, n as f64)
            }
        })
    }

    /// Multiplier ψ(n/N); identity when the truncation is infinite.
    pub fn smooth_truncation(&self, trunc: Truncation, psi: &CutoffProfile) -> Spectrum {
        match trunc {
            Truncation::Infinite => self.clone(),
            Truncation::Finite(n_trunc) => {
                let nn = n_trunc as f64;
                self.map_modes(|n, c| psi.eval(n as f64 / nn) * c)
            }
        }
    }

    /// Sharp frequency projections.
    pub fn project(&self, sel: Selector) -> Spectrum {
        self.map_modes(|n, c| if sel.keeps(n) { c } else { Complex64::new(0.0, 0.0) })
    }

    pub fn scale(&self, by: f64) -> Spectrum {
        self.map_modes(|_, c| by * c)
    }

    pub fn scale_complex(&self, by: Complex64) -> Spectrum {
        self.map_modes(|_, c| by * c)
    }

    /// ‖u‖_{L²} = (2π Σ |û_n|²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (TWO_PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// (2π Σ ⟨n⟩^{2σ} |û_n|²)^{1/2} with ⟨n⟩ = (1+n²)^{1/2}.
    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        let sum: f64 = self
            .modes()
            .map(|(n, c)| (1.0 + (n * n) as f64).powf(sigma) * c.norm_sqr())
            .sum();
        (TWO_PI * sum).sqrt()
    }

    /// Largest |û_n| over |n| > cutoff; 0 when nothing is stored there.
    pub fn max_beyond(&self, cutoff: usize) -> f64 {
        self.modes()
            .filter(|(n, _)| n.unsigned_abs() as usize > cutoff)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Pointwise product, coefficients of the convolution û * v̂.
    ///
    /// Computed on a zero-padded grid large enough that the quadratic product
    /// is alias-free on every retained mode. `Exact` demands the full product
    /// bandwidth fit in `out_n_max`; `Truncate` keeps |n| <= out_n_max.
    pub fn multiply(&self, other: &Spectrum, out_n_max: usize, policy: ProductPolicy) -> Result<Spectrum> {
        let needed = self.n_max + other.n_max;
        if policy == ProductPolicy::Exact && out_n_max < needed {
            return Err(Error::ResolutionOverflow { needed, have: out_n_max });
        }
        let kept = out_n_max.min(needed);
        // Grid ≥ 2(B_a+B_b)+1 makes every product mode alias-free; the 4·n_max
        // floor keeps headroom for composed operators.
        let grid = (2 * needed + 1)
            .max(4 * self.n_max.max(other.n_max))
            .max(8)
            .next_power_of_two();
        let a = self.grid_values(grid);
        let b = other.grid_values(grid);
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = spectrum_from_grid(&prod, kept);
        if out_n_max > kept {
            out = out.resized(out_n_max);
        }
        Ok(out)
    }

    /// Values u(x_j) at x_j = 2πj/len. Internal to products and quadrature.
    pub(crate) fn grid_values(&self, len: usize) -> Vec<Complex64> {
        assert!(len > 2 * self.n_max, "grid must resolve every stored mode");
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (n, c) in self.modes() {
            let bin = if n >= 0 { n as usize } else { (len as i64 + n) as usize };
            buf[bin] = c;
        }
        fft_in_place(&mut buf, rustfft::FftDirection::Inverse);
        buf
    }
}

/// Recover the coefficients at |n| <= n_max from grid samples (forward DFT/len).
pub(crate) fn spectrum_from_grid(values: &[Complex64], n_max: usize) -> Spectrum {
    let len = values.len();
    assert!(len > 2 * n_max);
    let mut buf = values.to_vec();
    fft_in_place(&mut buf, rustfft::FftDirection::Forward);
    let scale = 1.0 / len as f64;
    let mut out = Spectrum::zeros(n_max);
    for n in -(n_max as i64)..=(n_max as i64) {
        let bin = if n >= 0 { n as usize } else { (len as i64 + n) as usize };
        out.set(n, buf[bin] * scale);
    }
    out
}

/// ∫_T f dx by the equispaced rule, exact for trig polynomials of degree < len.
pub(crate) fn quadrature_integral(values: &[Complex64]) -> Complex64 {
    let sum: Complex64 = values.iter().sum();
    sum * (TWO_PI / values.len() as f64)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], direction: rustfft::FftDirection) {
    let plan: Arc<dyn rustfft::Fft<f64>> =
        PLANNER.with(|p| p.borrow_mut().plan_fft(buf.len(), direction));
    plan.process(buf);
}

impl Add for &Spectrum {
    type Output = Spectrum;
    fn add(self, rhs: &Spectrum) -> Spectrum {
        zip_with(self, rhs, |a, b| a + b)
    }
}

impl Sub for &Spectrum {
    type Output = Spectrum;
    fn sub(self, rhs: &Spectrum) -> Spectrum {
        zip_with(self, rhs, |a, b| a - b)
    }
}

impl Mul<&Spectrum> for f64 {
    type Output = Spectrum;
    fn mul(self, rhs: &Spectrum) -> Spectrum {
        rhs.scale(self)
    }
}

impl Mul<&Spectrum> for Complex64 {
    type Output = Spectrum;
    fn mul(self, rhs: &Spectrum) -> Spectrum {
        rhs.scale_complex(self)
    }
}

fn zip_with(a: &Spectrum, b: &Spectrum, f: impl Fn(Complex64, Complex64) -> Complex64) -> Spectrum {
    let n_max = a.n_max.max(b.n_max);
    let mut out = Spectrum::zeros(n_max);
    for n in -(n_max as i64)..=(n_max as i64) {
        out.set(n, f(a.get(n), b.get(n)));
    }
    out
}

/// Smooth or sharp spectral truncation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    Finite(usize),
    Infinite,
}

impl Truncation {
    pub fn finite(self) -> Option<usize> {
        match self {
            Truncation::Finite(n) => Some(n),
            Truncation::Infinite => None,
        }
    }
}

/// Frequency sets for [`Spectrum::project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// |n| <= N (the projection Π_N).
    UpTo(usize),
    /// |n| > N.
    Beyond(usize),
    /// n > 0 (P₊).
    Positive,
    /// n < 0 (P₋).
    Negative,
    /// n ≠ 0.
    NonZero,
    /// n = 0 only.
    Zero,
}

impl Selector {
    fn keeps(self, n: i64) -> bool {
        match self {
            Selector::UpTo(nn) => n.unsigned_abs() as usize <= nn,
            Selector::Beyond(nn) => n.unsigned_abs() as usize > nn,
            Selector::Positive => n > 0,
            Selector::Negative => n < 0,
            Selector::NonZero => n != 0,
            Selector::Zero => n == 0,
        }
    }
}

/// Product exactness policy for [`Spectrum::multiply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductPolicy {
    Exact,
    Truncate,
}

/// The smooth even cutoff ψ: 1 on [-inner, inner], 0 outside [-outer, outer],
/// raised-cosine in the transition band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

impl CutoffProfile {
    /// The standard profile: equals 1 on [-1/2, 1/2], vanishes outside [-3/4, 3/4].
    pub fn standard() -> Self {
        CutoffProfile { inner: 0.5, outer: 0.75 }
    }

    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::InvalidConfig(format!(
                "cutoff needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(CutoffProfile { inner, outer })
    }

    pub fn eval(&self, x: f64) -> f64 {
        raised_cosine(x.abs(), self.inner, self.outer)
    }

    pub fn describe(&self) -> String {
        format!(
            "psi: raised cosine, 1 on [-{}, {}], 0 outside [-{}, {}]",
            self.inner, self.inner, self.outer, self.outer
        )
    }
}

pub(crate) fn raised_cosine(ax: f64, inner: f64, outer: f64) -> f64 {
    if ax <= inner {
        1.0
    } else if ax >= outer {
        0.0
    } else {
        let t = (ax - inner) / (outer - inner);
        let c = (std::f64::consts::FRAC_PI_2 * t).cos();
        c * c
    }
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile::standard()
    }
}

/// A real-valued mean-zero function on the torus: û_{-n} = conj(û_n), û_0 = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierState(Spectrum);

impl FourierState {
    pub fn zeros(n_max: usize) -> Self {
        FourierState(Spectrum::zeros(n_max))
    }

    /// Validated construction; rejects symmetry or mean-zero violations.
    pub fn try_new(spec: Spectrum) -> Result<Self> {
        if spec.get(0) != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidConfig("state has nonzero mean".into()));
        }
        for n in 1..=spec.n_max() as i64 {
            if spec.get(-n) != spec.get(n).conj() {
                return Err(Error::InvalidConfig(format!(
                    "conjugate symmetry broken at n = {n}"
                )));
            }
        }
        Ok(FourierState(spec))
    }

    /// Build from the positive-frequency coefficients; negatives are conjugated.
    pub fn from_positive_modes(n_max: usize, upper: &[(i64, Complex64)]) -> Self {
        let mut spec = Spectrum::zeros(n_max);
        for &(n, c) in upper {
            assert!(n > 0, "only strictly positive frequencies expected");
            spec.set(n, c);
            spec.set(-n, c.conj());
        }
        FourierState(spec)
    }

    /// Orthogonal projection onto real mean-zero states.
    pub fn symmetrized(spec: &Spectrum) -> Self {
        let mut out = Spectrum::zeros(spec.n_max());
        for n in 1..=spec.n_max() as i64 {
            let c = 0.5 * (spec.get(n) + spec.get(-n).conj());
            out.set(n, c);
            out.set(-n, c.conj());
        }
        FourierState(out)
    }

    /// amplitude·cos(kx).
    pub fn cosine(n_max: usize, k: i64, amplitude: f64) -> Self {
        Self::from_positive_modes(n_max, &[(k, Complex64::new(amplitude / 2.0, 0.0))])
    }

    /// amplitude·sin(kx).
    pub fn sine(n_max: usize, k: i64, amplitude: f64) -> Self {
        Self::from_positive_modes(n_max, &[(k, Complex64::new(0.0, -amplitude / 2.0))])
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.0
    }

    pub fn into_spectrum(self) -> Spectrum {
        self.0
    }

    fn wrap(spec: Spectrum) -> Self {
        // non-finite values are tolerated here; the integrator's blow-up
        // detector is responsible for reporting them
        debug_assert!(!spec.is_finite() || FourierState::try_new(spec.clone()).is_ok());
        FourierState(spec)
    }

    // Reality-preserving operator wrappers.

    pub fn hilbert(&self) -> Self {
        Self::wrap(self.0.hilbert())
    }

    pub fn dx(&self) -> Self {
        Self::wrap(self.0.dx())
    }

    pub fn dxx(&self) -> Self {
        Self::wrap(self.0.dxx())
    }

    pub fn abs_dx(&self) -> Self {
        Self::wrap(self.0.abs_dx())
    }

    pub fn antiderivative(&self) -> Self {
        Self::wrap(self.0.antiderivative())
    }

    pub fn smooth_truncation(&self, trunc: Truncation, psi: &CutoffProfile) -> Self {
        Self::wrap(self.0.smooth_truncation(trunc, psi))
    }

    /// Sharp projection for the symmetric selectors (Π_N, its complement, n≠0).
    pub fn sharp_projection(&self, sel: Selector) -> Self {
        debug_assert!(matches!(sel, Selector::UpTo(_) | Selector::Beyond(_) | Selector::NonZero));
        Self::wrap(self.0.project(sel))
    }

    pub fn scale(&self, by: f64) -> Self {
        Self::wrap(self.0.scale(by))
    }

    pub fn add(&self, rhs: &FourierState) -> Self {
        Self::wrap(&self.0 + &rhs.0)
    }

    pub fn resized(&self, n_max: usize) -> Self {
        Self::wrap(self.0.resized(n_max))
    }

    /// Real product with the mean retained (a Spectrum, not a state).
    pub fn multiply(&self, other: &FourierState, out_n_max: usize, policy: ProductPolicy) -> Result<Spectrum> {
        self.0.multiply(&other.0, out_n_max, policy)
    }

    /// Real product with the mean projected out.
    pub fn multiply_mean_zero(&self, other: &FourierState, out_n_max: usize, policy: ProductPolicy) -> Result<FourierState> {
        let prod = self.multiply(other, out_n_max, policy)?;
        Ok(FourierState::symmetrized(&prod))
    }
}

impl Deref for FourierState {
    type Target = Spectrum;
    fn deref(&self) -> &Spectrum {
        &self.0
    }
}

/// The Besov-type norm sup_{d≥0} (Σ_{n∼2^d} 2^{rpd} |û_n|^p)^{1/p}.
///
/// Block d = 0 is {|n| <= 1}; block d >= 1 is {2^d <= |n| < 2^{d+1}}.
pub fn z1_norm(u: &Spectrum, params: &ParameterSet) -> f64 {
    z1_norm_with(u, params.p, params.r)
}

pub fn z1_norm_with(u: &Spectrum, p: f64, r: f64) -> f64 {
    let mut sup: f64 = 0.0;
    let mut d = 0u32;
    loop {
        let (lo, hi) = if d == 0 { (0i64, 1i64) } else { (1i64 << d, (1i64 << (d + 1)) - 1) };
        if lo > u.n_max() as i64 {
            break;
        }
        let weight = (2f64).powf(r * p * d as f64);
        let mut sum = 0.0;
        for n in lo..=hi.min(u.n_max() as i64) {
            sum += weight * u.get(n).norm().powf(p);
            if n > 0 {
                sum += weight * u.get(-n).norm().powf(p);
            }
        }
        sup = sup.max(sum.powf(1.0 / p));
        d += 1;
    }
    sup
}

/// The rewritten form ‖⟨n⟩^r f‖_{l^∞_d l^p_{∼2^d}} (same blocks, bracket weight).
pub fn z1_norm_bracket(u: &Spectrum, params: &ParameterSet) -> f64 {
    let (p, r) = (params.p, params.r);
    let mut sup: f64 = 0.0;
    let mut d = 0u32;
    loop {
        let (lo, hi) = if d == 0 { (0i64, 1i64) } else { (1i64 << d, (1i64 << (d + 1)) - 1) };
        if lo > u.n_max() as i64 {
            break;
        }
        let mut sum = 0.0;
        for n in lo..=hi.min(u.n_max() as i64) {
            let w = (1.0 + (n * n) as f64).powf(r * p / 2.0);
            sum += w * u.get(n).norm().powf(p);
            if n > 0 {
                sum += w * u.get(-n).norm().powf(p);
            }
        }
        sup = sup.max(sum.powf(1.0 / p));
        d += 1;
    }
    sup
}
