//! Wiener-measure sampling, Gibbs weights, importance-sampled expectations,
//! and the probabilistic tail/moment checks.
//!
//! The random series is f = Σ_{n≠0} g_n/(2√(π|n|)) e^{inx} with g_{-n} =
//! conj(g_n) and E|g_n|² = 1; its law on frequencies |n| <= N is ρ_N. The
//! Gibbs density against ρ_N is θ_N(f) = ζ(‖Π_N f‖² - α_N)·exp((1/3)∫(S_N f)³).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_to, IntegratorConfig};
use crate::error::{Error, Result};
use crate::params::ParameterSet;
use crate::report::{CheckLine, ExperimentReport};
use crate::spectral::{
    quadrature_integral, raised_cosine, z1_norm, CutoffProfile, FourierState, Selector, Truncation,
    TWO_PI,
};
use crate::stats::{linear_fit, weighted_mean_stderr, z_score};

/// The compactly supported cutoff ζ: 1 on [-a, a], 0 outside [-2a, 2a].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaProfile {
    /// Plateau half-width a (support half-width is 2a).
    pub plateau: f64,
}

impl ZetaProfile {
    pub fn new(plateau: f64) -> Result<Self> {
        if !(plateau > 0.0) {
            return Err(Error::InvalidConfig(format!("zeta plateau must be positive, got {plateau}")));
        }
        Ok(ZetaProfile { plateau })
    }

    pub fn eval(&self, x: f64) -> f64 {
        raised_cosine(x.abs(), self.plateau, 2.0 * self.plateau)
    }

    pub fn describe(&self) -> String {
        format!(
            "zeta: raised cosine, 1 on [-{}, {}], 0 outside [-{}, {}]",
            self.plateau,
            self.plateau,
            2.0 * self.plateau,
            2.0 * self.plateau
        )
    }
}

impl Default for ZetaProfile {
    fn default() -> Self {
        ZetaProfile { plateau: 1.0 }
    }
}

/// Which cubic enters the Gibbs weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightVariant {
    /// exp((1/3)∫(S_N f)³) — the density invariant under the truncated flow.
    SmoothCubic,
    /// exp((1/3)∫(Π_N f)³) — the sharp-projection variant.
    SharpCubic,
}

/// Deterministic per-sample RNG: one ChaCha stream per (seed, index), so
/// ensembles are reproducible under any degree of parallelism.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One draw of the random series, truncated to |n| <= n_trunc, stored at
/// resolution n_max >= n_trunc.
pub fn wiener_state(n_trunc: usize, n_max: usize, seed: u64, index: u64) -> FourierState {
    assert!(n_max >= n_trunc);
    let mut rng = sample_rng(seed, index);
    let sigma = 0.5f64.sqrt(); // E|g|² = 1 split over real and imaginary parts
    let upper: Vec<(i64, Complex64)> = (1..=n_trunc as i64)
        .map(|n| {
            let re: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let im: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let g = Complex64::new(re, im);
            (n, g / (2.0 * (std::f64::consts::PI * n as f64).sqrt()))
        })
        .collect();
    FourierState::from_positive_modes(n_max, &upper)
}

/// α_N = Σ_{n=1}^N 1/n, the mean of ‖Π_N f‖² under the Wiener measure.
pub fn alpha(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// The Gibbs weight θ_N(f); returns 0 outside the support of ζ.
pub fn gibbs_weight(
    f: &FourierState,
    n: usize,
    zeta: &ZetaProfile,
    psi: &CutoffProfile,
    variant: WeightVariant,
) -> f64 {
    let pi_f = f.sharp_projection(Selector::UpTo(n));
    let mass_sq = TWO_PI * pi_f.modes().map(|(_, c)| c.norm_sqr()).sum::<f64>();
    let z = zeta.eval(mass_sq - alpha(n));
    if z == 0.0 {
        return 0.0;
    }
    let filtered = match variant {
        WeightVariant::SmoothCubic => f.smooth_truncation(Truncation::Finite(n), psi),
        WeightVariant::SharpCubic => pi_f,
    };
    let grid = (3 * filtered.n_max() + 1).max(8).next_power_of_two();
    let vals = filtered.spectrum().grid_values(grid);
    let cubic: Vec<Complex64> = vals.iter().map(|v| v * v * v).collect();
    let integral = quadrature_integral(&cubic).re;
    z * (integral / 3.0).exp()
}

/// A seeded collection of Wiener samples with attached Gibbs weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsEnsemble {
    pub samples: Vec<FourierState>,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub n: usize,
    pub zeta: ZetaProfile,
    pub variant: WeightVariant,
}

impl GibbsEnsemble {
    /// Σw / max(w); > 1 whenever more than one sample carries weight.
    pub fn effective_sample_size(&self) -> f64 {
        let max = self.weights.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            0.0
        } else {
            self.weights.iter().sum::<f64>() / max
        }
    }
}

/// Draw M importance-weighted samples of ν_N° = θ_N dρ_N.
pub fn build_ensemble(
    n: usize,
    m: usize,
    seed: u64,
    zeta: &ZetaProfile,
    psi: &CutoffProfile,
    variant: WeightVariant,
) -> GibbsEnsemble {
    let samples: Vec<FourierState> = (0..m as u64)
        .into_par_iter()
        .map(|i| wiener_state(n, n, seed, i))
        .collect();
    let weights: Vec<f64> =
        samples.par_iter().map(|f| gibbs_weight(f, n, zeta, psi, variant)).collect();
    GibbsEnsemble { samples, weights, seed, n, zeta: *zeta, variant }
}

/// Self-normalized importance-sampling estimate (mean, stderr) of E_ν[φ].
pub fn weighted_expectation(
    ens: &GibbsEnsemble,
    observable: impl Fn(&FourierState) -> f64 + Sync,
) -> Result<(f64, f64)> {
    let values: Vec<f64> = ens.samples.par_iter().map(&observable).collect();
    weighted_mean_stderr(&ens.weights, &values).ok_or(Error::DegenerateEnsemble)
}

/// Observables used by the measure-invariance experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// ‖Π_N f‖²_{L²}; N is the ensemble truncation.
    MassSq,
    /// Re f̂_k.
    ReCoeff(i64),
    /// |f̂_k|².
    AbsCoeffSq(i64),
}

impl Observable {
    pub fn eval(&self, f: &FourierState, n: usize) -> f64 {
        match *self {
            Observable::MassSq => {
                TWO_PI
                    * f.modes()
                        .filter(|(k, _)| k.unsigned_abs() as usize <= n)
                        .map(|(_, c)| c.norm_sqr())
                        .sum::<f64>()
            }
            Observable::ReCoeff(k) => f.get(k).re,
            Observable::AbsCoeffSq(k) => f.get(k).norm_sqr(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Observable::MassSq => "mass_sq".into(),
            Observable::ReCoeff(k) => format!("re_{k}"),
            Observable::AbsCoeffSq(k) => format!("abs_sq_{k}"),
        }
    }

    pub fn parse(text: &str) -> Result<Observable> {
        let t = text.trim();
        if t == "mass_sq" {
            return Ok(Observable::MassSq);
        }
        if let Some(k) = t.strip_prefix("re_") {
            return k
                .parse()
                .map(Observable::ReCoeff)
                .map_err(|_| Error::InvalidConfig(format!("bad observable {text}")));
        }
        if let Some(k) = t.strip_prefix("abs_sq_") {
            return k
                .parse()
                .map(Observable::AbsCoeffSq)
                .map_err(|_| Error::InvalidConfig(format!("bad observable {text}")));
        }
        Err(Error::InvalidConfig(format!(
            "unknown observable {text}; expected mass_sq, re_<k> or abs_sq_<k>"
        )))
    }
}

/// Per-sample observable matrix produced by the invariance experiment, for
/// optional flat-CSV export.
pub struct InvarianceSamples {
    pub names: Vec<String>,
    pub weights: Vec<f64>,
    pub initial: Vec<Vec<f64>>,
    pub evolved: Vec<Vec<f64>>,
}

impl InvarianceSamples {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,weight");
        for n in &self.names {
            out += &format!(",{n}_t0,{n}_t1");
        }
        out.push('\n');
        for i in 0..self.weights.len() {
            out += &format!("{i},{:.17e}", self.weights[i]);
            for k in 0..self.names.len() {
                out += &format!(",{:.17e},{:.17e}", self.initial[i][k], self.evolved[i][k]);
            }
            out.push('\n');
        }
        out
    }
}

/// Monte Carlo check of the finite-N invariance identity: for each observable
/// φ, E_ν[φ ∘ Φ_t] must match E_ν[φ]. Censored (blown-up) trajectories abort
/// the experiment rather than being dropped.
#[allow(clippy::too_many_arguments)]
pub fn invariance_experiment(
    n: usize,
    m: usize,
    t: f64,
    cfg: &IntegratorConfig,
    zeta: &ZetaProfile,
    observables: &[Observable],
    seed: u64,
    keep_samples: bool,
) -> Result<(ExperimentReport, Option<InvarianceSamples>)> {
    cfg.validate()?;
    if cfg.trunc != Truncation::Finite(n) {
        return Err(Error::InvalidConfig("integrator truncation must match the ensemble".into()));
    }
    let ens = build_ensemble(n, m, seed, zeta, &cfg.psi, WeightVariant::SmoothCubic);
    let initial: Vec<Vec<f64>> = ens
        .samples
        .par_iter()
        .map(|f| observables.iter().map(|o| o.eval(f, n)).collect())
        .collect();
    let evolved_states: Vec<FourierState> = ens
        .samples
        .par_iter()
        .map(|f| evolve_to(f, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let evolved: Vec<Vec<f64>> = evolved_states
        .par_iter()
        .map(|f| observables.iter().map(|o| o.eval(f, n)).collect())
        .collect();

    let mut report = ExperimentReport::new(
        "invariance",
        serde_json::json!({
            "n": n, "m": m, "t": t, "dt": cfg.dt, "seed": seed,
            "variant": "smooth_cubic",
            "observables": observables.iter().map(|o| o.name()).collect::<Vec<_>>(),
        }),
    );
    report.record_profile(cfg.psi.describe());
    report.record_profile(zeta.describe());

    for (k, obs) in observables.iter().enumerate() {
        let v0: Vec<f64> = initial.iter().map(|row| row[k]).collect();
        let vt: Vec<f64> = evolved.iter().map(|row| row[k]).collect();
        let (m0, se0) = weighted_mean_stderr(&ens.weights, &v0).ok_or(Error::DegenerateEnsemble)?;
        let (mt, set) = weighted_mean_stderr(&ens.weights, &vt).ok_or(Error::DegenerateEnsemble)?;
        let z = z_score(m0, se0, mt, set);
        report.push(
            CheckLine::new(obs.name(), mt, z.abs() < 3.0)
                .with_reference(m0)
                .with_stderr((se0 * se0 + set * set).sqrt())
                .with_z(z),
        );
    }
    let ess = ens.effective_sample_size();
    report.push(CheckLine::new("effective_sample_size", ess, ess > 1.0).with_bound(f64::INFINITY));

    let samples = keep_samples.then(|| InvarianceSamples {
        names: observables.iter().map(|o| o.name()).collect(),
        weights: ens.weights,
        initial,
        evolved,
    });
    Ok((report, samples))
}

/// Empirical tail P(‖f‖_{Z₁} > K) on a K grid, with the fitted slope of
/// log P against K².
pub fn z1_tail_curve(
    k_grid: &[f64],
    n: usize,
    m: usize,
    seed: u64,
    params: &ParameterSet,
) -> Result<ExperimentReport> {
    if k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("K grid must be strictly increasing".into()));
    }
    let norms: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| z1_norm(wiener_state(n, n, seed, i).spectrum(), params))
        .collect();
    let mut report = ExperimentReport::new(
        "z1_tail",
        serde_json::json!({ "n": n, "m": m, "seed": seed, "s": params.s, "k_grid": k_grid }),
    );
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut prev = 1.0f64;
    for &k in k_grid {
        let count = norms.iter().filter(|&&z| z > k).count();
        let p = count as f64 / m as f64;
        // tails are monotone non-increasing by construction of the counts
        let monotone = p <= prev + 1e-15;
        prev = p;
        report.push(
            CheckLine::new(format!("tail_K={k}"), p, monotone)
                .with_stderr((p * (1.0 - p) / m as f64).sqrt()),
        );
        if p > 0.0 && k > 0.0 {
            xs.push(k * k);
            ys.push(p.ln());
        }
    }
    let (slope, _) = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::InvalidConfig("not enough populated tail bins for a fit".into()))?;
    report.push(CheckLine::new("log_tail_slope_vs_K2", slope, slope < 0.0).with_bound(0.0));
    Ok(report)
}

/// Empirical E|g|^{4m} against (2m)! for a normalized complex Gaussian.
pub fn gaussian_moment_check(m_exponent: u32, samples: usize, seed: u64) -> Result<ExperimentReport> {
    if !(1..=3).contains(&m_exponent) {
        return Err(Error::InvalidConfig("moment exponent m must be 1, 2 or 3".into()));
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let sigma = 0.5f64.sqrt();
            let g = Complex64::new(
                rng.sample::<f64, _>(StandardNormal) * sigma,
                rng.sample::<f64, _>(StandardNormal) * sigma,
            );
            g.norm_sqr().powi(2 * m_exponent as i32)
        })
        .collect();
    let weights = vec![1.0; values.len()];
    let (mean, se) = weighted_mean_stderr(&weights, &values).ok_or(Error::DegenerateEnsemble)?;
    let expected = (1..=2 * m_exponent as u64).product::<u64>() as f64; // (2m)!
    let z = if se == 0.0 { 0.0 } else { (mean - expected) / se };
    let mut report = ExperimentReport::new(
        "gaussian_moments",
        serde_json::json!({ "m": m_exponent, "samples": samples, "seed": seed }),
    );
    report.push(
        CheckLine::new(format!("E|g|^{}", 4 * m_exponent), mean, z.abs() < 4.0)
            .with_reference(expected)
            .with_stderr(se)
            .with_z(z),
    );
    Ok(report)
}

/// Large-deviation bound for X = Σ_{j<=N} |g_j|⁴: for α > 1600,
/// P(X >= αN) <= 4 exp(-√(αN)/120). Empirical exceedance frequencies must
/// stay below the bound plus 4 binomial standard errors.
pub fn quartic_tail_check(
    n: usize,
    alpha_grid: &[f64],
    m: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if alpha_grid.iter().any(|&a| a <= 0.0) {
        return Err(Error::InvalidConfig("alpha grid must be positive".into()));
    }
    let sums: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let sigma = 0.5f64.sqrt();
            (0..n)
                .map(|_| {
                    let g = Complex64::new(
                        rng.sample::<f64, _>(StandardNormal) * sigma,
                        rng.sample::<f64, _>(StandardNormal) * sigma,
                    );
                    g.norm_sqr().powi(2)
                })
                .sum()
        })
        .collect();
    let mut report = ExperimentReport::new(
        "quartic_tail",
        serde_json::json!({ "n": n, "m": m, "seed": seed, "alpha_grid": alpha_grid }),
    );
    for &a in alpha_grid {
        let freq = sums.iter().filter(|&&x| x >= a * n as f64).count() as f64 / m as f64;
        let bound = 4.0 * (-(a * n as f64).sqrt() / 120.0).exp();
        let se = (freq * (1.0 - freq) / m as f64).sqrt();
        let passed = if a > 1600.0 { freq <= bound + 4.0 * se } else { true };
        let mut line = CheckLine::new(format!("exceedance_alpha={a}"), freq, passed).with_stderr(se);
        if a > 1600.0 {
            line = line.with_bound(bound);
        }
        report.push(line);
    }
    Ok(report)
}
