//! The s-derived exponent family (p, r, b, τ, q, κ, γ, ε) and its ordering chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent family derived from a single regularity parameter s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub b: f64,
    pub tau: f64,
    pub q: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

/// Derive the full family; s must lie in (0, 0.25).
pub fn parameter_set(s: f64) -> Result<ParameterSet> {
    if !(s > 0.0 && s < 0.25) {
        return Err(Error::ParameterDomain(s));
    }
    let p = 2.0 / (1.0 - 2.0 * s) + s * s;
    Ok(ParameterSet {
        s,
        p,
        r: 0.5 - 1.0 / p,
        b: 0.5 - s.powf(15.0 / 8.0),
        tau: 8.0 - s.powf(13.0 / 8.0),
        q: 1.0 + s.powf(1.5),
        kappa: 1.0 - s.powf(1.25),
        gamma: 2.0 - s.powf(2.5),
        epsilon: s.powf(7.0 / 4.0),
    })
}

impl ParameterSet {
    /// The smallness quantities, ordered as in the hierarchy chain:
    /// s³, 2-γ, r-s, 1/2-b, ε, 8-τ, q-1, 1-κ, s, s^{1/2}.
    pub fn hierarchy_chain(&self) -> [(&'static str, f64); 10] {
        [
            ("s^3", self.s.powi(3)),
            ("2-gamma", 2.0 - self.gamma),
            ("r-s", self.r - self.s),
            ("1/2-b", 0.5 - self.b),
            ("epsilon", self.epsilon),
            ("8-tau", 8.0 - self.tau),
            ("q-1", self.q - 1.0),
            ("1-kappa", 1.0 - self.kappa),
            ("s", self.s),
            ("s^{1/2}", self.s.sqrt()),
        ]
    }

    /// Whether the chain is strictly increasing (guaranteed for s <= 0.01).
    pub fn hierarchy_strict(&self) -> bool {
        self.hierarchy_chain().windows(2).all(|w| w[0].1 < w[1].1)
    }
}
