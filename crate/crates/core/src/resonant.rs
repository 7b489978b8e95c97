//! The resonant coefficient polynomials in θ = ψ(k/N) extracted from the
//! gauge-transformed equation, and their exact cancellation
//!
//!   C¹ + C² + C³ + C⁴ + C⁵ = 0,   D² + D³ = 0
//!
//! verified for every series order μ in arbitrary-precision rationals; no
//! floating point enters this module.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::report::{CheckLine, ExperimentReport};

/// The seven closed-form coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Family {
    C1,
    C2,
    C3,
    C4,
    C5,
    D2,
    D3,
}

impl Family {
    pub const ALL: [Family; 7] =
        [Family::C1, Family::C2, Family::C3, Family::C4, Family::C5, Family::D2, Family::D3];

    pub fn parse(text: &str) -> Result<Family> {
        match text.to_ascii_uppercase().as_str() {
            "C1" => Ok(Family::C1),
            "C2" => Ok(Family::C2),
            "C3" => Ok(Family::C3),
            "C4" => Ok(Family::C4),
            "C5" => Ok(Family::C5),
            "D2" => Ok(Family::D2),
            "D3" => Ok(Family::D3),
            other => Err(Error::InvalidConfig(format!("unknown coefficient family {other}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A polynomial in θ with exact rational coefficients, keyed by power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaPolynomial {
    coeffs: BTreeMap<u32, BigRational>,
}

impl ThetaPolynomial {
    pub fn zero() -> Self {
        ThetaPolynomial { coeffs: BTreeMap::new() }
    }

    fn add_term(&mut self, power: u32, value: BigRational) {
        if value.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(power).or_insert_with(BigRational::zero);
        *entry += value;
        if entry.is_zero() {
            self.coeffs.remove(&power);
        }
    }

    pub fn coefficient(&self, power: u32) -> BigRational {
        self.coeffs.get(&power).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &ThetaPolynomial) -> ThetaPolynomial {
        let mut out = self.clone();
        for (&p, v) in &other.coeffs {
            out.add_term(p, v.clone());
        }
        out
    }

    /// Canonical ascending-power text form, e.g. `-1/2*t^2 - 1/2*t^4`.
    pub fn canonical_string(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (p, c)) in self.coeffs.iter().enumerate() {
            let sign = if c < &BigRational::zero() { "-" } else { "+" };
            let mag = if c < &BigRational::zero() { -c.clone() } else { c.clone() };
            if i == 0 {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out += &format!(" {sign} ");
            }
            out += &format!("{mag}*t^{p}");
        }
        out
    }
}

impl fmt::Display for ThetaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_string())
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact coefficient polynomial of the named family at series order μ.
///
/// The C family carries even powers θ²..θ^{2μ+4}, the D family odd powers
/// θ³..θ^{2μ+3}:
///   C¹ = -(μ+1)/2 (θ² + θ⁴ + ... + θ^{2μ+4})
///   C² = -(μ+1)θ² + (θ⁴ + ... + θ^{2μ+4})
///   C³ = (1/2)((μ+1)θ² + (-μ-1)θ⁴ + (-μ+1)θ⁶ + ... + (μ-1)θ^{2μ+4})
///   C⁴ = (μ+1)(μ+2)/2 θ²
///   C⁵ = -μ(μ+1)/2 θ² + μθ⁴ + (μ-1)θ⁶ + ... + θ^{2μ+2}
///   D² = 2θ³ + 6θ⁵ + ... + (μ+1)(μ+2)θ^{2μ+3}   (j(j+1) on θ^{2j+1})
///   D³ = -D²
pub fn resonant_coefficient(family: Family, mu: u32) -> ThetaPolynomial {
    let m = mu as i64;
    let mut poly = ThetaPolynomial::zero();
    match family {
        Family::C1 => {
            for j in 1..=m + 2 {
                poly.add_term(2 * j as u32, ratio(-(m + 1), 2));
            }
        }
        Family::C2 => {
            poly.add_term(2, ratio(-(m + 1), 1));
            for j in 2..=m + 2 {
                poly.add_term(2 * j as u32, ratio(1, 1));
            }
        }
        Family::C3 => {
            poly.add_term(2, ratio(m + 1, 2));
            for j in 2..=m + 2 {
                poly.add_term(2 * j as u32, ratio(2 * j - m - 5, 2));
            }
        }
        Family::C4 => {
            poly.add_term(2, ratio((m + 1) * (m + 2), 2));
        }
        Family::C5 => {
            poly.add_term(2, ratio(-m * (m + 1), 2));
            for j in 2..=m + 1 {
                poly.add_term(2 * j as u32, ratio(m + 2 - j, 1));
            }
        }
        Family::D2 => {
            for j in 1..=m + 1 {
                poly.add_term(2 * j as u32 + 1, ratio(j * (j + 1), 1));
            }
        }
        Family::D3 => {
            for j in 1..=m + 1 {
                poly.add_term(2 * j as u32 + 1, ratio(-j * (j + 1), 1));
            }
        }
    }
    poly
}

/// Sum the C family (or the D family) at order μ.
pub fn family_sum(families: &[Family], mu: u32) -> ThetaPolynomial {
    families
        .iter()
        .fold(ThetaPolynomial::zero(), |acc, &f| acc.add(&resonant_coefficient(f, mu)))
}

/// Assert both cancellations for every μ <= mu_max, in exact arithmetic.
pub fn verify_cancellation(mu_max: u32) -> ExperimentReport {
    let mut report = ExperimentReport::new("cancellation", serde_json::json!({ "mu_max": mu_max }));
    for mu in 0..=mu_max {
        let c_sum = family_sum(&[Family::C1, Family::C2, Family::C3, Family::C4, Family::C5], mu);
        let d_sum = family_sum(&[Family::D2, Family::D3], mu);
        let ok = c_sum.is_zero() && d_sum.is_zero();
        let mut line = CheckLine::new(format!("mu={mu}"), 0.0, ok);
        if !ok {
            line.value = 1.0;
            line.name = format!("mu={mu} C_sum={c_sum} D_sum={d_sum}");
        }
        report.push(line);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(p: u32, n: i64, d: i64) -> (u32, BigRational) {
        (p, ratio(n, d))
    }

    #[test]
    fn families_at_mu_zero() {
        // C4 = (μ+1)(μ+2)/2 θ² = θ²
        let c4 = resonant_coefficient(Family::C4, 0);
        assert_eq!(c4.coefficient(2), ratio(1, 1));
        assert_eq!(c4.coeffs.len(), 1);
        // C1 = -(1/2)(θ² + θ⁴)
        let c1 = resonant_coefficient(Family::C1, 0);
        for (p, v) in [term(2, -1, 2), term(4, -1, 2)] {
            assert_eq!(c1.coefficient(p), v);
        }
        // C5 is empty at μ = 0: both the θ² term and the descending series vanish
        assert!(resonant_coefficient(Family::C5, 0).is_zero());
        // D2 = 2θ³
        let d2 = resonant_coefficient(Family::D2, 0);
        assert_eq!(d2.coefficient(3), ratio(2, 1));
        assert_eq!(d2.coeffs.len(), 1);
    }

    #[test]
    fn hand_expansion_at_mu_one() {
        // C2(1) = -2θ² + θ⁴ + θ⁶, C3(1) = θ² - θ⁴, C5(1) = -θ² + θ⁴
        let c2 = resonant_coefficient(Family::C2, 1);
        assert_eq!(c2.coefficient(2), ratio(-2, 1));
        assert_eq!(c2.coefficient(4), ratio(1, 1));
        assert_eq!(c2.coefficient(6), ratio(1, 1));
        let c3 = resonant_coefficient(Family::C3, 1);
        assert_eq!(c3.coefficient(2), ratio(1, 1));
        assert_eq!(c3.coefficient(4), ratio(-1, 1));
        assert_eq!(c3.coefficient(6), ratio(0, 1));
        let c5 = resonant_coefficient(Family::C5, 1);
        assert_eq!(c5.coefficient(2), ratio(-1, 1));
        assert_eq!(c5.coefficient(4), ratio(1, 1));
    }

    #[test]
    fn cancellation_sweep() {
        let report = verify_cancellation(50);
        assert!(report.passed);
        assert_eq!(report.checks.len(), 51);
    }

    #[test]
    fn partial_sums_do_not_cancel() {
        // negative control: C1 + C2 alone is not zero at μ = 0
        let partial = family_sum(&[Family::C1, Family::C2], 0);
        assert!(!partial.is_zero());
        assert_eq!(partial.coefficient(2), ratio(-3, 2));
    }

    #[test]
    fn canonical_text_form() {
        let c1 = resonant_coefficient(Family::C1, 0);
        assert_eq!(c1.canonical_string(), "-1/2*t^2 - 1/2*t^4");
        assert_eq!(ThetaPolynomial::zero().canonical_string(), "0");
        let d2 = resonant_coefficient(Family::D2, 1);
        assert_eq!(d2.canonical_string(), "2*t^3 + 6*t^5");
    }

    #[test]
    fn family_parsing() {
        assert_eq!(Family::parse("c3").unwrap(), Family::C3);
        assert!(Family::parse("c9").is_err());
    }
}
