//! Even polynomial potentials `U(x) = Σ a₂ₖ x²ᵏ`.
//!
//! Everything is evaluated as a polynomial in `u = x²` so that `U(x)` and
//! `U(−x)` are bit-identical.

use serde::{Deserialize, Serialize};

/// One monomial `coeff · x^degree`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub degree: u32,
    pub coeff: f64,
}

impl Term {
    pub fn new(degree: u32, coeff: f64) -> Self {
        Self { degree, coeff }
    }
}

/// Unvalidated wire form of a potential: `{"terms": [{"degree": 2, "coeff": 0.5}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("OddDegree: term of degree {0} is not even")]
    OddDegree(u32),
    #[error("InvalidDegree: degree 0 is not allowed, terms must have positive even degree")]
    ZeroDegree,
    #[error("NonFiniteCoefficient: coefficient of degree {0} is not finite")]
    NonFiniteCoefficient(u32),
    #[error("NoConfinement: the highest-degree coefficient must be strictly positive")]
    NoConfinement,
    #[error("NegativeRadicand: Σ 8k·a₂ₖ·x²ᵏ = {value:e} < 0 at x = {x}")]
    NegativeRadicand { x: f64, value: f64 },
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
}

/// Closed-form families recognised by the ansatz builder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialShape {
    /// `½ω²x²`
    Harmonic { omega: f64 },
    /// `½ω²x² + ½λx⁴` with both terms present.
    Quartic { omega: f64, lambda: f64 },
    /// `½λx⁴`
    PureQuartic { lambda: f64 },
    General,
}

/// A validated, canonical even polynomial potential.
///
/// Terms are sorted by ascending degree, degrees are distinct, zero
/// coefficients are dropped, the leading coefficient is positive and the
/// ansatz radicand `Σ 8k·a₂ₖ·x²ᵏ` is nonnegative on the whole real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PotentialSpec", try_from = "PotentialSpec")]
pub struct EvenPolynomialPotential {
    terms: Vec<Term>,
    // Dense coefficients in u = x²; index k multiplies u^k.
    u_coeffs: Vec<f64>,
    // Dense coefficients of x·U'(x) = Σ 2k·a₂ₖ·u^k.
    virial_coeffs: Vec<f64>,
}

impl EvenPolynomialPotential {
    /// Validates and canonicalises a raw term list. Duplicate degrees are summed.
    pub fn validate(raw: &[Term]) -> Result<Self, PotentialError> {
        let mut terms: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            if t.degree == 0 {
                return Err(PotentialError::ZeroDegree);
            }
            if t.degree % 2 != 0 {
                return Err(PotentialError::OddDegree(t.degree));
            }
            if !t.coeff.is_finite() {
                return Err(PotentialError::NonFiniteCoefficient(t.degree));
            }
            match terms.iter_mut().find(|s| s.degree == t.degree) {
                Some(s) => s.coeff += t.coeff,
                None => terms.push(*t),
            }
        }
        terms.retain(|t| t.coeff != 0.0);
        terms.sort_by_key(|t| t.degree);

        match terms.last() {
            Some(lead) if lead.coeff > 0.0 => {}
            _ => return Err(PotentialError::NoConfinement),
        }

        let top = (terms.last().unwrap().degree / 2) as usize;
        let mut u_coeffs = vec![0.0; top + 1];
        let mut virial_coeffs = vec![0.0; top + 1];
        for t in &terms {
            let k = (t.degree / 2) as usize;
            u_coeffs[k] = t.coeff;
            virial_coeffs[k] = 2.0 * k as f64 * t.coeff;
        }

        let p = Self {
            terms,
            u_coeffs,
            virial_coeffs,
        };
        p.check_radicand()?;
        Ok(p)
    }

    /// `U = ½ω²x² + ½λx⁴`.
    pub fn make_quartic(omega: f64, lambda: f64) -> Result<Self, PotentialError> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(PotentialError::InvalidParameter(format!(
                "omega must be finite and nonnegative, got {omega}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(PotentialError::InvalidParameter(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        if omega == 0.0 && lambda == 0.0 {
            return Err(PotentialError::NoConfinement);
        }
        Self::validate(&[
            Term::new(2, 0.5 * omega * omega),
            Term::new(4, 0.5 * lambda),
        ])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.degree)
    }

    /// Coefficient of `x^degree`, zero when absent.
    pub fn coefficient(&self, degree: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| t.degree == degree)
            .map_or(0.0, |t| t.coeff)
    }

    pub fn shape(&self) -> PotentialShape {
        let a2 = self.coefficient(2);
        let a4 = self.coefficient(4);
        let only_2_and_4 = self.terms.iter().all(|t| t.degree == 2 || t.degree == 4);
        if !only_2_and_4 || a2 < 0.0 {
            return PotentialShape::General;
        }
        match (a2 > 0.0, a4 > 0.0) {
            (true, false) => PotentialShape::Harmonic {
                omega: (2.0 * a2).sqrt(),
            },
            (true, true) => PotentialShape::Quartic {
                omega: (2.0 * a2).sqrt(),
                lambda: 2.0 * a4,
            },
            (false, true) => PotentialShape::PureQuartic { lambda: 2.0 * a4 },
            (false, false) => PotentialShape::General,
        }
    }

    /// `U(x) = Σ a₂ₖ x²ᵏ`.
    pub fn evaluate_u(&self, x: f64) -> f64 {
        horner(&self.u_coeffs, x * x)
    }

    /// `x·U′(x) = Σ 2k·a₂ₖ·x²ᵏ`.
    pub fn virial_integrand(&self, x: f64) -> f64 {
        horner(&self.virial_coeffs, x * x)
    }

    /// `Σ 8k·a₂ₖ·x²ᵏ`, the quantity under the square root of the ansatz exponent.
    pub fn radicand(&self, x: f64) -> f64 {
        4.0 * self.virial_integrand(x)
    }

    fn check_radicand(&self) -> Result<(), PotentialError> {
        if self.terms.iter().all(|t| t.coeff >= 0.0) {
            return Ok(());
        }
        // radicand = u·q(u) with q(u) = Σ_j 8(j+1)·a_{2(j+1)}·u^j; only the sign of q matters.
        let q: Vec<f64> = self.virial_coeffs[1..].iter().map(|c| 4.0 * c).collect();
        let reject = |u: f64| {
            let x = u.sqrt();
            Err(PotentialError::NegativeRadicand {
                x,
                value: self.radicand(x),
            })
        };

        // Sign just to the right of u = 0 is the sign of the lowest nonzero coefficient.
        if let Some(&c) = q.iter().find(|c| **c != 0.0) {
            if c < 0.0 {
                return reject(1e-8);
            }
        }

        let lead = *q.last().unwrap();
        let u_max = 1.0 + q.iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
        let dq: Vec<f64> = q
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c)
            .collect();
        let negative = |u: f64| {
            let scale = horner(&q.iter().map(|c| c.abs()).collect::<Vec<_>>(), u);
            horner(&q, u) < -1e-12 * scale
        };

        const SAMPLES: usize = 4096;
        let (lo, hi) = (1e-8f64.ln(), u_max.ln());
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=SAMPLES {
            let u = (lo + (hi - lo) * i as f64 / SAMPLES as f64).exp();
            if negative(u) {
                return reject(u);
            }
            let d = horner(&dq, u);
            if let Some((u0, d0)) = prev {
                if d0 < 0.0 && d >= 0.0 {
                    let um = bisect_root(&dq, u0, u);
                    if negative(um) {
                        return reject(um);
                    }
                }
            }
            prev = Some((u, d));
        }
        Ok(())
    }
}

impl TryFrom<PotentialSpec> for EvenPolynomialPotential {
    type Error = PotentialError;

    fn try_from(spec: PotentialSpec) -> Result<Self, Self::Error> {
        Self::validate(&spec.terms)
    }
}

impl From<EvenPolynomialPotential> for PotentialSpec {
    fn from(p: EvenPolynomialPotential) -> Self {
        PotentialSpec { terms: p.terms }
    }
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

// Root of a polynomial known to change sign from negative at `lo` to nonnegative at `hi`.
fn bisect_root(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if horner(coeffs, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
