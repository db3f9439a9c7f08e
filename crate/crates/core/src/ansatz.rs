//! The virial ground-state ansatz `ψ(x) = N·exp(−S(|x|))` with
//! `S(x) = ½ ∫₀^x √(Σ 8k·a₂ₖ·t²ᵏ) dt`.
//!
//! `S` is anchored at `S(0) = 0`; any other integration constant is absorbed
//! into `N`. Closed forms are used for the harmonic, quartic and pure quartic
//! families; everything else integrates the square root numerically.

use serde::Serialize;

use crate::potential::{EvenPolynomialPotential, PotentialShape};
use crate::quadrature::{self, QuadratureConfig, QuadratureError};
use crate::Result;

/// `S(R)` at the truncation radius: `exp(−2S) ≤ e⁻⁷⁰⁰` beyond it.
pub const TRUNCATION_THRESHOLD: f64 = 350.0;

// Number of tabulated exponent values on [0, R] in quadrature mode.
const EXPONENT_KNOTS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExponentMode {
    ClosedHarmonic,
    ClosedQuartic,
    ClosedPureQuartic,
    GeneralQuadrature,
}

/// How `build_with` picks the exponent evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentStrategy {
    /// Closed form when the potential has one, quadrature otherwise.
    #[default]
    Auto,
    ForceQuadrature,
}

#[derive(Debug, Clone, PartialEq)]
enum Exponent {
    Harmonic { omega: f64 },
    Quartic { omega: f64, lambda: f64 },
    PureQuartic { lambda: f64 },
    // S at evenly spaced knots j·spacing, j = 0..EXPONENT_KNOTS.
    Tabulated { spacing: f64, values: Vec<f64> },
}

/// `S(x) = ½ ∫₀^|x| √radicand(t) dt` by direct quadrature.
pub fn exponent_s(
    p: &EvenPolynomialPotential,
    x: f64,
    cfg: &QuadratureConfig,
) -> std::result::Result<f64, QuadratureError> {
    segment(p, 0.0, x.abs(), cfg)
}

/// Closed form of `S` for `½ω²x² + ½λx⁴`: `(ω³/6λ)[(1 + 2λx²/ω²)^{3/2} − 1]`.
pub fn exponent_s_closed_quartic(omega: f64, lambda: f64, x: f64) -> f64 {
    let u = 2.0 * lambda * x * x / (omega * omega);
    if u < 1e-8 {
        // (1+u)^{3/2} − 1 = (3/2)u·(1 + u/4 − u²/24 + …)
        return 0.5 * omega * x * x * (1.0 + u * (0.25 - u / 24.0));
    }
    omega.powi(3) / (6.0 * lambda) * (1.5 * u.ln_1p()).exp_m1()
}

/// `S = ωx²/2`.
pub fn exponent_s_harmonic(omega: f64, x: f64) -> f64 {
    0.5 * omega * x * x
}

/// `S = (√(2λ)/3)|x|³` for `U = ½λx⁴`.
pub fn exponent_s_pure_quartic(lambda: f64, x: f64) -> f64 {
    (2.0 * lambda).sqrt() / 3.0 * x.abs().powi(3)
}

fn segment(
    p: &EvenPolynomialPotential,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> std::result::Result<f64, QuadratureError> {
    if b <= a {
        return Ok(0.0);
    }
    let half_root = |t: f64| 0.5 * p.radicand(t).max(0.0).sqrt();
    match quadrature::integrate(half_root, a, b, cfg) {
        Ok(i) => Ok(i.value),
        // The integrand is smooth on [a, b] with a ≥ 0; a depth overrun here
        // only means the tolerance is below round-off.
        Err(QuadratureError::MaxDepthExceeded { value, .. }) => Ok(value),
        Err(e) => Err(e),
    }
}

/// A built, normalised ansatz. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzWavefunction {
    potential: EvenPolynomialPotential,
    norm_constant: f64,
    truncation_radius: f64,
    quadrature: QuadratureConfig,
    exponent: Exponent,
}

impl AnsatzWavefunction {
    pub fn build(p: &EvenPolynomialPotential, cfg: &QuadratureConfig) -> Result<Self> {
        Self::build_with(p, cfg, ExponentStrategy::Auto)
    }

    pub fn build_with(
        p: &EvenPolynomialPotential,
        cfg: &QuadratureConfig,
        strategy: ExponentStrategy,
    ) -> Result<Self> {
        cfg.validate()?;
        let shape = match strategy {
            ExponentStrategy::Auto => p.shape(),
            ExponentStrategy::ForceQuadrature => PotentialShape::General,
        };

        let (exponent, truncation_radius) = match shape {
            PotentialShape::Harmonic { omega } => {
                let e = Exponent::Harmonic { omega };
                let r = radius_for(&e, p, cfg)?;
                (e, r)
            }
            PotentialShape::Quartic { omega, lambda } => {
                let e = Exponent::Quartic { omega, lambda };
                let r = radius_for(&e, p, cfg)?;
                (e, r)
            }
            PotentialShape::PureQuartic { lambda } => {
                let e = Exponent::PureQuartic { lambda };
                let r = radius_for(&e, p, cfg)?;
                (e, r)
            }
            PotentialShape::General => {
                let r = quadrature::find_truncation_radius(
                    |x| exponent_s(p, x, cfg).unwrap_or(f64::NAN),
                    TRUNCATION_THRESHOLD,
                )?;
                let spacing = r / EXPONENT_KNOTS as f64;
                let mut values = Vec::with_capacity(EXPONENT_KNOTS + 1);
                let mut acc = 0.0;
                values.push(acc);
                for j in 0..EXPONENT_KNOTS {
                    let a = j as f64 * spacing;
                    let b = (j + 1) as f64 * spacing;
                    acc += segment(p, a, b, cfg)?;
                    values.push(acc);
                }
                (Exponent::Tabulated { spacing, values }, r)
            }
        };

        let mut aw = Self {
            potential: p.clone(),
            norm_constant: 1.0,
            truncation_radius,
            quadrature: *cfg,
            exponent,
        };
        // With N = 1, pdf = exp(−2S).
        let mass = quadrature::integrate_even(|x| aw.pdf(x), truncation_radius, cfg)?;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(QuadratureError::NonFiniteIntegrand { x: 0.0 }.into());
        }
        aw.norm_constant = mass.sqrt().recip();
        Ok(aw)
    }

    pub fn potential(&self) -> &EvenPolynomialPotential {
        &self.potential
    }

    /// The `N` of `ψ = N·exp(−S)`.
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    pub fn exponent_mode(&self) -> ExponentMode {
        match self.exponent {
            Exponent::Harmonic { .. } => ExponentMode::ClosedHarmonic,
            Exponent::Quartic { .. } => ExponentMode::ClosedQuartic,
            Exponent::PureQuartic { .. } => ExponentMode::ClosedPureQuartic,
            Exponent::Tabulated { .. } => ExponentMode::GeneralQuadrature,
        }
    }

    /// `S(|x|)`. NaN if the exponent quadrature fails, which downstream
    /// integrators report as a non-finite integrand.
    pub fn exponent(&self, x: f64) -> f64 {
        let x = x.abs();
        match &self.exponent {
            Exponent::Harmonic { omega } => exponent_s_harmonic(*omega, x),
            Exponent::Quartic { omega, lambda } => exponent_s_closed_quartic(*omega, *lambda, x),
            Exponent::PureQuartic { lambda } => exponent_s_pure_quartic(*lambda, x),
            Exponent::Tabulated { spacing, values } => {
                let j = ((x / spacing).floor() as usize).min(values.len() - 1);
                let start = j as f64 * spacing;
                segment(&self.potential, start, x, &self.quadrature)
                    .map_or(f64::NAN, |tail| values[j] + tail)
            }
        }
    }

    /// `dS/dx = sign(x)·½√radicand(x)`, exact for every mode.
    pub fn exponent_derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        0.5 * self.potential.radicand(x).max(0.0).sqrt() * x.signum()
    }

    pub fn psi(&self, x: f64) -> f64 {
        self.norm_constant * (-self.exponent(x)).exp()
    }

    /// `ψ′(x) = −S′(x)·ψ(x)`.
    pub fn psi_derivative(&self, x: f64) -> f64 {
        -self.exponent_derivative(x) * self.psi(x)
    }

    /// The probability density `f = ψ²`.
    pub fn pdf(&self, x: f64) -> f64 {
        let psi = self.psi(x);
        psi * psi
    }
}

fn radius_for(
    e: &Exponent,
    p: &EvenPolynomialPotential,
    cfg: &QuadratureConfig,
) -> std::result::Result<f64, QuadratureError> {
    let probe = AnsatzWavefunction {
        potential: p.clone(),
        norm_constant: 1.0,
        truncation_radius: 0.0,
        quadrature: *cfg,
        exponent: e.clone(),
    };
    quadrature::find_truncation_radius(|x| probe.exponent(x), TRUNCATION_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Term;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn quartic(omega: f64, lambda: f64) -> EvenPolynomialPotential {
        EvenPolynomialPotential::make_quartic(omega, lambda).unwrap()
    }

    #[test]
    fn harmonic_exponent_by_quadrature() {
        let omega = 1.3;
        let p = quartic(omega, 0.0);
        for x in [0.0, 0.4, -1.7, 3.0] {
            let s = exponent_s(&p, x, &cfg()).unwrap();
            assert!((s - omega * x * x / 2.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn closed_quartic_values() {
        assert_eq!(exponent_s_closed_quartic(1.0, 1.0, 0.0), 0.0);
        let expect = (3.0 * 3f64.sqrt() - 1.0) / 6.0;
        assert!((exponent_s_closed_quartic(1.0, 1.0, 1.0) - expect).abs() < 1e-15);
        assert!((expect - 0.6993587).abs() < 1e-7);
        // ½∫₀¹ √(4t² + 8t⁴) dt
        let by_quadrature = exponent_s(&quartic(1.0, 1.0), 1.0, &cfg()).unwrap();
        assert!((by_quadrature - expect).abs() < 1e-12);

        assert!((exponent_s_closed_quartic(1.0, 1e-12, 2.0) - 2.0).abs() < 1e-10);
        // Both branches agree with the other branch's formula at the switch.
        for u in [0.999e-8f64, 1.001e-8] {
            let lambda = u / 2.0;
            let series = 0.5 * (1.0 + u * (0.25 - u / 24.0));
            let direct = (1.5 * u.ln_1p()).exp_m1() / (6.0 * lambda);
            let s = exponent_s_closed_quartic(1.0, lambda, 1.0);
            assert!((s - series).abs() < 1e-15 && (s - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_quartic_exponent() {
        let lambda = 2.0;
        let p = quartic(0.0, lambda);
        for x in [0.5, -1.2, 2.0] {
            let s = exponent_s(&p, x, &cfg()).unwrap();
            let expect = (2.0 * lambda).sqrt() / 3.0 * x.abs().powi(3);
            assert!((s - expect).abs() < 1e-12);
            assert_eq!(exponent_s_pure_quartic(lambda, x), expect);
        }
    }

    #[test]
    fn harmonic_build_is_exact() {
        for omega in [0.5, 1.0, 2.0] {
            let aw = AnsatzWavefunction::build(&quartic(omega, 0.0), &cfg()).unwrap();
            assert_eq!(aw.exponent_mode(), ExponentMode::ClosedHarmonic);
            let n = (omega / PI).powf(0.25);
            assert!((aw.norm_constant() - n).abs() < 1e-10);
            for x in [0.0, 0.3, -1.1] {
                let f = (omega / PI).sqrt() * (-omega * x * x).exp();
                assert!((aw.pdf(x) - f).abs() < 1e-10);
            }
            let s_r = aw.exponent(aw.truncation_radius());
            assert!((TRUNCATION_THRESHOLD..=2.0 * TRUNCATION_THRESHOLD).contains(&s_r));
        }
        let aw = AnsatzWavefunction::build(&quartic(1.0, 0.0), &cfg()).unwrap();
        assert!((aw.psi(0.0) - 0.7511255).abs() < 1e-7);
    }

    #[test]
    fn truncation_radius_matches_closed_form() {
        let aw = AnsatzWavefunction::build(&quartic(1.0, 1.0), &cfg()).unwrap();
        let r = aw.truncation_radius();
        let s = exponent_s_closed_quartic(1.0, 1.0, r);
        assert!((350.0..=700.0).contains(&s), "S(R) = {s}");
        // Inverting the closed form: S = 350 at x² = ((1 + 6λS/ω³)^{2/3} − 1)·ω²/(2λ).
        let r350 = (((1.0 + 6.0 * 350.0f64).powf(2.0 / 3.0) - 1.0) / 2.0).sqrt();
        let r700 = (((1.0 + 6.0 * 700.0f64).powf(2.0 / 3.0) - 1.0) / 2.0).sqrt();
        assert!(r >= r350 - 1e-12 && r <= r700 + 1e-12);
    }

    fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (0.5 * (f(a) + f(b)) + inner)
    }

    #[test]
    fn pure_quartic_normalisation_matches_trapezoid() {
        let aw = AnsatzWavefunction::build(&quartic(0.0, 1.0), &cfg()).unwrap();
        assert_eq!(aw.exponent_mode(), ExponentMode::ClosedPureQuartic);
        let c = 2.0 * 2f64.sqrt() / 3.0;
        let mass = trapezoid(|x| (-c * x.abs().powi(3)).exp(), -10.0, 10.0, 1_000_000);
        let n = mass.sqrt().recip();
        assert!((aw.norm_constant() - n).abs() < 1e-9);
        let f0 = n * n;
        assert!((aw.pdf(0.0) - f0).abs() < 1e-9);
    }

    #[test]
    fn deep_tail_underflows() {
        let aw = AnsatzWavefunction::build(&quartic(1.0, 1.0), &cfg()).unwrap();
        let s10 = exponent_s_closed_quartic(1.0, 1.0, 10.0);
        assert!((s10 - (201f64.powf(1.5) - 1.0) / 6.0).abs() < 1e-9);
        assert!(aw.pdf(10.0) < 1e-300);
    }

    #[test]
    fn forced_quadrature_reproduces_closed_forms() {
        for p in [quartic(1.0, 0.0), quartic(1.0, 1.0), quartic(0.0, 1.0), quartic(0.7, 20.0)] {
            let closed = AnsatzWavefunction::build(&p, &cfg()).unwrap();
            let general =
                AnsatzWavefunction::build_with(&p, &cfg(), ExponentStrategy::ForceQuadrature)
                    .unwrap();
            assert_eq!(general.exponent_mode(), ExponentMode::GeneralQuadrature);
            assert!((closed.norm_constant() - general.norm_constant()).abs() < 1e-10);
            for x in [0.0, 0.25, -0.9, 1.6, 2.9] {
                assert!((closed.exponent(x) - general.exponent(x)).abs() < 1e-10, "x={x}");
                assert!((closed.pdf(x) - general.pdf(x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn general_potential_builds_and_normalises() {
        let p = EvenPolynomialPotential::validate(&[
            Term::new(2, 0.3),
            Term::new(6, 2.0),
            Term::new(8, 0.1),
        ])
        .unwrap();
        let aw = AnsatzWavefunction::build(&p, &cfg()).unwrap();
        assert_eq!(aw.exponent_mode(), ExponentMode::GeneralQuadrature);
        let mass = quadrature::integrate(|x| aw.pdf(x), -aw.truncation_radius(), aw.truncation_radius(), &cfg())
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limits_of_the_quartic_family() {
        let near_ho = AnsatzWavefunction::build(&quartic(1.0, 1e-10), &cfg()).unwrap();
        let ho = AnsatzWavefunction::build(&quartic(1.0, 0.0), &cfg()).unwrap();
        let near_pure = AnsatzWavefunction::build(&quartic(1e-6, 1.0), &cfg()).unwrap();
        let pure = AnsatzWavefunction::build(&quartic(0.0, 1.0), &cfg()).unwrap();
        for i in 0..=60 {
            let x = -3.0 + 0.1 * i as f64;
            assert!((near_ho.psi(x) - ho.psi(x)).abs() < 1e-7);
            assert!((near_pure.psi(x) - pure.psi(x)).abs() < 1e-6);
        }
    }

    fn arb_potential() -> impl Strategy<Value = EvenPolynomialPotential> {
        proptest::collection::vec((1u32..=4, 0.05f64..10.0), 1..4).prop_map(|raw| {
            let terms: Vec<Term> = raw.into_iter().map(|(k, c)| Term::new(2 * k, c)).collect();
            EvenPolynomialPotential::validate(&terms).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn built_ansatz_is_normalised_and_even(p in arb_potential(), x in 0.01f64..2.0) {
            let aw = AnsatzWavefunction::build(&p, &cfg()).unwrap();
            let mass = quadrature::integrate_even(|t| aw.pdf(t), aw.truncation_radius(), &cfg()).unwrap();
            prop_assert!((mass - 1.0).abs() < 1e-9);
            prop_assert_eq!(aw.pdf(x), aw.pdf(-x));
            prop_assert_eq!(aw.pdf(x), aw.psi(x) * aw.psi(x));
            prop_assert!(aw.psi(0.0) >= aw.psi(x));
            prop_assert!(aw.psi(x) > 0.0 || aw.exponent(x) > 700.0);
        }

        #[test]
        fn pointwise_virial_identity(p in arb_potential(), x in 0.05f64..1.5) {
            let aw = AnsatzWavefunction::build_with(&p, &cfg(), ExponentStrategy::ForceQuadrature).unwrap();
            let h = 1e-4 * x;
            let fd = (aw.exponent(x + h) - aw.exponent(x - h)) / (2.0 * h);
            let analytic = aw.exponent_derivative(x);
            prop_assert!((fd - analytic).abs() <= 1e-6 * analytic.abs(), "{} vs {}", fd, analytic);
            prop_assert!((4.0 * analytic * analytic - p.radicand(x)).abs() <= 1e-12 * p.radicand(x));
        }

        #[test]
        fn closed_quartic_matches_quadrature(
            omega in 0.1f64..3.0,
            log_lambda in -3.0f64..3.0,
            x in -3.0f64..3.0,
        ) {
            let lambda = 10f64.powf(log_lambda);
            let p = quartic(omega, lambda);
            let closed = exponent_s_closed_quartic(omega, lambda, x);
            let numeric = exponent_s(&p, x, &cfg()).unwrap();
            prop_assert!((closed - numeric).abs() <= 1e-9, "{} vs {}", closed, numeric);
        }
    }
}
