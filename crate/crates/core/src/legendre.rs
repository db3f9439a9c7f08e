//! Legendre structure of the Fisher measure.
//!
//! Multipliers follow from the potential as `λ₂ₖ = −8·a₂ₖ`, the normalisation
//! multiplier is `α = I − Σ λ₂ₖ⟨x²ᵏ⟩ = 8E`, and in the moment representation
//! `I` solves the linear PDE `I + Σ (k/2)·⟨xᵏ⟩·∂I/∂⟨xᵏ⟩ = 0` with the closed
//! solution `I = Σ Cₖ·|⟨xᵏ⟩|^(−2/k)`.
//!
//! Moment and constant lists are `(k, value)` pairs keyed by the power `k`.

use serde_json::{json, Map, Value};

use crate::ansatz::AnsatzWavefunction;
use crate::format::round_significant;
use crate::observables::{self, moments_json};
use crate::potential::EvenPolynomialPotential;
use crate::Result;

/// Absolute floor of the finite-difference step.
const STEP_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LegendreError {
    #[error("ZeroMoment: ⟨x^{0}⟩ is zero")]
    ZeroMoment(u32),
    #[error("NonPositiveMoment: ⟨x^{power}⟩ = {value} is not positive")]
    NonPositiveMoment { power: u32, value: f64 },
    #[error("NonPositiveConstant: C_{power} = {value} is not positive")]
    NonPositiveConstant { power: u32, value: f64 },
    #[error("MismatchedPowers: constants and moments must cover the same powers")]
    MismatchedPowers,
    #[error("InvalidStep: finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreState {
    /// `(2k, λ₂ₖ)`.
    pub multipliers: Vec<(u32, f64)>,
    pub alpha: f64,
    pub moments: Vec<(u32, f64)>,
    /// Fisher information from the virial route.
    pub fisher: f64,
}

impl LegendreState {
    pub fn to_json(&self) -> Value {
        let multipliers: Map<String, Value> = self
            .multipliers
            .iter()
            .map(|(p, l)| (p.to_string(), json!(round_significant(*l, 12))))
            .collect();
        json!({
            "alpha": round_significant(self.alpha, 12),
            "multipliers": multipliers,
            "I": round_significant(self.fisher, 12),
            "moments": moments_json(&self.moments),
        })
    }
}

/// `λ₂ₖ = −8·a₂ₖ`, one per potential term.
pub fn multipliers_from_potential(p: &EvenPolynomialPotential) -> Vec<(u32, f64)> {
    p.terms().iter().map(|t| (t.degree, -8.0 * t.coeff)).collect()
}

pub fn legendre_state(aw: &AnsatzWavefunction) -> Result<LegendreState> {
    let moments = observables::even_moments(aw)?;
    let multipliers = multipliers_from_potential(aw.potential());
    let lookup = |power: u32| {
        moments
            .iter()
            .find(|(p, _)| *p == power)
            .map_or(0.0, |(_, m)| *m)
    };
    // Virial route: I = −Σ (k/2)·λₖ·⟨xᵏ⟩.
    let fisher: f64 = multipliers
        .iter()
        .map(|(k, l)| -0.5 * *k as f64 * l * lookup(*k))
        .sum();
    let alpha = fisher - multipliers.iter().map(|(k, l)| l * lookup(*k)).sum::<f64>();
    Ok(LegendreState {
        multipliers,
        alpha,
        moments,
        fisher,
    })
}

fn check_pairs(constants: &[(u32, f64)], moments: &[(u32, f64)]) -> Result<(), LegendreError> {
    if constants.len() != moments.len()
        || constants.iter().any(|(k, _)| !moments.iter().any(|(j, _)| j == k))
    {
        return Err(LegendreError::MismatchedPowers);
    }
    for &(power, value) in constants {
        if !(value > 0.0) || power == 0 {
            return Err(LegendreError::NonPositiveConstant { power, value });
        }
    }
    Ok(())
}

fn constant_for(constants: &[(u32, f64)], power: u32) -> f64 {
    constants
        .iter()
        .find(|(k, _)| *k == power)
        .map_or(0.0, |(_, c)| *c)
}

/// `I = Σ Cₖ·|⟨xᵏ⟩|^(−2/k)`.
pub fn fim_pde_solution(
    constants: &[(u32, f64)],
    moments: &[(u32, f64)],
) -> Result<f64, LegendreError> {
    check_pairs(constants, moments)?;
    moments
        .iter()
        .map(|&(k, m)| {
            if m == 0.0 {
                return Err(LegendreError::ZeroMoment(k));
            }
            Ok(constant_for(constants, k) * m.abs().powf(-2.0 / k as f64))
        })
        .sum()
}

/// Residual `I + Σ (k/2)·⟨xᵏ⟩·∂I/∂⟨xᵏ⟩` of an arbitrary `I(moments)`, with the
/// partial derivatives by central differences of size `max(step·|⟨xᵏ⟩|, 1e-8)`.
pub fn fim_pde_residual_of<F>(
    fisher: F,
    moments: &[(u32, f64)],
    step: f64,
) -> Result<f64, LegendreError>
where
    F: Fn(&[(u32, f64)]) -> Result<f64, LegendreError>,
{
    if !(step > 0.0) {
        return Err(LegendreError::InvalidStep(step));
    }
    let mut residual = fisher(moments)?;
    let mut probe = moments.to_vec();
    for (i, &(k, m)) in moments.iter().enumerate() {
        let h = (step * m.abs()).max(STEP_FLOOR);
        probe[i].1 = m + h;
        let up = fisher(&probe)?;
        probe[i].1 = m - h;
        let down = fisher(&probe)?;
        probe[i].1 = m;
        residual += 0.5 * k as f64 * m * (up - down) / (2.0 * h);
    }
    Ok(residual)
}

/// PDE residual of the closed solution `Σ Cₖ·|⟨xᵏ⟩|^(−2/k)`.
pub fn fim_pde_residual(
    constants: &[(u32, f64)],
    moments: &[(u32, f64)],
    step: f64,
) -> Result<f64, LegendreError> {
    for &(k, m) in moments {
        if m == 0.0 {
            return Err(LegendreError::ZeroMoment(k));
        }
    }
    fim_pde_residual_of(|ms| fim_pde_solution(constants, ms), moments, step)
}

/// `λₖ = ∂I/∂⟨xᵏ⟩ = −(2/k)·Cₖ·⟨xᵏ⟩^(−(2+k)/k)`.
pub fn multipliers_from_fim(
    constants: &[(u32, f64)],
    moments: &[(u32, f64)],
) -> Result<Vec<(u32, f64)>, LegendreError> {
    check_pairs(constants, moments)?;
    moments
        .iter()
        .map(|&(k, m)| {
            if !(m > 0.0) {
                return Err(LegendreError::NonPositiveMoment { power: k, value: m });
            }
            let kf = k as f64;
            Ok((
                k,
                -(2.0 / kf) * constant_for(constants, k) * m.powf(-(2.0 + kf) / kf),
            ))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocityCheck {
    /// `∂α/∂λ₂` by central differences.
    pub lhs: f64,
    /// `−⟨x²⟩`.
    pub rhs: f64,
    pub gap: f64,
}

/// Checks `∂α/∂λ₂ = −⟨x²⟩` on the harmonic closed forms
/// `α(λ₂) = 2√(−λ₂)`, `⟨x²⟩ = 1/(2ω)`, `λ₂ = −4ω²`.
pub fn reciprocity_check_harmonic(omega: f64, step: f64) -> ReciprocityCheck {
    let alpha = |l2: f64| 2.0 * (-l2).sqrt();
    let l2 = -4.0 * omega * omega;
    let h = (step * l2.abs()).max(STEP_FLOOR);
    let lhs = (alpha(l2 + h) - alpha(l2 - h)) / (2.0 * h);
    let rhs = -0.5 / omega;
    ReciprocityCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy;
    use crate::quadrature::QuadratureConfig;
    use proptest::prelude::*;

    fn build(omega: f64, lambda: f64) -> AnsatzWavefunction {
        let p = EvenPolynomialPotential::make_quartic(omega, lambda).unwrap();
        AnsatzWavefunction::build(&p, &QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn multipliers_from_coefficients() {
        let p = |w, l| EvenPolynomialPotential::make_quartic(w, l).unwrap();
        assert_eq!(multipliers_from_potential(&p(1.5, 0.0)), vec![(2, -4.0 * 2.25)]);
        assert_eq!(multipliers_from_potential(&p(1.0, 1.0)), vec![(2, -4.0), (4, -4.0)]);
        assert_eq!(multipliers_from_potential(&p(0.0, 1.0)), vec![(4, -4.0)]);
    }

    #[test]
    fn harmonic_alpha() {
        for omega in [1.0, 2.0] {
            let s = legendre_state(&build(omega, 0.0)).unwrap();
            assert!((s.alpha - 4.0 * omega).abs() < 1e-9);
            assert!((s.fisher - 2.0 * omega).abs() < 1e-9);
        }
    }

    #[test]
    fn quartic_alpha_is_eight_energies() {
        let aw = build(1.0, 1.0);
        let s = legendre_state(&aw).unwrap();
        assert!((s.alpha - 8.0 * 0.70188134).abs() < 1e-6);
        let e = energy::energy_fisher(&aw).unwrap();
        assert!((s.alpha - 8.0 * e).abs() < 1e-9);
        let v = s.to_json();
        assert_eq!(v["multipliers"]["4"], json!(-4.0));
    }

    #[test]
    fn closed_solution_values() {
        assert_eq!(fim_pde_solution(&[(2, 1.0)], &[(2, 0.5)]).unwrap(), 2.0);
        assert_eq!(fim_pde_solution(&[(2, 1.0)], &[(2, 1.0)]).unwrap(), 1.0);
        let i = fim_pde_solution(&[(2, 1.0), (4, 2.0)], &[(2, 0.5), (4, 0.25)]).unwrap();
        assert!((i - 6.0).abs() < 1e-15);
        assert_eq!(
            fim_pde_solution(&[(2, 1.0)], &[(2, 0.0)]),
            Err(LegendreError::ZeroMoment(2))
        );
        assert_eq!(
            fim_pde_solution(&[(2, 1.0)], &[(4, 1.0)]),
            Err(LegendreError::MismatchedPowers)
        );
        assert!(matches!(
            fim_pde_solution(&[(2, -1.0)], &[(2, 1.0)]),
            Err(LegendreError::NonPositiveConstant { .. })
        ));
    }

    #[test]
    fn residuals() {
        let r = fim_pde_residual(&[(2, 1.0)], &[(2, 0.5)], 1e-5).unwrap();
        assert!(r.abs() <= 1e-8);
        // I = ⟨x²⟩ is not a solution: the residual is 2⟨x²⟩.
        let m = 0.7;
        let r = fim_pde_residual_of(|ms| Ok(ms[0].1), &[(2, m)], 1e-5).unwrap();
        assert!((r - 2.0 * m).abs() < 1e-9);
        assert_eq!(
            fim_pde_residual(&[(2, 1.0)], &[(2, 1.0)], 0.0),
            Err(LegendreError::InvalidStep(0.0))
        );
    }

    #[test]
    fn multipliers_from_moments() {
        assert_eq!(multipliers_from_fim(&[(2, 1.0)], &[(2, 0.5)]).unwrap(), vec![(2, -4.0)]);
        assert_eq!(multipliers_from_fim(&[(2, 1.0)], &[(2, 1.0)]).unwrap(), vec![(2, -1.0)]);
        assert_eq!(multipliers_from_fim(&[(4, 1.0)], &[(4, 1.0)]).unwrap(), vec![(4, -0.5)]);
        assert!(matches!(
            multipliers_from_fim(&[(2, 1.0)], &[(2, -0.5)]),
            Err(LegendreError::NonPositiveMoment { .. })
        ));
    }

    #[test]
    fn harmonic_reciprocity() {
        let c = reciprocity_check_harmonic(1.0, 1e-5);
        assert!((c.lhs + 0.5).abs() < 1e-9 && c.rhs == -0.5 && c.gap <= 1e-9);
        let c = reciprocity_check_harmonic(2.0, 1e-5);
        assert!((c.lhs + 0.25).abs() < 1e-9 && c.gap <= 1e-9);
        let c = reciprocity_check_harmonic(0.5, 1e-4);
        assert!((c.rhs + 1.0).abs() < 1e-15 && c.gap <= 1e-7);
    }

    // Analytic partials of Σ Cₖ mₖ^(−2/k): −(2/k)·Cₖ·mₖ^(−2/k − 1).
    fn analytic_partial(c: f64, k: u32, m: f64) -> f64 {
        let kf = k as f64;
        -(2.0 / kf) * c * m.powf(-2.0 / kf - 1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn closed_solution_solves_the_pde(
            c4 in 0.5f64..5.0,
            m2 in 0.1f64..5.0,
            m4 in 0.1f64..5.0,
        ) {
            let constants = [(2, 1.0), (4, c4)];
            let moments = [(2, m2), (4, m4)];
            let r = fim_pde_residual(&constants, &moments, 1e-5).unwrap();
            prop_assert!(r.abs() <= 1e-7, "residual {}", r);

            // Oracle: the residual with exact derivatives vanishes identically.
            let i = fim_pde_solution(&constants, &moments).unwrap();
            let exact = i + m2 * analytic_partial(1.0, 2, m2) + 2.0 * m4 * analytic_partial(c4, 4, m4);
            prop_assert!(exact.abs() <= 1e-12 * i);

            // ∂I/∂⟨xᵏ⟩ = λₖ against central differences.
            let lambdas = multipliers_from_fim(&constants, &moments).unwrap();
            for (idx, &(k, m)) in moments.iter().enumerate() {
                let h = 1e-5 * m;
                let mut up = moments;
                let mut down = moments;
                up[idx].1 += h;
                down[idx].1 -= h;
                let fd = (fim_pde_solution(&constants, &up).unwrap()
                    - fim_pde_solution(&constants, &down).unwrap()) / (2.0 * h);
                prop_assert!((fd - lambdas[idx].1).abs() <= 1e-7 * lambdas[idx].1.abs().max(1.0));
                prop_assert!((lambdas[idx].1 - analytic_partial(constants[idx].1, k, m)).abs() <= 1e-12 * lambdas[idx].1.abs());
            }
        }

        #[test]
        fn closed_solution_is_decreasing_and_convex(c in 0.5f64..5.0, m in 0.1f64..5.0, k in prop::sample::select(vec![2u32, 4, 6])) {
            let i = |x: f64| fim_pde_solution(&[(k, c)], &[(k, x)]).unwrap();
            let h = 1e-3 * m;
            prop_assert!(i(m + h) < i(m));
            prop_assert!(i(m + h) + i(m - h) - 2.0 * i(m) > 0.0);
        }
    }
}
