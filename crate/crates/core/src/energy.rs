//! Ground-state energy from the ansatz, by the Hamiltonian expectation value
//! and by the multiplier relation `E = α/8`, plus comparison reports against
//! the finite-difference reference.

use serde_json::{json, Value};

use crate::ansatz::AnsatzWavefunction;
use crate::format::round_significant;
use crate::observables::{self, FisherReport};
use crate::potential::{EvenPolynomialPotential, PotentialShape};
use crate::quadrature::{self, QuadratureConfig};
use crate::reference_solver::{self, DEFAULT_POINTS};
use crate::{Error, Result};

/// Grid controls for the reference solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub points: usize,
    /// Overrides the automatic domain choice.
    pub half_width: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            points: DEFAULT_POINTS,
            half_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub potential: EvenPolynomialPotential,
    pub e_schrodinger: f64,
    pub e_fisher: f64,
    pub e_reference: Option<f64>,
    /// `e_fisher − e_reference`.
    pub gap_ansatz_vs_reference: Option<f64>,
    pub procedures_discrepancy: f64,
    pub cr_product: f64,
}

impl EnergyReport {
    /// `(ω, λ)` when the potential is of the form `½ω²x² + ½λx⁴`.
    pub fn quartic_parameters(&self) -> Option<(f64, f64)> {
        match self.potential.shape() {
            PotentialShape::Harmonic { omega } => Some((omega, 0.0)),
            PotentialShape::Quartic { omega, lambda } => Some((omega, lambda)),
            PotentialShape::PureQuartic { lambda } => Some((0.0, lambda)),
            PotentialShape::General => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let r = |x: f64| round_significant(x, 12);
        let (omega, lambda) = self
            .quartic_parameters()
            .map_or((Value::Null, Value::Null), |(w, l)| (json!(r(w)), json!(r(l))));
        json!({
            "omega": omega,
            "lambda": lambda,
            "E_schrodinger": r(self.e_schrodinger),
            "E_fisher": r(self.e_fisher),
            "E_num": self.e_reference.map(r),
            "gap": self.gap_ansatz_vs_reference.map(r),
            "procedures_discrepancy": r(self.procedures_discrepancy),
            "cr_product": r(self.cr_product),
            "potential": serde_json::to_value(&self.potential).expect("potential serialises"),
        })
    }
}

fn fisher_from_moments(aw: &AnsatzWavefunction, moments: &[(u32, f64)]) -> f64 {
    aw.potential()
        .terms()
        .iter()
        .map(|t| {
            let m = moments
                .iter()
                .find(|(p, _)| *p == t.degree)
                .map_or(0.0, |(_, m)| *m);
            (0.5 * t.degree as f64 + 1.0) * t.coeff * m
        })
        .sum()
}

/// `E = ⟨ψ|H|ψ⟩ = ⟨T⟩ + ⟨U⟩` with `⟨T⟩ = ½∫ψ′² = I/8`.
pub fn energy_schrodinger(aw: &AnsatzWavefunction) -> Result<f64> {
    let kinetic = observables::fisher_information_gradient(aw)? / 8.0;
    Ok(kinetic + observables::potential_expectation(aw)?)
}

/// `E = α/8 = Σ (k+1)·a₂ₖ·⟨x²ᵏ⟩`; for the quartic, `ω²⟨x²⟩ + (3/2)λ⟨x⁴⟩`.
pub fn energy_fisher(aw: &AnsatzWavefunction) -> Result<f64> {
    Ok(fisher_from_moments(aw, &observables::even_moments(aw)?))
}

/// `⟨ψ|H|ψ⟩` for the quartic ansatz written out through its local energy
///
/// ```text
/// (ω/2)(1 + 2λx²/ω²)^{1/2} + (λ/ω)x²(1 + 2λx²/ω²)^{−1/2} − (λ/2)x⁴
/// ```
///
/// integrated against `ψ²`.
pub fn energy_schrodinger_quartic_integrand(
    omega: f64,
    lambda: f64,
    aw: &AnsatzWavefunction,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "the quartic local energy needs omega > 0, got {omega}"
        )));
    }
    let expected = EvenPolynomialPotential::make_quartic(omega, lambda)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let same = close(expected.coefficient(2), aw.potential().coefficient(2))
        && close(expected.coefficient(4), aw.potential().coefficient(4))
        && aw.potential().max_degree() <= 4;
    if !same {
        return Err(Error::Domain(format!(
            "ansatz was not built for ½ω²x² + ½λx⁴ with ω = {omega}, λ = {lambda}"
        )));
    }

    let stretch = 2.0 * lambda / (omega * omega);
    let local = |x: f64| {
        let x2 = x * x;
        let root = (1.0 + stretch * x2).sqrt();
        0.5 * omega * root + lambda / omega * x2 / root - 0.5 * lambda * x2 * x2
    };
    let r = observables::tail_radius(aw, 4)?;
    Ok(quadrature::integrate_even(
        |x| local(x) * aw.pdf(x),
        r,
        aw.quadrature(),
    )?)
}

/// `⟨ψ_ansatz|ψ_ref⟩` by the grid inner product `Σ ψ_A(xᵢ)·ψᵢ·h`.
pub fn overlap_with_reference(aw: &AnsatzWavefunction, samples: &[(f64, f64)], spacing: f64) -> f64 {
    samples.iter().map(|&(x, y)| aw.psi(x) * y).sum::<f64>() * spacing
}

/// Builds the ansatz, runs both procedures and, when `reference` is given,
/// the finite-difference solver.
pub fn energy_report(
    p: &EvenPolynomialPotential,
    cfg: &QuadratureConfig,
    reference: Option<&SolverOptions>,
) -> Result<EnergyReport> {
    let aw = AnsatzWavefunction::build(p, cfg)?;
    let fisher: FisherReport = observables::fisher_report(&aw)?;
    let e_fisher = fisher_from_moments(&aw, &fisher.moments);
    let e_schrodinger = fisher.fisher_gradient / 8.0
        + observables::potential_from_moments(&aw, &fisher.moments);

    let e_reference = match reference {
        Some(opts) => {
            Some(reference_solver::solve(p, e_fisher, opts.points, opts.half_width)?.energy)
        }
        None => None,
    };

    Ok(EnergyReport {
        potential: p.clone(),
        e_schrodinger,
        e_fisher,
        gap_ansatz_vs_reference: e_reference.map(|e| e_fisher - e),
        e_reference,
        procedures_discrepancy: (e_schrodinger - e_fisher).abs(),
        cr_product: fisher.cr_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Term;
    use proptest::prelude::*;

    fn quartic(omega: f64, lambda: f64) -> EvenPolynomialPotential {
        EvenPolynomialPotential::make_quartic(omega, lambda).unwrap()
    }

    fn build(omega: f64, lambda: f64) -> AnsatzWavefunction {
        AnsatzWavefunction::build(&quartic(omega, lambda), &QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn harmonic_energies_are_exact() {
        for omega in [0.5, 1.0, 2.0, 5.0] {
            let aw = build(omega, 0.0);
            assert!((energy_schrodinger(&aw).unwrap() - 0.5 * omega).abs() < 1e-9);
            assert!((energy_fisher(&aw).unwrap() - 0.5 * omega).abs() < 1e-9);
        }
    }

    #[test]
    fn quartic_table_values() {
        let aw = build(1.0, 1.0);
        assert!((energy_schrodinger(&aw).unwrap() - 0.70188134).abs() < 1e-7);
        assert!((energy_fisher(&aw).unwrap() - 0.70188134).abs() < 1e-7);
        assert!((energy_schrodinger_quartic_integrand(1.0, 1.0, &aw).unwrap() - 0.70188134).abs() < 1e-7);

        let aw = build(1.0, 1e-4);
        assert!((energy_schrodinger(&aw).unwrap() - 0.50003749).abs() < 1e-7);

        let aw = build(1.0, 100.0);
        let e = energy_schrodinger_quartic_integrand(1.0, 100.0, &aw).unwrap();
        assert!((e - 2.57093830).abs() < 1e-6);
        assert!((e - energy_schrodinger(&aw).unwrap()).abs() < 1e-8);

        let aw = build(1.0, 1000.0);
        assert!((energy_fisher(&aw).unwrap() - 5.48276171).abs() < 1e-6);
    }

    #[test]
    fn quartic_integrand_limits_and_errors() {
        let aw = build(1.0, 1e-12);
        let e = energy_schrodinger_quartic_integrand(1.0, 1e-12, &aw).unwrap();
        assert!((e - 0.5).abs() < 1e-9);
        let pure = build(0.0, 1.0);
        assert!(matches!(
            energy_schrodinger_quartic_integrand(0.0, 1.0, &pure),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            energy_schrodinger_quartic_integrand(1.0, 2.0, &build(1.0, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fisher_energy_formula_for_quartic() {
        let aw = build(1.3, 2.0);
        let m2 = observables::moment(&aw, 2).unwrap();
        let m4 = observables::moment(&aw, 4).unwrap();
        let e = energy_fisher(&aw).unwrap();
        assert!((e - (1.69 * m2 + 1.5 * 2.0 * m4)).abs() < 1e-12);
    }

    #[test]
    fn reports_against_reference() {
        let cfg = QuadratureConfig::default();
        let opts = SolverOptions::default();
        let r = energy_report(&quartic(1.0, 1.0), &cfg, Some(&opts)).unwrap();
        assert!((r.e_reference.unwrap() - 0.69617582).abs() < 1e-6);
        assert!((r.e_fisher - 0.70188134).abs() < 1e-7);
        assert!((r.gap_ansatz_vs_reference.unwrap() - 0.0057).abs() < 1e-4);
        assert!(r.procedures_discrepancy < 1e-8);

        let r = energy_report(&quartic(1.0, 10.0), &cfg, Some(&opts)).unwrap();
        assert!((r.e_reference.unwrap() - 1.22458704).abs() < 1e-6);
        assert!((r.e_fisher - 1.25080186).abs() < 1e-7);

        let r = energy_report(&quartic(1.0, 0.0), &cfg, Some(&opts)).unwrap();
        assert!(r.gap_ansatz_vs_reference.unwrap().abs() < 1e-7);
        assert!((r.e_schrodinger - 0.5).abs() < 1e-9);

        let r = energy_report(&quartic(1.0, 0.0), &cfg, None).unwrap();
        assert!(r.e_reference.is_none());
        assert!(r.to_json()["E_num"].is_null());
    }

    #[test]
    fn overlaps_with_exact_ground_state() {
        for (lambda, lo) in [(1e-4, 0.9999999), (1000.0, 0.9)] {
            let p = quartic(1.0, lambda);
            let aw = build(1.0, lambda);
            let e = energy_fisher(&aw).unwrap();
            let (grid, samples) =
                reference_solver::solve_wavefunction(&p, e, DEFAULT_POINTS, None).unwrap();
            let s = overlap_with_reference(&aw, &samples, grid.spacing());
            assert!(s >= lo && s < 1.0, "λ={lambda}: overlap {s}");
        }
    }

    #[test]
    fn energy_increases_with_anharmonicity() {
        let es: Vec<f64> = [0.0, 0.1, 0.5, 2.0, 8.0, 40.0]
            .iter()
            .map(|&l| energy_fisher(&build(1.0, l)).unwrap())
            .collect();
        assert!(es.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn json_report() {
        let r = energy_report(&quartic(1.0, 1.0), &QuadratureConfig::default(), None).unwrap();
        let v = r.to_json();
        assert_eq!(v["omega"], json!(1.0));
        assert_eq!(v["lambda"], json!(1.0));
        assert!((v["E_fisher"].as_f64().unwrap() - 0.70188134).abs() < 1e-7);
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, serde_json::to_string(&r.to_json()).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn procedures_agree(raw in proptest::collection::vec((1u32..=4, 0.05f64..10.0), 1..4)) {
            let terms: Vec<Term> = raw.into_iter().map(|(k, c)| Term::new(2 * k, c)).collect();
            let p = EvenPolynomialPotential::validate(&terms).unwrap();
            let aw = AnsatzWavefunction::build(&p, &QuadratureConfig::default()).unwrap();
            let a = energy_schrodinger(&aw).unwrap();
            let b = energy_fisher(&aw).unwrap();
            prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
        }
    }
}
