//! Expectation values over the ansatz density: even moments, `⟨U⟩` and the
//! Fisher information, the latter by two independent routes.

use serde_json::{json, Map, Value};

use crate::ansatz::{AnsatzWavefunction, TRUNCATION_THRESHOLD};
use crate::format::round_significant;
use crate::quadrature;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    /// `I = 4∫ψ′² dx`.
    pub fisher_gradient: f64,
    /// `I = 4⟨x·U′⟩ = 8·Σ k·a₂ₖ·⟨x²ᵏ⟩`.
    pub fisher_virial: f64,
    /// `(2k, ⟨x²ᵏ⟩)` for every even power up to the potential's degree.
    pub moments: Vec<(u32, f64)>,
    /// `I·⟨x²⟩`, bounded below by 1 (Cramér–Rao).
    pub cr_product: f64,
    pub discrepancy: f64,
}

impl FisherReport {
    pub fn moment(&self, power: u32) -> Option<f64> {
        self.moments
            .iter()
            .find(|(p, _)| *p == power)
            .map(|(_, m)| *m)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "I_gradient": round_significant(self.fisher_gradient, 12),
            "I_virial": round_significant(self.fisher_virial, 12),
            "moments": moments_json(&self.moments),
            "cr_product": round_significant(self.cr_product, 12),
            "discrepancy": round_significant(self.discrepancy, 12),
        })
    }
}

pub(crate) fn moments_json(moments: &[(u32, f64)]) -> Value {
    let map: Map<String, Value> = moments
        .iter()
        .map(|(p, m)| (p.to_string(), json!(round_significant(*m, 12))))
        .collect();
    Value::Object(map)
}

/// Radius beyond which `xᵖ·pdf(x) ≤ N²·e⁻⁷⁰⁰`: solves `S(x) − (p/2)·ln x ≥ 350`.
pub(crate) fn tail_radius(aw: &AnsatzWavefunction, power: u32) -> Result<f64> {
    if power == 0 {
        return Ok(aw.truncation_radius());
    }
    let half_power = 0.5 * power as f64;
    let r = quadrature::find_truncation_radius(
        |x| aw.exponent(x) - half_power * x.max(1.0).ln(),
        TRUNCATION_THRESHOLD,
    )?;
    Ok(r)
}

/// `⟨xᵖ⟩ = ∫ xᵖ·pdf(x) dx`; exactly zero for odd `p`.
pub fn moment(aw: &AnsatzWavefunction, power: u32) -> Result<f64> {
    if power % 2 == 1 {
        return Ok(0.0);
    }
    let r = tail_radius(aw, power)?;
    let p = power as i32;
    Ok(quadrature::integrate_even(
        |x| x.powi(p) * aw.pdf(x),
        r,
        aw.quadrature(),
    )?)
}

/// Even moments `⟨x²⟩, ⟨x⁴⟩, …` up to the potential's degree (at least `⟨x²⟩`).
pub fn even_moments(aw: &AnsatzWavefunction) -> Result<Vec<(u32, f64)>> {
    let top = aw.potential().max_degree().max(2);
    (1..=top / 2)
        .map(|k| Ok((2 * k, moment(aw, 2 * k)?)))
        .collect()
}

/// `I = 4∫ψ′² dx = 4∫S′²·pdf dx`, with `S′ = ½√radicand` evaluated analytically.
pub fn fisher_information_gradient(aw: &AnsatzWavefunction) -> Result<f64> {
    let r = tail_radius(aw, aw.potential().max_degree())?;
    let value = quadrature::integrate_even(
        |x| {
            let ds = aw.exponent_derivative(x);
            4.0 * ds * ds * aw.pdf(x)
        },
        r,
        aw.quadrature(),
    )?;
    Ok(value)
}

fn virial_from_moments(aw: &AnsatzWavefunction, moments: &[(u32, f64)]) -> f64 {
    aw.potential()
        .terms()
        .iter()
        .map(|t| {
            let m = moments
                .iter()
                .find(|(p, _)| *p == t.degree)
                .map_or(0.0, |(_, m)| *m);
            4.0 * t.degree as f64 * t.coeff * m
        })
        .sum()
}

/// `I = 4⟨x·U′⟩ = 8·Σ k·a₂ₖ·⟨x²ᵏ⟩`, from the even moments alone.
pub fn fisher_information_virial(aw: &AnsatzWavefunction) -> Result<f64> {
    Ok(virial_from_moments(aw, &even_moments(aw)?))
}

pub(crate) fn potential_from_moments(aw: &AnsatzWavefunction, moments: &[(u32, f64)]) -> f64 {
    aw.potential()
        .terms()
        .iter()
        .map(|t| {
            t.coeff
                * moments
                    .iter()
                    .find(|(p, _)| *p == t.degree)
                    .map_or(0.0, |(_, m)| *m)
        })
        .sum()
}

/// `⟨U⟩ = Σ a₂ₖ·⟨x²ᵏ⟩`.
pub fn potential_expectation(aw: &AnsatzWavefunction) -> Result<f64> {
    Ok(potential_from_moments(aw, &even_moments(aw)?))
}

pub fn fisher_report(aw: &AnsatzWavefunction) -> Result<FisherReport> {
    let moments = even_moments(aw)?;
    let fisher_virial = virial_from_moments(aw, &moments);
    let fisher_gradient = fisher_information_gradient(aw)?;
    let second = moments[0].1;
    Ok(FisherReport {
        fisher_gradient,
        fisher_virial,
        cr_product: fisher_virial * second,
        discrepancy: (fisher_gradient - fisher_virial).abs(),
        moments,
    })
}
