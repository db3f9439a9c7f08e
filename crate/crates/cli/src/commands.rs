use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};
use viransatz::ansatz::AnsatzWavefunction;
use viransatz::energy::{self, EnergyReport};
use viransatz::{legendre, observables, quadrature, reference_solver, round_significant};
use viransatz::{EvenPolynomialPotential, QuadratureConfig};

use crate::{CliError, EnergyArgs, FisherArgs, Format, TableArgs, VerifyArgs, WavefunctionArgs};

pub(crate) const DEFAULT_LAMBDAS: [f64; 8] = [1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0];

/// Exponent value at which the default wavefunction window ends (ψ ≈ 2e-9·ψ(0)).
const WINDOW_EXPONENT: f64 = 20.0;

/// 12 significant digits; exponent notation outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let r = round_significant(x, 12);
    if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn describe(p: &EvenPolynomialPotential) -> String {
    p.terms()
        .iter()
        .map(|t| format!("{}·x^{}", t.coeff, t.degree))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn build(p: &EvenPolynomialPotential, cfg: &QuadratureConfig) -> Result<AnsatzWavefunction, CliError> {
    Ok(AnsatzWavefunction::build(p, cfg)?)
}

fn energy_rows(r: &EnergyReport) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("E_schrodinger", Some(r.e_schrodinger)),
        ("E_fisher", Some(r.e_fisher)),
        ("E_num", r.e_reference),
        ("gap", r.gap_ansatz_vs_reference),
        ("procedures_discrepancy", Some(r.procedures_discrepancy)),
        ("cr_product", Some(r.cr_product)),
    ]
}

pub(crate) fn energy(a: &EnergyArgs) -> Result<(), CliError> {
    let p = a.potential.resolve()?;
    let cfg = a.tol.config()?;
    let opts = a.grid.options();
    let report = energy::energy_report(&p, &cfg, (!a.no_reference).then_some(&opts))?;
    let text = match a.out.format {
        Format::Json => json_text(&report.to_json()),
        Format::Csv => {
            let rows = energy_rows(&report);
            let header: Vec<&str> = rows.iter().map(|(k, _)| *k).collect();
            csv_text(&header, &[rows.iter().map(|(_, v)| opt_num(*v)).collect()])
        }
        Format::Table => {
            let mut s = format!("{:<24}{}\n", "U(x)", describe(&p));
            for (k, v) in energy_rows(&report) {
                let cell = match (k, v) {
                    (_, None) => "-".to_string(),
                    ("procedures_discrepancy", Some(v)) => format!("{v:.3e}"),
                    ("cr_product", Some(v)) => format!("{v:.9}"),
                    (_, Some(v)) => format!("{v:.8}"),
                };
                writeln!(s, "{k:<24}{cell}").unwrap();
            }
            s
        }
    };
    a.out.emit(&text)
}

struct TableRow {
    lambda: f64,
    result: Result<EnergyReport, CliError>,
}

pub(crate) fn table(a: &TableArgs) -> Result<(), CliError> {
    let cfg = a.tol.config()?;
    let opts = a.grid.options();
    let reference = (!a.no_reference).then_some(&opts);
    let rows: Vec<TableRow> = a
        .lambdas
        .par_iter()
        .map(|&lambda| TableRow {
            lambda,
            result: EvenPolynomialPotential::make_quartic(a.omega, lambda)
                .map_err(|e| CliError::Input(e.to_string()))
                .and_then(|p| Ok(energy::energy_report(&p, &cfg, reference)?)),
        })
        .collect();

    let text = match a.out.format {
        Format::Json => {
            let entries: Vec<Value> = rows
                .iter()
                .map(|r| match &r.result {
                    Ok(rep) => rep.to_json(),
                    Err(e) => json!({ "lambda": round_significant(r.lambda, 12), "error": e.to_string() }),
                })
                .collect();
            json_text(&json!({ "omega": round_significant(a.omega, 12), "rows": entries }))
        }
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| match &r.result {
                    Ok(rep) => vec![
                        num(r.lambda),
                        opt_num(rep.e_reference),
                        num(rep.e_fisher),
                        num(rep.cr_product),
                        String::new(),
                    ],
                    Err(e) => vec![
                        num(r.lambda),
                        String::new(),
                        String::new(),
                        String::new(),
                        format!("\"{}\"", e.to_string().replace('"', "'")),
                    ],
                })
                .collect();
            csv_text(&["lambda", "E_num", "E", "cr_product", "error"], &body)
        }
        Format::Table => {
            let mut s = format!("{:<10}{:>14}{:>14}{:>14}\n", "λ", "E_num", "E", "I<x²>");
            for r in &rows {
                match &r.result {
                    Ok(rep) => {
                        let e_num = rep
                            .e_reference
                            .map_or_else(|| "-".to_string(), |e| format!("{e:.8}"));
                        writeln!(
                            s,
                            "{:<10}{:>14}{:>14.8}{:>14.9}",
                            r.lambda, e_num, rep.e_fisher, rep.cr_product
                        )
                        .unwrap();
                    }
                    Err(e) => writeln!(s, "{:<10}  error: {e}", r.lambda).unwrap(),
                }
            }
            s
        }
    };
    a.out.emit(&text)?;

    let failures: Vec<&TableRow> = rows.iter().filter(|r| r.result.is_err()).collect();
    match failures.first() {
        None => Ok(()),
        Some(first) => {
            let msg = format!("{} of {} rows failed", failures.len(), rows.len());
            Err(match first.result.as_ref().unwrap_err() {
                CliError::Input(_) => CliError::Input(msg),
                _ => CliError::Numerical(msg),
            })
        }
    }
}

pub(crate) fn fisher(a: &FisherArgs) -> Result<(), CliError> {
    let p = a.potential.resolve()?;
    let aw = build(&p, &a.tol.config()?)?;
    let report = observables::fisher_report(&aw)?;
    let mut rows: Vec<(String, f64)> = vec![
        ("I_gradient".into(), report.fisher_gradient),
        ("I_virial".into(), report.fisher_virial),
    ];
    rows.extend(report.moments.iter().map(|(k, m)| (format!("<x^{k}>"), *m)));
    rows.push(("cr_product".into(), report.cr_product));
    rows.push(("discrepancy".into(), report.discrepancy));

    let text = match a.out.format {
        Format::Json => json_text(&report.to_json()),
        Format::Csv => {
            let body: Vec<Vec<String>> = rows.iter().map(|(k, v)| vec![k.clone(), num(*v)]).collect();
            csv_text(&["quantity", "value"], &body)
        }
        Format::Table => rows
            .iter()
            .map(|(k, v)| {
                if k == "discrepancy" {
                    format!("{k:<16}{v:.3e}\n")
                } else {
                    format!("{k:<16}{v:.10}\n")
                }
            })
            .collect(),
    };
    a.out.emit(&text)
}

/// Smallest `x ≥ 0` with `S(x) = target`, by bisection on the monotone exponent.
fn exponent_window(aw: &AnsatzWavefunction, target: f64) -> Result<f64, CliError> {
    let mut hi = quadrature::find_truncation_radius(|x| aw.exponent(x), target)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if aw.exponent(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

pub(crate) fn wavefunction(a: &WavefunctionArgs) -> Result<(), CliError> {
    if a.samples < 2 {
        return Err(CliError::Input("--samples must be at least 2".into()));
    }
    if let Some(e) = a.extent {
        if !(e > 0.0 && e.is_finite()) {
            return Err(CliError::Input(format!("--extent must be positive, got {e}")));
        }
    }
    let p = a.potential.resolve()?;
    let aw = build(&p, &a.tol.config()?)?;
    let extent = match a.extent {
        Some(e) => e,
        None => exponent_window(&aw, WINDOW_EXPONENT)?,
    };
    let n = a.samples;
    let targets = (0..n).map(|i| -extent + 2.0 * extent * i as f64 / (n - 1) as f64);

    let samples: Vec<(f64, f64)> = if a.exact {
        let hint = energy::energy_fisher(&aw)?;
        let (grid, psi) = reference_solver::solve_wavefunction(
            &p,
            hint,
            a.grid.grid_points,
            a.grid.half_width,
        )
        .map_err(viransatz::Error::from)?;
        let last = grid.points() - 1;
        targets
            .map(|x| {
                let i = ((x + grid.half_width()) / grid.spacing()).round();
                psi[(i.max(0.0) as usize).min(last)]
            })
            .collect()
    } else {
        targets.map(|x| (x, aw.psi(x))).collect()
    };

    let text = match a.out.format {
        Format::Json => {
            let pts: Vec<Value> = samples
                .iter()
                .map(|&(x, y)| {
                    json!({
                        "x": round_significant(x, 12),
                        "psi": round_significant(y, 12),
                        "pdf": round_significant(y * y, 12),
                    })
                })
                .collect();
            json_text(&json!({ "samples": pts }))
        }
        Format::Csv | Format::Table => {
            let body: Vec<Vec<String>> = samples
                .iter()
                .map(|&(x, y)| vec![num(x), num(y), num(y * y)])
                .collect();
            csv_text(&["x", "psi", "pdf"], &body)
        }
    };
    a.out.emit(&text)
}

struct Property {
    name: &'static str,
    value: f64,
    /// Human-readable acceptance condition.
    condition: String,
    pass: bool,
}

fn at_most(name: &'static str, value: f64, tol: f64) -> Property {
    Property {
        name,
        value,
        condition: format!("<= {tol:e}"),
        pass: value.abs() <= tol,
    }
}

fn at_least(name: &'static str, value: f64, floor: f64) -> Property {
    Property {
        name,
        value,
        condition: format!(">= {floor:e}"),
        pass: value >= floor,
    }
}

/// Largest relative deviation of the finite-difference `S′` from `√(x·U′)`
/// over the sampling window.
fn virial_residual(aw: &AnsatzWavefunction, window: f64) -> f64 {
    let p = aw.potential();
    (1..=200)
        .map(|i| {
            let x = window * i as f64 / 200.0;
            let h = 1e-5 * x.max(1.0);
            let fd = (aw.exponent(x + h) - aw.exponent(x - h)) / (2.0 * h);
            let exact = p.virial_integrand(x).max(0.0).sqrt();
            (fd - exact).abs() / exact.max(1.0)
        })
        .fold(0.0, f64::max)
}

pub(crate) fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let p = a.potential.resolve()?;
    let aw = build(&p, &a.tol.config()?)?;
    let fisher = observables::fisher_report(&aw)?;
    let e_s = energy::energy_schrodinger(&aw)?;
    let e_f = energy::energy_fisher(&aw)?;
    let state = legendre::legendre_state(&aw)?;
    let window = exponent_window(&aw, WINDOW_EXPONENT)?;

    let a2 = p.coefficient(2);
    let omega = if a2 > 0.0 { (2.0 * a2).sqrt() } else { 1.0 };
    let unit_constants: Vec<(u32, f64)> = fisher.moments.iter().map(|&(k, _)| (k, 1.0)).collect();
    let pde = legendre::fim_pde_residual(&unit_constants, &fisher.moments, 1e-5)
        .map_err(viransatz::Error::from)?;
    let harmonic = p.terms().len() == 1 && p.max_degree() == 2;

    let mut props = vec![
        at_most("procedure_identity", e_s - e_f, 1e-8),
        at_most("fisher_routes", fisher.discrepancy, 1e-8),
        at_most("virial_residual", virial_residual(&aw, window), 1e-6),
        at_most("normalization", observables::moment(&aw, 0)? - 1.0, 1e-10),
        at_most("reciprocity", legendre::reciprocity_check_harmonic(omega, 1e-5).gap, 1e-8),
        at_most("pde_residual", pde, 1e-7),
        if harmonic {
            at_most("cramer_rao", fisher.cr_product - 1.0, 1e-9)
        } else {
            at_least("cramer_rao", fisher.cr_product - 1.0, 0.0)
        },
        at_most("alpha_equals_8E", 8.0 * e_f - state.alpha, 1e-9),
    ];
    if !a.no_reference {
        let opts = a.grid.options();
        let e_num = reference_solver::solve(&p, e_f, opts.points, opts.half_width)
            .map_err(viransatz::Error::from)?
            .energy;
        props.push(at_least("variational_bound", e_f - e_num, -1e-9));
    }

    let text = match a.out.format {
        Format::Json => {
            let list: Vec<Value> = props
                .iter()
                .map(|p| {
                    json!({
                        "name": p.name,
                        "value": round_significant(p.value, 12),
                        "condition": p.condition,
                        "pass": p.pass,
                    })
                })
                .collect();
            json_text(&json!({ "properties": list, "all_pass": props.iter().all(|p| p.pass) }))
        }
        Format::Csv => {
            let body: Vec<Vec<String>> = props
                .iter()
                .map(|p| vec![p.name.to_string(), num(p.value), p.condition.clone(), p.pass.to_string()])
                .collect();
            csv_text(&["property", "value", "condition", "pass"], &body)
        }
        Format::Table => props
            .iter()
            .map(|p| {
                format!(
                    "{} {:<20}{:>12.3e}  {}\n",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    p.value,
                    p.condition
                )
            })
            .collect(),
    };
    a.out.emit(&text)?;

    let failed: Vec<&str> = props.iter().filter(|p| !p.pass).map(|p| p.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed properties: {}", failed.join(", "))))
    }
}
