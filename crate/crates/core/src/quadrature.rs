//! Adaptive Simpson quadrature with Richardson error control.
//!
//! The interval is first cut into a fixed number of panels, each of which is
//! refined recursively until `|S_fine − S_coarse| ≤ 15·ε`; the accepted value
//! carries the Richardson correction `(S_fine − S_coarse)/15`. The recursion
//! order is fixed, so identical inputs give bit-identical outputs.

use serde::{Deserialize, Serialize};

const INITIAL_PANELS: usize = 16;
const MAX_RADIUS: f64 = 1.2676506002282294e30; // 2^100
const MAX_RADIUS_EVALUATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_depth: 60,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self, QuadratureError> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_depth,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadratureError::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QuadratureError::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_depth < 10 {
            return Err(QuadratureError::InvalidConfig(format!(
                "max_depth must be at least 10, got {}",
                self.max_depth
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the Richardson error estimates of the accepted subintervals.
    pub err_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("NonFiniteIntegrand: integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("MaxDepthExceeded: best value {value} with error estimate {err_estimate:e}")]
    MaxDepthExceeded { value: f64, err_estimate: f64 },
    #[error("BracketFailure: function stays below {threshold} up to x = 2^100")]
    BracketFailure { threshold: f64 },
}

struct Refiner<'a, F> {
    f: &'a F,
    err: f64,
    exhausted: bool,
}

impl<F: Fn(f64) -> f64> Refiner<'_, F> {
    fn eval(&self, x: f64) -> Result<f64, QuadratureError> {
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFiniteIntegrand { x })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> Result<f64, QuadratureError> {
        let d = 0.5 * (a + m);
        let e = 0.5 * (m + b);
        let fd = self.eval(d)?;
        let fe = self.eval(e)?;
        let left = (m - a) * (fa + 4.0 * fd + fm) / 6.0;
        let right = (b - m) * (fm + 4.0 * fe + fb) / 6.0;
        let delta = left + right - whole;

        let resolved = !(a < d && d < m && m < e && e < b);
        if delta.abs() <= 15.0 * eps || depth == 0 || resolved {
            if delta.abs() > 15.0 * eps {
                self.exhausted = true;
            }
            self.err += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        let l = self.refine(a, d, m, fa, fd, fm, left, 0.5 * eps, depth - 1)?;
        let r = self.refine(m, e, b, fm, fe, fb, right, 0.5 * eps, depth - 1)?;
        Ok(l + r)
    }
}

/// Integrates `f` over `[a, b]`.
///
/// On `MaxDepthExceeded` the error still carries the best available value.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral, QuadratureError> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadratureError::InvalidInterval { a, b });
    }

    let mut refiner = Refiner {
        f: &f,
        err: 0.0,
        exhausted: false,
    };

    let n = 2 * INITIAL_PANELS;
    let width = b - a;
    let xs: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + width * i as f64 / n as f64 })
        .collect();
    let ys = xs
        .iter()
        .map(|&x| refiner.eval(x))
        .collect::<Result<Vec<_>, _>>()?;

    let wholes: Vec<f64> = (0..INITIAL_PANELS)
        .map(|i| {
            let j = 2 * i;
            (xs[j + 2] - xs[j]) * (ys[j] + 4.0 * ys[j + 1] + ys[j + 2]) / 6.0
        })
        .collect();
    let coarse: f64 = wholes.iter().sum();
    let tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());

    let mut value = 0.0;
    for (i, whole) in wholes.iter().enumerate() {
        let j = 2 * i;
        let eps = tol * (xs[j + 2] - xs[j]) / width;
        value += refiner.refine(
            xs[j],
            xs[j + 1],
            xs[j + 2],
            ys[j],
            ys[j + 1],
            ys[j + 2],
            *whole,
            eps,
            cfg.max_depth,
        )?;
    }

    if refiner.exhausted {
        return Err(QuadratureError::MaxDepthExceeded {
            value,
            err_estimate: refiner.err,
        });
    }
    Ok(Integral {
        value,
        err_estimate: refiner.err,
    })
}

/// `∫_{−r}^{r} f` for an even integrand, computed as `2·∫_0^r f`.
pub fn integrate_even<F: Fn(f64) -> f64>(
    f: F,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    Ok(2.0 * integrate(f, 0.0, r, cfg)?.value)
}

/// Finds `R` with `s(R) ∈ [threshold, 2·threshold]` by a doubling bracket
/// followed by bisection.
///
/// `s` should start at 0 and grow without bound; monotonicity is not
/// required, only that `s` eventually exceeds the threshold.
pub fn find_truncation_radius<S: Fn(f64) -> f64>(
    s: S,
    threshold: f64,
) -> Result<f64, QuadratureError> {
    let fail = QuadratureError::BracketFailure { threshold };
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(fail);
    }

    let mut evaluations = 0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut s_hi = s(hi);
    evaluations += 1;
    while !(s_hi >= threshold) {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_RADIUS {
            return Err(fail);
        }
        s_hi = s(hi);
        evaluations += 1;
    }
    if s_hi <= 2.0 * threshold {
        return Ok(hi);
    }

    while evaluations < MAX_RADIUS_EVALUATIONS {
        let mid = 0.5 * (lo + hi);
        let v = s(mid);
        evaluations += 1;
        if v < threshold {
            lo = mid;
        } else if v > 2.0 * threshold {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Err(fail)
}
