//! Finite-difference ground-state solver for `H = −½ d²/dx² + U(x)`.
//!
//! Dirichlet walls at `±L`, three-point Laplacian, lowest eigenvalue of the
//! resulting symmetric tridiagonal matrix by Sturm-sequence bisection, and
//! one Richardson step `(4·E_{h/2} − E_h)/3` across two grids.
//!
//! This module only touches the potential. It must not use the quadrature or
//! ansatz code: it is the independent check on both.

use crate::potential::EvenPolynomialPotential;

pub const DEFAULT_POINTS: usize = 16385;
pub const ESCALATED_POINTS: usize = 65537;

/// `|E_h − E_{h/2}|` above which the solver reruns on the escalated grid.
const ESCALATION_GAP: f64 = 1e-6;
/// Largest normalised amplitude tolerated next to a wall.
const WALL_AMPLITUDE: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;
const MAX_DOMAIN_DOUBLINGS: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("ConvergenceFailure: bisection stalled at [{lo}, {hi}]")]
    ConvergenceFailure { lo: f64, hi: f64 },
    #[error("DomainTooSmall: ground-state amplitude {amplitude:e} at the walls x = ±{half_width}")]
    DomainTooSmall { half_width: f64, amplitude: f64 },
}

/// Symmetric uniform grid `x_i = −L + i·h`, `h = 2L/(n−1)`, `n` odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self, SolverError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(SolverError::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if points < 3 || points % 2 == 0 {
            return Err(SolverError::InvalidGrid(format!(
                "point count must be odd and at least 3, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Grid node `i`; exact `±L` at the ends and exact zero at the centre.
    pub fn x(&self, i: usize) -> f64 {
        let mid = (self.points - 1) / 2;
        let h = self.spacing();
        if i >= mid {
            (i - mid) as f64 * h
        } else {
            -((mid - i) as f64 * h)
        }
    }

    /// Same domain with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            points: 2 * self.points - 1,
        }
    }

    fn with_half_width(&self, half_width: f64) -> Self {
        Self {
            half_width,
            points: self.points,
        }
    }
}

/// Smallest `L = 2^j` (j ≥ 0) with `U(L) ≥ 10·e_hint + 50`.
pub fn choose_domain(p: &EvenPolynomialPotential, e_hint: f64) -> f64 {
    let hint = if e_hint.is_finite() && e_hint > 0.0 { e_hint } else { 1.0 };
    let target = 10.0 * hint + 50.0;
    let mut l = 1.0;
    while p.evaluate_u(l) < target && l < 1e150 {
        l *= 2.0;
    }
    l
}

fn adequate(p: &EvenPolynomialPotential, half_width: f64, energy: f64) -> bool {
    p.evaluate_u(half_width) >= 10.0 * energy + 50.0
}

/// Interior Hamiltonian: diagonal `1/h² + U(x_i)`, constant off-diagonal `−1/(2h²)`.
fn hamiltonian(p: &EvenPolynomialPotential, grid: &GridSpec) -> (Vec<f64>, f64) {
    let h = grid.spacing();
    let kinetic = 1.0 / (h * h);
    let diag = (1..grid.points - 1)
        .map(|i| kinetic + p.evaluate_u(grid.x(i)))
        .collect();
    (diag, -0.5 * kinetic)
}

/// Number of eigenvalues strictly below `e` (negative pivots of the LDLᵀ
/// factorisation of `T − e·I`).
pub fn sturm_count(diag: &[f64], off: f64, e: f64) -> usize {
    let guard = f64::MIN_POSITIVE.sqrt();
    let off2 = off * off;
    let mut count = 0;
    let mut q = 1.0;
    for (i, d) in diag.iter().enumerate() {
        q = if i == 0 { d - e } else { (d - e) - off2 / q };
        if q < 0.0 {
            count += 1;
        }
        if q.abs() < guard {
            q = if q < 0.0 { -guard } else { guard };
        }
    }
    count
}

/// Bracket `[lo, hi]` around the smallest eigenvalue with `sturm_count(lo) = 0`.
fn bracket_lowest(diag: &[f64], off: f64) -> Result<(f64, f64), SolverError> {
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = dmin - 2.0 * off.abs();
    let mut hi = dmin;
    while sturm_count(diag, off, hi) == 0 {
        hi += off.abs() + 1.0;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok((lo, hi));
        }
        if sturm_count(diag, off, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(SolverError::ConvergenceFailure { lo, hi })
}

/// Lowest eigenvalue of the discretised Hamiltonian on a single grid.
pub fn discrete_ground_energy(
    p: &EvenPolynomialPotential,
    grid: &GridSpec,
) -> Result<f64, SolverError> {
    let (diag, off) = hamiltonian(p, grid);
    let (lo, hi) = bracket_lowest(&diag, off)?;
    Ok(0.5 * (lo + hi))
}

/// Richardson-extrapolated ground-state energy from `grid` and its refinement.
///
/// Reruns with `ESCALATED_POINTS` on the coarse level when the two grids
/// disagree by more than 1e-6.
pub fn ground_state_energy(
    p: &EvenPolynomialPotential,
    grid: &GridSpec,
) -> Result<f64, SolverError> {
    let extrapolate = |g: &GridSpec| -> Result<(f64, f64), SolverError> {
        let coarse = discrete_ground_energy(p, g)?;
        let fine = discrete_ground_energy(p, &g.refined())?;
        Ok(((4.0 * fine - coarse) / 3.0, (fine - coarse).abs()))
    };
    let (energy, gap) = extrapolate(grid)?;
    if gap > ESCALATION_GAP && grid.points < ESCALATED_POINTS {
        let escalated = GridSpec::new(grid.half_width, ESCALATED_POINTS)?;
        return Ok(extrapolate(&escalated)?.0);
    }
    Ok(energy)
}

/// Normalised (`Σψᵢ²·h = 1`), positive ground state on the grid nodes,
/// walls included.
pub fn ground_state_wavefunction(
    p: &EvenPolynomialPotential,
    grid: &GridSpec,
) -> Result<Vec<(f64, f64)>, SolverError> {
    let (diag, off) = hamiltonian(p, grid);
    let (lo, _) = bracket_lowest(&diag, off)?;
    // Slightly below the eigenvalue keeps T − σI positive definite for the
    // unpivoted tridiagonal solve.
    let shift = lo - 1e-10 * lo.abs().max(1.0);

    let h = grid.spacing();
    let width = 0.25 * grid.half_width;
    let mut v: Vec<f64> = (1..grid.points - 1)
        .map(|i| (-(grid.x(i) / width).powi(2)).exp())
        .collect();
    for _ in 0..3 {
        v = solve_shifted(&diag, off, shift, &v);
        let norm = (v.iter().map(|y| y * y).sum::<f64>() * h).sqrt();
        v.iter_mut().for_each(|y| *y /= norm);
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|y| *y = -*y);
    }

    let amplitude = v[0].abs().max(v[v.len() - 1].abs());
    if amplitude > WALL_AMPLITUDE {
        return Err(SolverError::DomainTooSmall {
            half_width: grid.half_width,
            amplitude,
        });
    }

    let mut out = Vec::with_capacity(grid.points);
    out.push((grid.x(0), 0.0));
    out.extend(v.iter().enumerate().map(|(j, &y)| (grid.x(j + 1), y)));
    out.push((grid.x(grid.points - 1), 0.0));
    Ok(out)
}

// Solves (T − σI)y = b for symmetric tridiagonal T with constant off-diagonal.
fn solve_shifted(diag: &[f64], off: f64, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut pivot = diag[0] - shift;
    c[0] = off / pivot;
    y[0] = b[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - shift - off * c[i - 1];
        c[i] = off / pivot;
        y[i] = (b[i] - off * y[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub energy: f64,
    pub grid: GridSpec,
}

/// Chooses the domain from `e_hint` (or uses `half_width`), solves, and
/// doubles the domain until `U(L) ≥ 10·E + 50` holds for the computed `E`.
pub fn solve(
    p: &EvenPolynomialPotential,
    e_hint: f64,
    points: usize,
    half_width: Option<f64>,
) -> Result<ReferenceSolution, SolverError> {
    let mut grid = GridSpec::new(half_width.unwrap_or_else(|| choose_domain(p, e_hint)), points)?;
    for _ in 0..MAX_DOMAIN_DOUBLINGS {
        let energy = ground_state_energy(p, &grid)?;
        if half_width.is_some() || adequate(p, grid.half_width, energy) {
            return Ok(ReferenceSolution { energy, grid });
        }
        grid = grid.with_half_width(2.0 * grid.half_width);
    }
    Err(SolverError::InvalidGrid(
        "no adequate domain found".to_string(),
    ))
}

/// Like [`ground_state_wavefunction`], doubling the domain while the walls
/// still carry amplitude. An explicit `half_width` is used as is.
pub fn solve_wavefunction(
    p: &EvenPolynomialPotential,
    e_hint: f64,
    points: usize,
    half_width: Option<f64>,
) -> Result<(GridSpec, Vec<(f64, f64)>), SolverError> {
    let mut grid = GridSpec::new(half_width.unwrap_or_else(|| choose_domain(p, e_hint)), points)?;
    let mut last = None;
    for _ in 0..MAX_DOMAIN_DOUBLINGS {
        match ground_state_wavefunction(p, &grid) {
            Ok(samples) => return Ok((grid, samples)),
            Err(e @ SolverError::DomainTooSmall { .. }) if half_width.is_none() => {
                last = Some(e);
                grid = grid.with_half_width(2.0 * grid.half_width);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(SolverError::InvalidGrid("no adequate domain found".to_string())))
}
