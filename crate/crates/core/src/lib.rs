//! Parameter-free ground-state ansatz for even polynomial potentials.
//!
//! For a confining potential `U(x) = Σ a₂ₖ x²ᵏ` the trial state
//!
//! ```text
//! ψ(x) = N · exp(−½ ∫₀^|x| √(Σ 8k a₂ₖ t²ᵏ) dt)
//! ```
//!
//! satisfies the virial relation pointwise. This crate builds that state by
//! quadrature (or closed form where one exists), evaluates its Fisher
//! information and moments, estimates the ground-state energy through two
//! independent routes, and checks the result against a finite-difference
//! Schrödinger solver.
//!
//! Units: ħ = 1, unit mass.

pub mod ansatz;
pub mod energy;
pub mod legendre;
pub mod observables;
pub mod potential;
pub mod quadrature;
pub mod reference_solver;

mod error;
mod format;

pub use ansatz::{AnsatzWavefunction, ExponentMode, ExponentStrategy};
pub use energy::{EnergyReport, SolverOptions};
pub use error::Error;
pub use format::round_significant;
pub use legendre::LegendreState;
pub use observables::FisherReport;
pub use potential::{EvenPolynomialPotential, PotentialError, PotentialSpec, Term};
pub use quadrature::QuadratureConfig;
pub use reference_solver::GridSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;
