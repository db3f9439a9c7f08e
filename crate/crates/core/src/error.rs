use crate::legendre::LegendreError;
use crate::potential::PotentialError;
use crate::quadrature::QuadratureError;
use crate::reference_solver::SolverError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Legendre(#[from] LegendreError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("DomainError: {0}")]
    Domain(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Potential(_) | Error::Domain(_) => true,
            Error::Quadrature(QuadratureError::InvalidConfig(_)) => true,
            Error::Legendre(_) => true,
            Error::Solver(SolverError::InvalidGrid(_)) => true,
            _ => false,
        }
    }
}
