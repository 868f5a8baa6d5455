//! Hermite-spectral solver for the scaled Vlasov–Poisson–Fokker–Planck
//! system with random initial data, and a suite of hypocoercivity
//! diagnostics for its perturbative formulation.
//!
//! The unknown is `h = (f − M)/√M`, expanded in orthonormal Hermite
//! functions in `v`, sampled on a periodic grid in `x` and at Gauss–Legendre
//! collocation nodes in the random variable `z`.

pub mod checkpoint;
pub mod discretization;
pub mod error;
pub mod field_space;
pub mod hypo_diagnostics;
pub mod kinetic_solver;
pub mod limit_solvers;
pub mod quadrature;
pub mod random_space;
pub mod velocity_basis;

pub use discretization::Discretization;
pub use error::{Error, Result};
