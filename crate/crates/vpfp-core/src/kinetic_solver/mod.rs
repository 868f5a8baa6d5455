//! Perturbative kinetic system: scalings, state, time stepping and runs.

mod initial;
mod regime;
mod run;
pub(crate) mod solver;
mod state;

pub use initial::{
    initial_data, smallness_constant_a, smallness_measure, smallness_threshold, Amplitude, InitialData,
    InitialKind, InitialReport,
};
pub use regime::{RegimeTag, ScalingRegime};
pub use run::{evaluate, fit_rates, run, schedule, ConservationSample, Provenance, RunAbort, RunRecord, SolverConfig};
pub use solver::KineticSolver;
pub use state::HermiteCoefField;
