use thiserror::Error;

use crate::kinetic_solver::HermiteCoefField;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("charge neutrality violated: mean(sigma) = {mean:e} at z-node {z_node}")]
    MassImbalance { mean: f64, z_node: usize },

    #[error("z-derivative of order {order} needs at least {} collocation nodes, have {n_z}", order + 1)]
    InsufficientResolution { order: usize, n_z: usize },

    #[error("time step {dt:e} exceeds stability limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("non-finite state produced while advancing from t = {}", last_finite.time)]
    Blowup { last_finite: Box<HermiteCoefField> },

    #[error("record sample spacing {spacing:e} exceeds {limit:e}")]
    UndersampledRecord { spacing: f64, limit: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::ContractViolation(msg.into())
}
