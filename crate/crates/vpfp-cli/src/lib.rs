//! Front end of the VPFP harness: versioned run files, per-run artifacts,
//! ε-sweeps, the verification suite and SVG plots.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod plot;
