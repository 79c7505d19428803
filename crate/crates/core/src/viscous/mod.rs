//! The viscous Burgers-alpha system: stepping, monitors and smoothing.

pub mod smoothing;
pub mod solver;

pub use smoothing::{smoothing_monitor, SmoothingReport};
pub use solver::{
    filter_residual, simulate_viscous, simulate_viscous_forced, step_viscous, Drive, ViscousConfig, ViscousReport,
    ViscousRun, ViscousState, ViscousStepper,
};
