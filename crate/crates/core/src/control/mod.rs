//! Parabolic control: HUM null control on the padded interval, local exact
//! control to constants, and the approximate-control bridge.

pub mod approx;
pub mod hum;
pub mod local_exact;

pub use approx::{
    approx_control_stage, inviscid_bridge, solve_remainder, ApproxReport, ApproxStage, Bridge, BridgeConfig, RemainderState,
};
pub use hum::{hum_null_control, hum_with_operator, HumOperator, HumProblem, HumReport, HumSolution};
pub use local_exact::{
    local_exact_to_constant, viscous_threshold, LocalExactConfig, LocalExactReport, LocalExactSolution, MeanPath,
    ViscousCalibrationSpec,
};
