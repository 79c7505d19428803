//! Inviscid system: return profile, characteristic flows, fixed-point null
//! control, gluing into a global exact controller, and forward simulation.

pub mod calibrate;
pub mod flow;
pub mod gluing;
pub mod lambda;
pub mod picard;
pub mod simulate;

pub use calibrate::{admissible, bisect_threshold, CalibrationSpec, Calibrator, Threshold};
pub use flow::{group_defect, integrate_flow, FlowMap, IntervalStepper, Velocity};
pub use gluing::{global_inviscid_control, GlobalInviscidControl, GluingPlan, InviscidControlConfig};
pub use lambda::{LambdaProfile, LambdaWindow};
pub use picard::{
    lift_to_full_state, picard_null_control, transport_residual, FullState, NullControlProblem, PicardConfig,
    PicardReport, PicardSolution, Regularity,
};
pub use simulate::{simulate_inviscid, transport_step, InviscidRun, Side};
