//! Composition of the stages into global controllers, and the studies run
//! on top of them.

pub mod spectral;
pub mod stages;
pub mod studies;

pub use spectral::{h34_surrogate, sobolev_surrogate};
pub use stages::{
    global_viscous_control, GlobalViscousControl, PipelineConfig, PipelineReport, StagePlan, StageRun, StageSummary, Taper,
    TraceSurrogates,
};
pub use studies::{
    alpha_limit_study, loglog_slope, par_map, spread, uniformity_report, AlphaLimitRow, AlphaLimitTable, Spreads,
    UniformityReport, UniformityRun, UNIFORMITY_THRESHOLD,
};
