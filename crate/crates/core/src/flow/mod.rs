//! Explicit integration of `df/ds = H` with runtime monitors.

mod config;
mod monitor;
mod run;
mod step;


pub use config::{DtPolicy, FlowConfig, Integrator, KGrid, MonitorToggles};
pub use monitor::{
    calibrate_area_sign, fit_bound, BoundFit, BoundShapeReport, Diagnostics, GradientMonitor, StepResiduals,
};
pub use run::{run, FlowTrajectory, MonitorRow, Snapshot, MONITOR_HEADER};
pub use step::{step, FlowState, StepOutcome};
