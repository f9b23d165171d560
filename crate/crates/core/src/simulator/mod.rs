//! Synthetic ground truth: a textured ground plane, a pinhole stereo rig
//! flying over it, open-loop replays of prescribed motion, and a simple
//! vision-in-the-loop velocity controller.

mod log;
mod metrics;
mod render;
mod run;
mod scenario;
mod scene;
mod trajectory;

pub use log::{format_sig6, write_log, LogRow, Truth, LOG_HEADER};
pub use metrics::{default_max_lag, metrics, mse, nmxm, Metrics};
pub use render::{render, render_stereo, CameraPose, SensorNoise};
pub use run::{
    export_sequence, run_closed_loop, run_open_loop, ClosedLoopSetup, ControllerParams,
    ReferenceSchedule, GRAVITY,
};
pub use scenario::{Scenario, ScenarioMode};
pub use scene::Scene;
pub use trajectory::{Motion, Trajectory, TrajectorySample};
