//! Adaptive zero-reaction motion control for a planar free-floating space
//! manipulator: a spacecraft base carrying a three-link arm, commanded at
//! the joint-velocity level.
//!
//! The controller keeps the spacecraft attitude regulated while the end
//! effector tracks a task-space trajectory, with the inertial and kinematic
//! parameters (including the initial momenta) estimated online.

pub mod adapt;
pub mod control;
pub mod error;
pub mod export;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod regressor;
pub mod scenario;
pub mod sim;
pub mod trace;
pub mod verify;

pub use nalgebra;
pub use adapt::{Guard, GuardConfig, ParamEstimate};
pub use control::{EstimatedModel, GainSet};
pub use error::{Error, Result};
pub use metrics::Summary;
pub use model::{ModelParams, MomentumPair, SystemState};
pub use regressor::{DynParams, KinParams};
pub use scenario::{load_scenario, parse_scenario, Preset};
pub use sim::{run, ControllerMode, Scenario, Simulator};
pub use trace::{SimTrace, TraceRow};
