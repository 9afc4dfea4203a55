//! Bio-inspired trajectory planning for a two-link planar arm.
//!
//! The pipeline models the arm with Lagrangian dynamics, synthesizes quintic
//! joint trajectories, segments recorded lifts into load phases from motion
//! and EMG data, and uses particle swarm optimization to place the elbow
//! velocity peak in the weakest-load region while keeping mechanical work
//! low.
//!
//! Modules:
//! - [`dynamics`]: arm model, mass/Coriolis/gravity terms, inverse/forward
//!   dynamics, energy accounting.
//! - [`trajectory`]: quintic boundary-value segments, via-point trajectories,
//!   sampling, trajectory CSV format.
//! - [`profiles`]: classic velocity-profile families for comparison plots.
//! - [`signal`]: recording ingestion, zero-phase filtering, EMG envelopes,
//!   peak detection, numeric differentiation.
//! - [`phase`]: elbow-angle phase segmentation and feature extraction.
//! - [`pso`]: deterministic box-bounded particle swarm optimizer.
//! - [`planner`]: standard vs optimized plan comparison.

pub mod dynamics;
pub mod phase;
pub mod planner;
pub mod profiles;
pub mod pso;
pub mod signal;
pub mod trajectory;

pub use dynamics::{ArmModel, DynamicsTerms, EnergyReport, JointState};
pub use phase::{FeaturePoints, PhaseIntervals, PhaseSpec};
pub use planner::{PlanConfig, PlanResult, PlanningProblem};
pub use profiles::{classic_profile, ProfileKind};
pub use pso::{Bounds, OptResult, PsoConfig};
pub use signal::{EmgRecording, FilterSpec, MotionRecording, TimeSeries};
pub use trajectory::{
    solve_quintic, two_segment_via, BoundaryCondition, PiecewiseTrajectory, QuinticSegment,
    SampledTrajectory,
};
