//! Deterministic 2D multi-agent indoor-exploration simulator.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the pure
//! simulation: level geometry, UAV kinematics, LiDAR ray casting, log-odds
//! occupancy beliefs, the range-gated message layer, the episode loop and a
//! handful of scripted baseline policies. File formats, configuration
//! loading, logging and the environment server live in `imagine-sim`.
//!
//! All floating-point math that is not correctly rounded by IEEE 754 goes
//! through `libm`, so episodes replay bit-identically across platforms.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod env;
pub mod geometry;
pub mod kinematics;
pub mod mapping;
pub mod network;
pub mod sensing;
pub mod world;

pub use baselines::{Policy, PolicyKind};
pub use env::{
    compute_reward, CurriculumConfig, CurriculumMode, CurriculumState, Env, EnvConfig, EnvError,
    Observation, ObservationLayout, ObservationVariant, Paradigm, StepInfo, StepResult,
};
pub use geometry::Vec2;
pub use kinematics::{ActionCommand, ActionVariant, AgentState, KinematicLimits};
pub use mapping::{EgocentricMap, MapParams, OccupancyGrid};
pub use network::{CommConfig, CommGraph, CommMode, MessageKind, Network};
pub use sensing::{LidarConfig, LidarScan};
pub use world::{GridWorld, LevelSpec, WorldError};
