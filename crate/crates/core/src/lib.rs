//! Simulation core for a rigid-soft gripper with switchable adhesive pads.

pub mod adhesion;
pub mod characterize;
pub mod control;
pub mod experiment;
pub mod gripper;
pub mod operator;
pub mod scenario;
pub mod session;
pub mod world;

pub type Vec3 = nalgebra::Vector3<f64>;
