//! Virtual nonholonomic constraints for mechanical control systems.
//!
//! A system is a chart with a kinetic-energy metric, a potential, Pfaffian
//! constraints `μ^a(q) q̇ = 0` and input one-forms `f^a`. The library
//! computes the feedback that keeps the constraint distribution invariant,
//! the constrained and nonholonomic connections whose geodesics describe the
//! resulting motion, and integrates and compares all formulations.

pub mod connections;
pub mod control;
pub mod distributions;
pub mod dynamics;
pub mod error;
pub mod exprlang;
pub mod geometry;
pub mod linalg;
pub mod parallel;
pub mod sampling;
pub mod systems;

pub use connections::{christoffel_of, ConnectionCoefficients, ConnectionKind};
pub use control::{solve_control, ControlOutcome, ControlSettings, NonUniquePolicy};
pub use dynamics::{compare_trajectories, simulate, Formulation, IntegratorSettings, Method, TangentState, Trajectory};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use systems::{SystemDefinition, SystemSpec};
