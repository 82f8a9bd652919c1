//! Space-time interface-fitted finite elements for energy-regularized
//! parabolic optimal control problems in one space dimension.
//!
//! The pipeline is: build a [`problem::ProblemSpec`], mesh the space-time
//! cylinder with [`mesh::build_mesh`], assemble and solve the coupled
//! state-adjoint system with [`solver::solve_optimality`], then measure errors
//! with the routines in [`metrics`].

pub mod error;
pub mod fem;
pub mod mesh;
pub mod problem;
pub mod sparse;

pub use error::{Error, ErrorKind, Result};
pub mod metrics;
pub mod solver;
pub mod study;
