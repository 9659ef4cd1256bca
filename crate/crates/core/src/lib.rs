//! Modeling and solving toolkit for bin packing with heterogeneous bins and
//! real-world loading constraints (1d, 2d and 3d).
//!
//! An [`model::Instance`] is translated by [`builder`] into a constrained
//! quadratic model, reduced by [`presolve`], and solved by one of the
//! [`solver`] backends. [`checker`] validates solutions from geometry alone.

#![allow(clippy::needless_range_loop)]

pub mod builder;
pub mod checker;
pub mod cli;
pub mod io;
pub mod model;
pub mod presolve;
pub mod solver;

pub use model::{Instance, InstanceSpec, Placement, Solution};
