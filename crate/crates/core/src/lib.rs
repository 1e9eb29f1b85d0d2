//! DoF-matched benchmarking of a sine-basis spectral surrogate against
//! Crank-Nicolson P1 finite elements for the 2-D wave equation with
//! homogeneous Dirichlet boundary conditions.

pub mod benchmark;
pub mod config;
pub mod dof;
pub mod error;
pub mod fem;
pub mod grid;
pub mod gridfile;
pub mod lhs;
pub mod mesh;
pub mod metrics;
pub mod problem;
pub mod reference;
pub mod snapshots;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
