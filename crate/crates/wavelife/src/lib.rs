//! Numerical laboratory for lifespan scaling of small-data solutions to
//! one-dimensional nonlinear wave equations.
//!
//! The crate solves the Cauchy problem with two independent schemes
//! (a leapfrog stencil and a Picard iteration on the Duhamel integral
//! equation), detects the numerical blow-up time T(eps), sweeps eps to
//! extract scaling exponents, and checks them against the exact lifespan
//! exponent calculus.

pub mod config;
pub mod fd_solver;
pub mod lifespan;
pub mod linear_kernel;
pub mod model;
pub mod norms;
pub mod picard_solver;
pub mod rational;
pub mod solver;
pub mod sweep;
pub mod theory;
