//! Two-dimensional electrohydrodynamics: incompressible Navier-Stokes coupled
//! to Nernst-Planck transport of two charge species and the Poisson equation,
//! with a stationary Poisson-Boltzmann solver and entropy diagnostics.
//!
//! Fields live on a uniform MAC grid ([`grid`]). The time stepper in [`sim`]
//! combines the Poisson solve ([`poisson`]), Scharfetter-Gummel charge
//! transport ([`transport`]) and a projection method for the velocity
//! ([`fluid`]). [`stationary`] computes the equilibrium that the functionals
//! in [`diagnostics`] measure decay towards.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod diagnostics;
pub mod error;
pub mod fluid;
pub mod grid;
mod linalg;
pub mod poisson;
pub mod sim;
pub mod stationary;
pub mod transport;

pub use error::{EhdError, Result};
pub use grid::{FaceBoundary, Grid2D, MacVectorField, ScalarField};
pub use sim::{SimConfig, SystemState};
pub use stationary::StationarySolution;
