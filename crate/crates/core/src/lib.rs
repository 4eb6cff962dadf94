//! Spectral Faedo–Galerkin solver for two-dimensional incompressible
//! viscoelastic flow of Oldroyd type with a linearized constitutive law,
//! together with numerical checks of its energy balance, the Ladyzhenskaya
//! inequality and Grönwall-type stability of trajectories.
//!
//! The crate is organized bottom-up:
//!
//! - [`basis`]: quadrature, divergence-free velocity modes, orthonormal
//!   symmetric stress modes.
//! - [`operators`]: mass, stiffness, convection and coupling operators and
//!   projection of data onto the bases.
//! - [`dynamics`]: the modal ODE system and its time integrators.
//! - [`analysis`]: energy ledger, Ladyzhenskaya ratios, two-trajectory
//!   stability, manufactured solutions and convergence studies.
//! - [`cli`]: run configuration files and the commands behind the `oldroyd`
//!   binary.

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod operators;

pub use error::{Error, Result};
