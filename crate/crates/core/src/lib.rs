//! Numerical core for mass-constrained attractive-repulsive interaction
//! energies.
//!
//! The crate works on discrete probability measures in `R^n` and provides
//!
//! * the interaction kernels `|x|^a + |x|^-l`, their normalized form and the
//!   planar logarithmic variant ([`kernel`]);
//! * interaction and Riesz energies, the diameter-constrained limit
//!   functional, potentials and dilations ([`measure`]);
//! * an energy-monitored explicit Euler integrator for the particle
//!   aggregation flow ([`dynamics`]);
//! * discrete equilibrium measures and Riesz capacities on point clouds via
//!   projected gradient over the capped simplex ([`equilibrium`]);
//! * seeded samplers for balls, spheres, Reuleaux triangles, simplices,
//!   spherical caps and product unions of caps ([`shapes`]).
//!
//! Everything here is `no_std` + `alloc`. The `std` feature only adds
//! `std::error::Error` plumbing; `parallel` enables rayon-backed pair sums.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod kernel;
mod math;
pub mod measure;
pub mod quadrature;
mod reduce;
pub mod rng;
pub mod shapes;

pub use dynamics::{Init, SimConfig, SimResult};
pub use equilibrium::{EquilibriumResult, SolverOptions};
pub use error::{Error, Result};
pub use kernel::{KernelParams, KernelVariant};
pub use measure::DiscreteMeasure;
pub use shapes::{ShapeKind, ShapeSpec};
