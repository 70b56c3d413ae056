//! Numerical core for the optics → mechanics → wave-mechanics chain.
//!
//! Everything here is allocation-only (`alloc`), deterministic, and free of IO:
//!
//! * [`fields`]: grids, sampled real/complex fields, finite-difference calculus.
//! * [`optics`]: Snell laws, eikonal residuals, phase velocity, ray tracing.
//! * [`mechanics`]: Verlet trajectories, actions, Hamilton–Jacobi surfaces.
//! * [`schrodinger`]: Crank–Nicolson / ADI propagation, probability current.
//! * [`pilot`]: guidance velocities, particle ensembles, equivariance.
//! * [`gun`]: the free-beam, single-slit and double-slit virtual experiments.
//!
//! The companion `qlab` crate carries configuration, file formats and the CLI.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;
mod summation;

pub mod fields;
pub mod gun;
pub mod histogram;
pub mod mechanics;
pub mod optics;
pub mod pilot;
pub mod rng;
pub mod schrodinger;
pub mod tridiag;

pub use error::{Error, Result};
pub use fields::{ComplexField, Field, Grid, PhysicalConstants, RealField};
pub use num_complex::Complex64;
pub use summation::pairwise_sum;
