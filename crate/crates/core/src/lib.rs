//! Calibrated control-pulse landscapes for continuous families of quantum gates.
//!
//! A landscape is a set of optimized reference pulses on a lattice of gate
//! parameters, tied together by a simplicial mesh. Reference pulses are
//! first optimized independently, then repeatedly re-optimized toward the
//! average of their mesh neighbours so that barycentric interpolation
//! between them yields high-fidelity pulses for any gate in the family.
//!
//! Module map:
//! - [`qcore`]: small dense complex matrices, Hermitian exponentials, fidelity.
//! - [`gatefam`]: gate families, parameter points, reference/test lattices.
//! - [`pulsemodel`]: piecewise-constant controls, evolution, cost and gradient.
//! - [`optim`]: projected L-BFGS minimizer with an iteration cap.
//! - [`mesh`]: Delaunay simplicial mesh, neighbours, point location.
//! - [`calib`]: initial optimization and neighbour-average re-optimization.
//! - [`eval`]: interpolation, grid evaluation, granularity sweeps.
//! - [`format`]: the on-disk landscape file.

pub mod calib;
pub mod error;
pub mod eval;
pub mod format;
pub mod gatefam;
pub mod mesh;
pub mod optim;
pub mod pulsemodel;
pub mod qcore;

pub use error::{Error, Result};
