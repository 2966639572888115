//! Simulation and chaos diagnostics for the kinematic bouncing-ball map.
//!
//! * [`map`]: the map, its Jacobian and orbits
//! * [`bifurcation`]: driving-frequency scans and period detection
//! * [`lyapunov`]: tangent-space Lyapunov spectra
//! * [`entropy`]: topological entropy from separated sets
//! * [`corrdim`]: correlation integral and correlation dimension

// negated float comparisons are used on purpose so NaN takes the reject path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod corrdim;
pub mod entropy;
pub mod error;
pub mod fit;
pub mod lyapunov;
pub mod map;
mod par;

pub use error::{Error, Result};
pub use map::{JacobianMatrix, MapParams, Orbit, PhaseState};
