//! Numerical laboratory for viscous shock waves of the generalized
//! KdV-Burgers equation
//!
//! ```text
//! u_t + f(u)_x + mu u_xxx = gamma u_xx
//! ```
//!
//! with strictly convex flux f, viscosity gamma > 0 and dispersion mu > 0.
//! The crate constructs monotone shock profiles in the moving frame,
//! evolves periodic far-field states on one cell, integrates the phase
//! shift that keeps the perturbation mass at zero, evolves the full-line
//! perturbation around the resulting ansatz, and measures the decay rates
//! and weighted norms that quantify nonlinear stability.

pub mod banded;
pub mod error;
pub mod fd;
pub mod fit;
pub mod flux;
pub mod fullline;
pub mod grid;
pub mod interp;
pub mod periodic;
pub mod profile;
pub mod quad;
pub mod rk;
pub mod shift;
pub mod spectral;

pub use error::CoreError;
pub use flux::{FluxModel, ShockSetup};
pub use grid::LineGrid;
pub use periodic::{PeriodicHistory, PeriodicParams};
pub use profile::{ProfileTable, RateConstants};
pub use shift::ShiftTrajectory;
