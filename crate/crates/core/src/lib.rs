//! One-dimensional dispersive long-wave solver on adaptively refined grids.
//!
//! The state (h, hu) advances with a well-balanced wave-propagation scheme
//! for the shallow water equations; a Madsen-Sorensen dispersion term enters
//! as a momentum source psi obtained from a tridiagonal solve each step.
//! Levels of nested patches are advanced with time subcycling.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amr;
pub mod bathymetry;
pub mod config;
pub mod dispersive;
pub mod driver;
pub mod error;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod par;
pub mod params;
pub mod plot;
pub mod scenarios;
pub mod state;
pub mod stepper;
pub mod swe;
pub mod transfer;
pub mod validation;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, Domain, Hierarchy, Patch, Side, GHOST};
pub use params::SolverParams;
pub use state::CellState;
