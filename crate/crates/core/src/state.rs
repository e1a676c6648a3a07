//! Per-cell solution state.

use serde::{Deserialize, Serialize};

/// Extended solution vector of one cell: depth, momentum and the stored
/// Boussinesq source term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellState {
    /// Water depth [m].
    pub h: f64,
    /// Depth-averaged momentum [m^2/s].
    pub hu: f64,
    /// Boussinesq source term [m^2/s^2].
    pub psi: f64,
}

impl CellState {
    pub const DRY: CellState = CellState {
        h: 0.0,
        hu: 0.0,
        psi: 0.0,
    };

    pub fn new(h: f64, hu: f64, psi: f64) -> Self {
        CellState { h, hu, psi }
    }

    /// Velocity, zero in cells at or below the dry tolerance.
    #[inline]
    pub fn velocity(&self, dry_tol: f64) -> f64 {
        if self.h > dry_tol {
            self.hu / self.h
        } else {
            0.0
        }
    }

    #[inline]
    pub fn is_dry(&self, dry_tol: f64) -> bool {
        self.h <= dry_tol
    }

    /// Clamp to the admissible set: h >= 0 and a dry cell carries no
    /// momentum and no source.
    #[inline]
    pub fn sanitized(mut self, dry_tol: f64) -> Self {
        if self.h <= 0.0 {
            self.h = 0.0;
        }
        if self.h <= dry_tol {
            self.hu = 0.0;
            self.psi = 0.0;
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.hu.is_finite() && self.psi.is_finite()
    }
}
