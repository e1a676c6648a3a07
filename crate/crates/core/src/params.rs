use serde::{Deserialize, Serialize};

use crate::stepper::SourceIntegrator;
use crate::swe::Limiter;

/// Physical and numerical parameters shared by every patch operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Gravitational acceleration [m/s^2].
    pub g: f64,
    /// Madsen-Sorensen dispersion parameter.
    pub b1: f64,
    /// Still-water depth at or below which the Boussinesq terms are off [m].
    pub switch_depth: f64,
    pub dry_tolerance: f64,
    /// Solve for psi at all; false gives the pure shallow water scheme.
    pub dispersion: bool,
    pub limiter: Limiter,
    pub source_integrator: SourceIntegrator,
    pub cfl_target: f64,
    /// Courant number above which a step is rejected.
    pub cfl_max: f64,
    /// Velocity cap applied in nearly dry cells [m/s].
    pub max_velocity: f64,
    /// Advance same-level patches concurrently when built with `parallel`.
    pub parallel: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            g: 9.81,
            b1: 1.0 / 15.0,
            switch_depth: 10.0,
            dry_tolerance: 1e-3,
            dispersion: true,
            limiter: Limiter::MC,
            source_integrator: SourceIntegrator::Rk2,
            cfl_target: 0.9,
            cfl_max: 1.0,
            max_velocity: 100.0,
            parallel: true,
        }
    }
}
