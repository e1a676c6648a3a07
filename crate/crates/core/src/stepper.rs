//! Fractional-step advance of a single patch: psi solve, momentum source
//! update, then the shallow water step.

use serde::{Deserialize, Serialize};

use crate::dispersive::solve_patch_psi;
use crate::error::Result;
use crate::grid::{BoundaryKind, Patch, Side, GHOST};
use crate::params::SolverParams;
use crate::swe::{swe_step, SweReport};

/// Integrator for hu_t = psi over one step with psi frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceIntegrator {
    ForwardEuler,
    /// Two-stage Heun; with psi held fixed both stages see the same value.
    Rk2,
}

impl SourceIntegrator {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euler" | "forward_euler" => Some(SourceIntegrator::ForwardEuler),
            "rk2" | "heun" => Some(SourceIntegrator::Rk2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceIntegrator::ForwardEuler => "euler",
            SourceIntegrator::Rk2 => "rk2",
        }
    }

    #[inline]
    fn update(self, hu: f64, psi: f64, dt: f64) -> f64 {
        match self {
            SourceIntegrator::ForwardEuler => hu + dt * psi,
            SourceIntegrator::Rk2 => {
                let k1 = psi;
                let k2 = psi;
                hu + 0.5 * dt * (k1 + k2)
            }
        }
    }
}

/// Fill ghost cells on physical sides. Extrapolation copies the edge cell,
/// walls mirror it with reversed momentum; both set ghost psi to zero.
/// Periodic sides take the wrapped interior cells, psi included, and are
/// only meaningful on a patch spanning the whole domain.
pub fn fill_physical_ghosts(patch: &mut Patch, dry_tol: f64) {
    let n = patch.n;
    if let Side::Physical(kind) = patch.left {
        for g in 0..GHOST {
            let mut q = match kind {
                BoundaryKind::Extrapolation => patch.cells[GHOST],
                BoundaryKind::Wall => {
                    let mut q = patch.cells[2 * GHOST - 1 - g];
                    q.hu = -q.hu;
                    q
                }
                BoundaryKind::Periodic => patch.cells[n + g],
            };
            if kind != BoundaryKind::Periodic {
                q.psi = 0.0;
            }
            patch.cells[g] = q.sanitized(dry_tol);
        }
    }
    if let Side::Physical(kind) = patch.right {
        for g in 0..GHOST {
            let mut q = match kind {
                BoundaryKind::Extrapolation => patch.cells[GHOST + n - 1],
                BoundaryKind::Wall => {
                    let mut q = patch.cells[GHOST + n - 1 - g];
                    q.hu = -q.hu;
                    q
                }
                BoundaryKind::Periodic => patch.cells[GHOST + g],
            };
            if kind != BoundaryKind::Periodic {
                q.psi = 0.0;
            }
            patch.cells[GHOST + n + g] = q.sanitized(dry_tol);
        }
    }
}

/// hu += dt * psi on wet interior cells and on ghost cells of sides that
/// border another patch (their psi came from the parent level).
pub fn apply_source(patch: &mut Patch, dt: f64, params: &SolverParams) {
    let n = patch.n;
    let dry_tol = params.dry_tolerance;
    let lo = if patch.left == Side::Interior { 0 } else { GHOST };
    let hi = if patch.right == Side::Interior { n + 2 * GHOST } else { GHOST + n };
    for c in &mut patch.cells[lo..hi] {
        if c.h > dry_tol && c.psi != 0.0 {
            c.hu = params.source_integrator.update(c.hu, c.psi, dt);
        }
    }
}

/// Result of one fractional step on a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub swe: SweReport,
    /// Whether an elliptic system was solved.
    pub solved: bool,
}

/// Solve for psi with the current ghost data, then refresh physical ghosts.
pub fn update_psi(patch: &mut Patch, params: &SolverParams) -> Result<bool> {
    let solved = solve_patch_psi(patch, params)?;
    fill_physical_ghosts(patch, params.dry_tolerance);
    Ok(solved)
}

/// Source update followed by the SWE step, psi already in place. Ghosts on
/// interior sides must be filled by the caller. On failure the cells are
/// restored to their state on entry.
pub fn source_and_swe(patch: &mut Patch, dt: f64, params: &SolverParams) -> Result<SweReport> {
    let saved = patch.cells.clone();
    apply_source(patch, dt, params);
    fill_physical_ghosts(patch, params.dry_tolerance);
    match swe_step(patch, dt, params) {
        Ok(r) => Ok(r),
        Err(e) => {
            patch.cells = saved;
            Err(e)
        }
    }
}

/// Full fractional step on a patch whose interior-side ghosts are filled:
/// psi solve, source update, SWE step. The patch time advances by `dt`.
pub fn single_grid_step(patch: &mut Patch, dt: f64, params: &SolverParams) -> Result<StepReport> {
    fill_physical_ghosts(patch, params.dry_tolerance);
    let saved_psi: Vec<f64> = patch.cells.iter().map(|c| c.psi).collect();
    let solved = update_psi(patch, params)?;
    match source_and_swe(patch, dt, params) {
        Ok(swe) => {
            patch.t += dt;
            Ok(StepReport { swe, solved })
        }
        Err(e) => {
            for (c, p) in patch.cells.iter_mut().zip(saved_psi) {
                c.psi = p;
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bathymetry::Bathymetry;
    use crate::error::Error;
    use crate::state::CellState;
    use crate::swe::stable_dt;

    fn patch(kind: BoundaryKind, cells: Vec<CellState>, b: Vec<f64>, dx: f64) -> Patch {
        let n = cells.len();
        let mut p = Patch::new(1, 0, n, dx, 0.0, Side::Physical(kind), Side::Physical(kind));
        for (k, c) in cells.into_iter().enumerate() {
            p.cells[GHOST + k] = c;
        }
        let mut fb = vec![0.0; GHOST];
        fb.extend(b);
        fb.extend(vec![0.0; GHOST]);
        if kind == BoundaryKind::Periodic {
            for g in 0..GHOST {
                fb[g] = fb[n + g];
                fb[GHOST + n + g] = fb[GHOST + g];
            }
        }
        p.bathy = Bathymetry::from_elevation(fb);
        p.apply_bathymetry_boundary();
        p
    }

    #[test]
    fn ghost_rules() {
        let cells = vec![
            CellState::new(1.0, 0.5, 0.1),
            CellState::new(2.0, 0.7, 0.2),
            CellState::new(3.0, 0.9, 0.3),
        ];
        let mut p = patch(BoundaryKind::Wall, cells.clone(), vec![0.0; 3], 1.0);
        fill_physical_ghosts(&mut p, 1e-3);
        assert_eq!(p.cells[1], CellState::new(1.0, -0.5, 0.0));
        assert_eq!(p.cells[0], CellState::new(2.0, -0.7, 0.0));
        assert_eq!(p.cells[5], CellState::new(3.0, -0.9, 0.0));
        assert_eq!(p.cells[6], CellState::new(2.0, -0.7, 0.0));
        let mut p = patch(BoundaryKind::Extrapolation, cells.clone(), vec![0.0; 3], 1.0);
        fill_physical_ghosts(&mut p, 1e-3);
        assert_eq!(p.cells[0], CellState::new(1.0, 0.5, 0.0));
        assert_eq!(p.cells[6], CellState::new(3.0, 0.9, 0.0));
        let mut p = patch(BoundaryKind::Periodic, cells.clone(), vec![0.0; 3], 1.0);
        fill_physical_ghosts(&mut p, 1e-3);
        assert_eq!(p.cells[0], cells[1]);
        assert_eq!(p.cells[1], cells[2]);
        assert_eq!(p.cells[5], cells[0]);
        assert_eq!(p.cells[6], cells[1]);
    }

    #[test]
    fn zero_psi_leaves_momentum_bitwise() {
        let cells: Vec<CellState> = (0..6).map(|i| CellState::new(2.0, 0.1 * i as f64 - 0.2, 0.0)).collect();
        let mut p = patch(BoundaryKind::Wall, cells, vec![-2.0; 6], 1.0);
        let before = p.cells.clone();
        for integ in [SourceIntegrator::ForwardEuler, SourceIntegrator::Rk2] {
            let prm = SolverParams {
                source_integrator: integ,
                ..SolverParams::default()
            };
            apply_source(&mut p, 0.37, &prm);
            assert_eq!(p.cells, before);
        }
    }

    #[test]
    fn integrators_agree_for_frozen_psi() {
        for (hu, psi, dt) in [(1.0, 0.3, 0.01), (-4.5, 1e-7, 12.0), (0.0, -2.0, 0.5)] {
            let a = SourceIntegrator::ForwardEuler.update(hu, psi, dt);
            let b = SourceIntegrator::Rk2.update(hu, psi, dt);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn source_skips_dry_cells_and_physical_ghosts() {
        let cells = vec![CellState::new(1.0, 0.0, 2.0), CellState::new(0.0, 0.0, 2.0)];
        let mut p = patch(BoundaryKind::Wall, cells, vec![-1.0, 1.0], 1.0);
        p.cells[0].psi = 5.0;
        p.cells[0].h = 1.0;
        apply_source(&mut p, 0.5, &SolverParams::default());
        assert_eq!(p.cells[GHOST].hu, 1.0);
        assert_eq!(p.cells[GHOST + 1].hu, 0.0);
        assert_eq!(p.cells[0].hu, 0.0);
    }

    #[test]
    fn lake_at_rest_is_preserved_with_dispersion() {
        let n = 60;
        let dx = 1000.0;
        let b: Vec<f64> = (0..n).map(|i| -4000.0 + 1500.0 * (-((i as f64 - 30.0) / 6.0).powi(2)).exp()).collect();
        let cells: Vec<CellState> = b.iter().map(|&v| CellState::new(-v, 0.0, 0.0)).collect();
        let mut p = patch(BoundaryKind::Wall, cells.clone(), b, dx);
        let prm = SolverParams::default();
        let dt = stable_dt(&p, 0.9, prm.g, prm.dry_tolerance).unwrap();
        for _ in 0..50 {
            let r = single_grid_step(&mut p, dt, &prm).unwrap();
            assert!(r.solved);
        }
        assert_eq!(p.interior_cells(), &cells[..]);
    }

    #[test]
    fn cfl_failure_restores_the_patch() {
        let cells: Vec<CellState> = (0..10).map(|i| CellState::new(1.0 + 0.1 * i as f64, 0.0, 0.0)).collect();
        let mut p = patch(BoundaryKind::Wall, cells, vec![-1.0; 10], 0.01);
        let before = p.cells.clone();
        let err = single_grid_step(&mut p, 10.0, &SolverParams::default()).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
        assert_eq!(p.t, 0.0);
        assert_eq!(p.cells[GHOST..GHOST + 10], before[GHOST..GHOST + 10]);
    }
}
