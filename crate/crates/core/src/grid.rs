//! Patch and hierarchy data model.

use serde::{Deserialize, Serialize};

use crate::bathymetry::{BathySource, Bathymetry};
use crate::state::CellState;

/// Ghost layers on each side of every patch. The limited SWE update needs
/// two; the elliptic solve reads only the inner one.
pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Zero-order extrapolation of (h, hu), psi = 0.
    Extrapolation,
    /// Reflecting wall: mirrored depth, negated momentum, psi = 0.
    Wall,
    Periodic,
}

impl BoundaryKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "extrapolation" | "extrap" | "outflow" => Some(BoundaryKind::Extrapolation),
            "wall" | "reflecting" => Some(BoundaryKind::Wall),
            "periodic" => Some(BoundaryKind::Periodic),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Extrapolation => "extrapolation",
            BoundaryKind::Wall => "wall",
            BoundaryKind::Periodic => "periodic",
        }
    }
}

/// What lies beyond one end of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Physical(BoundaryKind),
    /// Coarse-fine interface; ghosts come from the parent level.
    Interior,
}

impl Side {
    pub fn is_wall(self) -> bool {
        matches!(self, Side::Physical(BoundaryKind::Wall))
    }
}

/// Physical extent and base resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub base_cells: usize,
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl Domain {
    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn base_dx(&self) -> f64 {
        self.length() / self.base_cells as f64
    }

    pub fn is_periodic(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }

    /// Map x into [x_lo, x_hi) on periodic domains.
    pub fn wrap(&self, x: f64) -> f64 {
        if !self.is_periodic() {
            return x;
        }
        let l = self.length();
        let mut y = (x - self.x_lo) % l;
        if y < 0.0 {
            y += l;
        }
        self.x_lo + y
    }
}

/// A contiguous run of cells at one refinement level plus ghost layers.
#[derive(Debug, Clone)]
pub struct Patch {
    /// 1-based refinement level.
    pub level: usize,
    /// First interior cell, as a global index at this level's resolution.
    pub i_lo: i64,
    /// Number of interior cells.
    pub n: usize,
    pub dx: f64,
    /// Left edge of global cell 0 (the domain's left end).
    pub x_origin: f64,
    pub t: f64,
    /// `n + 2*GHOST` cells; interior cell `k` lives at `cells[k + GHOST]`.
    pub cells: Vec<CellState>,
    pub bathy: Bathymetry,
    pub left: Side,
    pub right: Side,
    /// dt-weighted mass flux through interfaces `0..=n` during the last SWE step.
    pub flux_record: Vec<f64>,
    /// dt-weighted mass flux through the left and right patch edges,
    /// accumulated since the last reset.
    pub edge_flux: [f64; 2],
}

impl Patch {
    /// Empty (dry, flat zero elevation) patch with the given geometry.
    pub fn new(
        level: usize,
        i_lo: i64,
        n: usize,
        dx: f64,
        x_origin: f64,
        left: Side,
        right: Side,
    ) -> Self {
        let total = n + 2 * GHOST;
        Patch {
            level,
            i_lo,
            n,
            dx,
            x_origin,
            t: 0.0,
            cells: vec![CellState::DRY; total],
            bathy: Bathymetry::from_elevation(vec![0.0; total]),
            left,
            right,
            flux_record: vec![0.0; n + 1],
            edge_flux: [0.0; 2],
        }
    }

    /// One past the last interior cell (global index).
    pub fn i_hi(&self) -> i64 {
        self.i_lo + self.n as i64
    }

    pub fn total_len(&self) -> usize {
        self.n + 2 * GHOST
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        GHOST..GHOST + self.n
    }

    pub fn interior_cells(&self) -> &[CellState] {
        &self.cells[GHOST..GHOST + self.n]
    }

    /// Global index of storage slot `j`.
    #[inline]
    pub fn global_index(&self, j: usize) -> i64 {
        self.i_lo + j as i64 - GHOST as i64
    }

    /// Storage slot of global index `i` if it is inside storage.
    #[inline]
    pub fn slot(&self, i: i64) -> Option<usize> {
        let j = i - self.i_lo + GHOST as i64;
        if j >= 0 && (j as usize) < self.total_len() {
            Some(j as usize)
        } else {
            None
        }
    }

    #[inline]
    pub fn contains_interior(&self, i: i64) -> bool {
        i >= self.i_lo && i < self.i_hi()
    }

    /// Cell-center coordinate of storage slot `j`.
    #[inline]
    pub fn x_center(&self, j: usize) -> f64 {
        self.x_origin + (self.global_index(j) as f64 + 0.5) * self.dx
    }

    pub fn x_left_edge(&self) -> f64 {
        self.x_origin + self.i_lo as f64 * self.dx
    }

    pub fn x_right_edge(&self) -> f64 {
        self.x_origin + self.i_hi() as f64 * self.dx
    }

    /// Surface elevation of slot `j`.
    #[inline]
    pub fn eta(&self, j: usize) -> f64 {
        self.cells[j].h + self.bathy.b[j]
    }

    pub fn mass(&self) -> f64 {
        self.interior_cells().iter().map(|c| c.h).sum::<f64>() * self.dx
    }

    /// Sample elevation at every slot (interior and ghosts) from `source`,
    /// with ghost slots on physical sides following the boundary rule.
    pub fn sample_bathymetry(&mut self, source: &BathySource, domain: &Domain) {
        let b: Vec<f64> = (0..self.total_len())
            .map(|j| source.eval(domain.wrap(self.x_center(j))))
            .collect();
        self.bathy = Bathymetry::from_elevation(b);
        self.apply_bathymetry_boundary();
    }

    /// Ghost elevations on physical sides: copied for extrapolation,
    /// mirrored for walls, wrapped from the far end for periodic sides.
    pub fn apply_bathymetry_boundary(&mut self) {
        let n = self.n;
        if let Side::Physical(kind) = self.left {
            for g in 0..GHOST {
                let src = match kind {
                    BoundaryKind::Extrapolation => GHOST,
                    BoundaryKind::Wall => 2 * GHOST - 1 - g,
                    BoundaryKind::Periodic => n + g,
                };
                let v = self.bathy.b[src];
                self.bathy.set(g, v);
            }
        }
        if let Side::Physical(kind) = self.right {
            for g in 0..GHOST {
                let dst = GHOST + n + g;
                let src = match kind {
                    BoundaryKind::Extrapolation => GHOST + n - 1,
                    BoundaryKind::Wall => GHOST + n - 1 - g,
                    BoundaryKind::Periodic => GHOST + g,
                };
                let v = self.bathy.b[src];
                self.bathy.set(dst, v);
            }
        }
    }
}

/// Ordered refinement levels of patches.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    /// `levels[0]` is level 1.
    pub levels: Vec<Vec<Patch>>,
    /// `ratios[k]` refines level k+1 into level k+2, in space and in time.
    pub ratios: Vec<usize>,
    pub domain: Domain,
    pub bathy_source: BathySource,
    pub t: f64,
    /// Elliptic solves performed per level (one count per patch solve).
    pub elliptic_solves: Vec<u64>,
}

impl Hierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.iter().take_while(|l| !l.is_empty()).count()
    }

    /// Cell width on 1-based `level`.
    pub fn dx(&self, level: usize) -> f64 {
        self.domain.base_dx() / self.cumulative_ratio(level) as f64
    }

    /// Product of ratios from level 1 up to `level`.
    pub fn cumulative_ratio(&self, level: usize) -> usize {
        self.ratios[..level - 1].iter().product()
    }

    /// Cells spanning the domain on `level`.
    pub fn level_cells(&self, level: usize) -> i64 {
        (self.domain.base_cells * self.cumulative_ratio(level)) as i64
    }

    /// Overall refinement between level 1 and the deepest configured level.
    pub fn overall_refinement(&self) -> usize {
        self.ratios.iter().product()
    }

    /// Total water volume per unit width, using the finest value available at
    /// each location.
    pub fn composite_mass(&self) -> f64 {
        let mut total = 0.0;
        let nlev = self.num_levels();
        for lev in 0..nlev {
            for p in &self.levels[lev] {
                for j in p.interior() {
                    let i = p.global_index(j);
                    if lev + 1 < nlev && self.covered_by_finer(lev, i) {
                        continue;
                    }
                    total += p.cells[j].h * p.dx;
                }
            }
        }
        total
    }

    /// Whether cell `i` of 0-based level `lev` lies under a patch of level `lev+1`.
    pub fn covered_by_finer(&self, lev: usize, i: i64) -> bool {
        match self.levels.get(lev + 1) {
            Some(fine) => {
                let r = self.ratios[lev] as i64;
                fine.iter().any(|p| i * r >= p.i_lo && (i + 1) * r <= p.i_hi())
            }
            None => false,
        }
    }

    /// Finest patch whose interior contains `x`, with its storage slot.
    pub fn finest_at(&self, x: f64) -> Option<(&Patch, usize)> {
        for lev in (0..self.num_levels()).rev() {
            for p in &self.levels[lev] {
                if x >= p.x_left_edge() && x < p.x_right_edge() {
                    let i = ((x - p.x_origin) / p.dx).floor() as i64;
                    let i = i.clamp(p.i_lo, p.i_hi() - 1);
                    return p.slot(i).map(|j| (p, j));
                }
            }
        }
        None
    }

    pub fn max_abs_hu(&self) -> f64 {
        self.fold_interior(0.0, |m, _, c| m.max(c.hu.abs()))
    }

    pub fn max_abs_psi(&self) -> f64 {
        self.fold_interior(0.0, |m, _, c| m.max(c.psi.abs()))
    }

    /// Largest |eta| over wet interior cells of all levels.
    pub fn max_abs_eta(&self, dry_tol: f64) -> f64 {
        self.fold_interior(0.0, |m, b, c| {
            if c.h > dry_tol {
                m.max((c.h + b).abs())
            } else {
                m
            }
        })
    }

    fn fold_interior(&self, init: f64, f: impl Fn(f64, f64, &CellState) -> f64) -> f64 {
        let mut acc = init;
        for level in &self.levels {
            for p in level {
                for j in p.interior() {
                    acc = f(acc, p.bathy.b[j], &p.cells[j]);
                }
            }
        }
        acc
    }

    /// Check that every level-(l+1) patch, coarsened, sits inside a single
    /// level-l patch interior with `buffer` coarse cells to spare on sides
    /// that are not physical boundaries.
    pub fn check_nesting(&self) -> crate::error::Result<()> {
        for lev in 1..self.num_levels() {
            let r = self.ratios[lev - 1] as i64;
            let buffer = nesting_buffer(r as usize) as i64;
            for p in &self.levels[lev] {
                if p.i_lo % r != 0 || p.i_hi() % r != 0 {
                    return Err(crate::error::Error::Nesting {
                        level: lev + 1,
                        detail: format!("patch [{}, {}) not aligned to ratio {r}", p.i_lo, p.i_hi()),
                    });
                }
                let lo = p.i_lo / r - if p.left == Side::Interior { buffer } else { 0 };
                let hi = p.i_hi() / r + if p.right == Side::Interior { buffer } else { 0 };
                let ok = self.levels[lev - 1]
                    .iter()
                    .any(|c| lo >= c.i_lo && hi <= c.i_hi());
                if !ok {
                    return Err(crate::error::Error::Nesting {
                        level: lev + 1,
                        detail: format!(
                            "patch [{}, {}) coarsened to [{lo}, {hi}) is not inside a level-{} patch",
                            p.i_lo,
                            p.i_hi(),
                            lev
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Coarse cells that must separate a fine patch edge from its parent's edge
/// so that fine ghost cells and their interpolation stencil stay inside
/// parent storage.
pub fn nesting_buffer(ratio: usize) -> usize {
    GHOST.div_ceil(ratio).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patch_geometry() {
        let p = Patch::new(2, 10, 4, 0.5, -1.0, Side::Interior, Side::Interior);
        assert_eq!(p.i_hi(), 14);
        assert_eq!(p.total_len(), 8);
        assert_eq!(p.global_index(GHOST), 10);
        assert_eq!(p.slot(8), Some(0));
        assert_eq!(p.slot(7), None);
        assert_eq!(p.slot(15), Some(7));
        assert_eq!(p.slot(16), None);
        assert!((p.x_center(GHOST) - (-1.0 + 10.5 * 0.5)).abs() < 1e-15);
        assert_eq!(p.x_left_edge(), 4.0);
        assert_eq!(p.x_right_edge(), 6.0);
    }

    #[test]
    fn wall_ghost_bathymetry_is_mirrored() {
        let mut p = Patch::new(
            1,
            0,
            3,
            1.0,
            0.0,
            Side::Physical(BoundaryKind::Wall),
            Side::Physical(BoundaryKind::Extrapolation),
        );
        let domain = Domain {
            x_lo: 0.0,
            x_hi: 3.0,
            base_cells: 3,
            left: BoundaryKind::Wall,
            right: BoundaryKind::Extrapolation,
        };
        p.sample_bathymetry(&BathySource::function(|x| -x), &domain);
        assert_eq!(&p.bathy.b[..2], &[-1.5, -0.5]);
        assert_eq!(&p.bathy.b[5..], &[-2.5, -2.5]);
    }

    #[test]
    fn wrap_maps_into_domain() {
        let d = Domain {
            x_lo: 0.0,
            x_hi: 10.0,
            base_cells: 10,
            left: BoundaryKind::Periodic,
            right: BoundaryKind::Periodic,
        };
        assert_eq!(d.wrap(-0.5), 9.5);
        assert_eq!(d.wrap(10.5), 0.5);
        assert_eq!(d.wrap(3.0), 3.0);
    }

    #[test]
    fn nesting_buffer_covers_ghosts() {
        assert_eq!(nesting_buffer(1), 2);
        assert_eq!(nesting_buffer(2), 1);
        assert_eq!(nesting_buffer(6), 1);
    }
}
