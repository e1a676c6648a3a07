//! Well-balanced explicit finite-volume step for the shallow water
//! equations in fluctuation form.
//!
//! Each interface is split into two f-waves with HLLE speeds. The flux
//! difference includes the bathymetry term as g * hbar * (eta_R - eta_L),
//! which vanishes identically for a flat surface at rest. Dry neighbours
//! that the wet side cannot overtop are treated as reflecting walls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Patch, GHOST};
use crate::params::SolverParams;
use crate::state::CellState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limiter {
    /// First-order Godunov update, no correction fluxes.
    None,
    Minmod,
    /// Monotonized centered.
    MC,
}

impl Limiter {
    #[inline]
    pub fn phi(self, theta: f64) -> f64 {
        match self {
            Limiter::None => 0.0,
            Limiter::Minmod => theta.clamp(0.0, 1.0),
            Limiter::MC => (0.5 * (1.0 + theta)).min(2.0).min(2.0 * theta).max(0.0),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Limiter::None),
            "minmod" => Some(Limiter::Minmod),
            "mc" | "MC" => Some(Limiter::MC),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Limiter::None => "none",
            Limiter::Minmod => "minmod",
            Limiter::MC => "mc",
        }
    }
}

/// Interface solution in fluctuation form for (h, hu).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RiemannFluctuations {
    /// A^- dQ, applied to the left cell.
    pub left_going: [f64; 2],
    /// A^+ dQ, applied to the right cell.
    pub right_going: [f64; 2],
    pub waves: [[f64; 2]; 2],
    pub speeds: [f64; 2],
    pub max_speed: f64,
    /// One side is dry and cannot be reached; no mass crosses the interface.
    pub wall: bool,
}

/// Solve the interface problem between `ql` over elevation `bl` and `qr`
/// over `br`.
pub fn riemann_wellbalanced(
    ql: CellState,
    qr: CellState,
    bl: f64,
    br: f64,
    g: f64,
    dry_tol: f64,
) -> RiemannFluctuations {
    debug_assert!(ql.h >= 0.0 && qr.h >= 0.0, "negative depth at interface");
    debug_assert!(g > 0.0);
    let dry_l = ql.h <= dry_tol;
    let dry_r = qr.h <= dry_tol;
    if dry_l && dry_r {
        return RiemannFluctuations::default();
    }

    let (mut hl, mut hul, mut bl) = (ql.h, ql.hu, bl);
    let (mut hr, mut hur, mut br) = (qr.h, qr.hu, br);
    let mut wall_right = false;
    let mut wall_left = false;
    if dry_r {
        hur = 0.0;
        if hl + bl <= br {
            // Water on the left stays below the dry cell: mirror it.
            hr = hl;
            hur = -hul;
            br = bl;
            wall_right = true;
        }
    } else if dry_l {
        hul = 0.0;
        if hr + br <= bl {
            hl = hr;
            hul = -hur;
            bl = br;
            wall_left = true;
        }
    }
    let wall = wall_left || wall_right;
    let dry_front_right = dry_r && !wall;
    let dry_front_left = dry_l && !wall;

    let ul = if hl > dry_tol { hul / hl } else { 0.0 };
    let ur = if hr > dry_tol { hur / hr } else { 0.0 };
    let cl = (g * hl).sqrt();
    let cr = (g * hr).sqrt();

    let (s1, s2) = if dry_front_right {
        (ul - cl, ul + 2.0 * cl)
    } else if dry_front_left {
        (ur - 2.0 * cr, ur + cr)
    } else {
        let (sl, sr) = (hl.sqrt(), hr.sqrt());
        let u_hat = (sl * ul + sr * ur) / (sl + sr);
        let c_hat = (g * (hl + hr) * 0.5).sqrt();
        ((ul - cl).min(u_hat - c_hat), (ur + cr).max(u_hat + c_hat))
    };

    let max_speed = s1
        .abs()
        .max(s2.abs())
        .max(ul.abs() + cl)
        .max(ur.abs() + cr);

    let d1 = hur - hul;
    let d2 = (hur * ur - hul * ul) + g * 0.5 * (hl + hr) * ((hr + br) - (hl + bl));
    let span = s2 - s1;
    if !(span > 0.0) {
        return RiemannFluctuations {
            max_speed,
            wall,
            ..Default::default()
        };
    }
    let beta1 = (s2 * d1 - d2) / span;
    let beta2 = (d2 - s1 * d1) / span;
    let mut waves = [[beta1, beta1 * s1], [beta2, beta2 * s2]];
    let speeds = [s1, s2];

    // Nothing propagates into an unreachable dry cell.
    for p in 0..2 {
        if (wall_right && speeds[p] > 0.0) || (wall_left && speeds[p] < 0.0) {
            waves[p] = [0.0, 0.0];
        }
    }

    let mut left_going = [0.0; 2];
    let mut right_going = [0.0; 2];
    for p in 0..2 {
        let s = speeds[p];
        for m in 0..2 {
            if s < 0.0 {
                left_going[m] += waves[p][m];
            } else if s > 0.0 {
                right_going[m] += waves[p][m];
            } else {
                left_going[m] += 0.5 * waves[p][m];
                right_going[m] += 0.5 * waves[p][m];
            }
        }
    }

    RiemannFluctuations {
        left_going,
        right_going,
        waves,
        speeds,
        max_speed,
        wall,
    }
}

/// Outcome of an accepted SWE step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweReport {
    pub max_speed: f64,
    pub courant: f64,
}

/// Advance (h, hu) of the patch interior by `dt` with the high-resolution
/// wave-propagation update. Ghost cells must be filled. psi is not read;
/// it is zeroed only in cells that end the step dry.
///
/// The step is checked against `params.cfl_max` before anything is
/// written; a violation leaves the patch untouched and reports the
/// observed Courant number.
pub fn swe_step(patch: &mut Patch, dt: f64, params: &SolverParams) -> Result<SweReport> {
    let g = params.g;
    let dry_tol = params.dry_tolerance;
    let m = patch.total_len();
    let n = patch.n;
    let dtdx = dt / patch.dx;

    // Interface k sits between cells k-1 and k.
    let mut rp = vec![RiemannFluctuations::default(); m];
    for k in 1..m {
        rp[k] = riemann_wellbalanced(
            patch.cells[k - 1],
            patch.cells[k],
            patch.bathy.b[k - 1],
            patch.bathy.b[k],
            g,
            dry_tol,
        );
    }

    let first = GHOST;
    let last = GHOST + n;
    let max_speed = rp[first..=last]
        .iter()
        .map(|r| r.max_speed)
        .fold(0.0, f64::max);
    let courant = max_speed * dtdx;
    if !courant.is_finite() || courant > params.cfl_max {
        return Err(Error::CflViolation {
            level: patch.level,
            courant,
            max_speed,
        });
    }

    // Second-order correction fluxes.
    let mut corr = vec![[0.0f64; 2]; m];
    if params.limiter != Limiter::None {
        for k in first..=last {
            if rp[k].wall {
                continue;
            }
            for p in 0..2 {
                let z = rp[k].waves[p];
                let zz = z[0] * z[0] + z[1] * z[1];
                if zz == 0.0 {
                    continue;
                }
                let s = rp[k].speeds[p];
                let up = if s > 0.0 { k - 1 } else { k + 1 };
                let zu = rp[up].waves[p];
                let theta = (zu[0] * z[0] + zu[1] * z[1]) / zz;
                let phi = params.limiter.phi(theta);
                let coef = 0.5 * s.signum() * (1.0 - dtdx * s.abs()) * phi;
                corr[k][0] += coef * z[0];
                corr[k][1] += coef * z[1];
            }
        }
    }

    // Mass flux through each interface in conservative form.
    let mut mass_flux = vec![0.0f64; m];
    for k in first..=last {
        if rp[k].wall {
            continue;
        }
        mass_flux[k] = patch.cells[k - 1].hu + rp[k].left_going[0] + corr[k][0];
    }
    if patch.left.is_wall() {
        mass_flux[first] = 0.0;
    }
    if patch.right.is_wall() {
        mass_flux[last] = 0.0;
    }

    // Scale outgoing mass fluxes so no cell gives away more than it holds.
    let budget = |h: f64, out: f64| if out > h { h / out } else { 1.0 };
    let mut scale = vec![1.0f64; m];
    for j in first..last {
        let out = dtdx * (mass_flux[j + 1].max(0.0) + (-mass_flux[j]).max(0.0));
        scale[j] = budget(patch.cells[j].h, out);
    }
    scale[first - 1] = budget(patch.cells[first - 1].h, dtdx * mass_flux[first].max(0.0));
    scale[last] = budget(patch.cells[last].h, dtdx * (-mass_flux[last]).max(0.0));
    for k in first..=last {
        let donor = if mass_flux[k] > 0.0 { k - 1 } else { k };
        if scale[donor] < 1.0 {
            mass_flux[k] *= scale[donor];
        }
    }

    let velocity_cap_depth = 10.0 * dry_tol;
    for j in first..last {
        let q = patch.cells[j];
        let h = q.h - dtdx * (mass_flux[j + 1] - mass_flux[j]);
        let hu = q.hu
            - dtdx * (rp[j].right_going[1] + rp[j + 1].left_going[1])
            - dtdx * (corr[j + 1][1] - corr[j][1]);
        let mut out = CellState::new(h.max(0.0), hu, q.psi).sanitized(dry_tol);
        if out.h < velocity_cap_depth {
            let cap = out.h * params.max_velocity;
            out.hu = out.hu.clamp(-cap, cap);
        }
        if !out.is_finite() {
            return Err(Error::NonFinite {
                what: "SWE update",
                level: patch.level,
            });
        }
        patch.cells[j] = out;
    }

    for k in first..=last {
        patch.flux_record[k - first] = dt * mass_flux[k];
    }
    patch.edge_flux[0] += dt * mass_flux[first];
    patch.edge_flux[1] += dt * mass_flux[last];

    Ok(SweReport { max_speed, courant })
}

/// Largest stable step for `cfl_target`, or `None` when nothing moves (an
/// entirely dry patch, or still water of zero depth). Wet cells next to a
/// dry one are rated at |u| + 2c, the speed of a front running onto land.
pub fn stable_dt(patch: &Patch, cfl_target: f64, g: f64, dry_tol: f64) -> Option<f64> {
    let cells = &patch.cells;
    let speed = patch
        .interior()
        .filter(|&j| cells[j].h > dry_tol)
        .map(|j| {
            let c = (g * cells[j].h).sqrt();
            let shore = cells[j - 1].h <= dry_tol || cells[j + 1].h <= dry_tol;
            cells[j].velocity(dry_tol).abs() + if shore { 2.0 * c } else { c }
        })
        .fold(0.0, f64::max);
    if speed > 0.0 {
        Some(cfl_target * patch.dx / speed)
    } else {
        None
    }
}
