//! Patch hierarchy management: construction, flagging and regridding, and
//! the recursive subcycled advance with coarse-fine synchronization.

use serde::{Deserialize, Serialize};

use crate::bathymetry::{conform_to_coarse, BathySource, Bathymetry};
use crate::error::{Error, Result};
use crate::grid::{nesting_buffer, BoundaryKind, Domain, Hierarchy, Patch, Side, GHOST};
use crate::par;
use crate::params::SolverParams;
use crate::state::CellState;
use crate::stepper::{fill_physical_ghosts, source_and_swe, update_psi};
use crate::swe::{stable_dt, SweReport};
use crate::transfer::{average_to_coarse, coarse_index, interpolate_block, interpolate_to_fine};

/// Interval of x where refinement is forced up to `min_level` and capped
/// at `max_level` (1-based levels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticRegion {
    pub x_lo: f64,
    pub x_hi: f64,
    pub min_level: usize,
    pub max_level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmrParams {
    /// Refinement ratio between consecutive levels; the hierarchy has
    /// `ratios.len() + 1` levels at most.
    pub ratios: Vec<usize>,
    /// Coarse steps between regrids; 0 disables regridding.
    pub regrid_interval: usize,
    /// Refine where |eta| exceeds this [m].
    #[serde(with = "extended_f64")]
    pub amplitude_tol: f64,
    /// Refine where the eta jump to a neighbour exceeds this [m].
    #[serde(with = "extended_f64")]
    pub gradient_tol: f64,
    /// Flagged cells are dilated by this many cells.
    pub flag_buffer: usize,
    pub static_regions: Vec<StaticRegion>,
}

impl Default for AmrParams {
    fn default() -> Self {
        AmrParams {
            ratios: Vec::new(),
            regrid_interval: 4,
            amplitude_tol: 0.1,
            gradient_tol: f64::INFINITY,
            flag_buffer: 2,
            static_regions: Vec::new(),
        }
    }
}

/// JSON has no infinity; thresholds switched off are written as "inf".
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl AmrParams {
    pub fn max_levels(&self) -> usize {
        self.ratios.len() + 1
    }
}

/// Initial state from cell-center coordinate and bed elevation.
pub type InitialFn = dyn Fn(f64, f64) -> CellState + Sync;

/// Fraction of the way through [t_lo, t_hi] at time `t`, rejecting times
/// outside the bracket.
pub fn bracket_theta(t: f64, t_lo: f64, t_hi: f64) -> Result<f64> {
    let span = t_hi - t_lo;
    let slack = 1e-12 * t_hi.abs().max(t_lo.abs()).max(1.0);
    if t < t_lo - slack || t > t_hi + slack {
        return Err(Error::TimeBracket { t, t_lo, t_hi });
    }
    if span <= 0.0 {
        return Ok(0.0);
    }
    Ok(((t - t_lo) / span).clamp(0.0, 1.0))
}

/// Build the hierarchy at t = 0: a single level-1 patch over the domain,
/// then finer levels placed by the flagging rules and initialised from
/// `init` directly, and finally averaged down level by level.
pub fn build_hierarchy(
    domain: Domain,
    bathy_source: BathySource,
    amr: &AmrParams,
    params: &SolverParams,
    init: &InitialFn,
) -> Result<Hierarchy> {
    if domain.base_cells == 0 || !(domain.x_hi > domain.x_lo) {
        return Err(Error::config("domain", "need x_hi > x_lo and at least one cell"));
    }
    if (domain.left == BoundaryKind::Periodic) != (domain.right == BoundaryKind::Periodic) {
        return Err(Error::config("boundary", "periodic boundaries must be used on both sides"));
    }
    if amr.ratios.contains(&0) {
        return Err(Error::config("ratios", "refinement ratios must be positive"));
    }
    let mut base = Patch::new(
        1,
        0,
        domain.base_cells,
        domain.base_dx(),
        domain.x_lo,
        Side::Physical(domain.left),
        Side::Physical(domain.right),
    );
    base.sample_bathymetry(&bathy_source, &domain);
    for j in base.interior() {
        base.cells[j] = init(base.x_center(j), base.bathy.b[j]).sanitized(params.dry_tolerance);
    }
    fill_physical_ghosts(&mut base, params.dry_tolerance);
    let max_levels = amr.max_levels();
    let mut levels = vec![Vec::new(); max_levels];
    levels[0].push(base);
    let mut h = Hierarchy {
        levels,
        ratios: amr.ratios.clone(),
        domain,
        bathy_source,
        t: 0.0,
        elliptic_solves: vec![0; max_levels],
    };
    if max_levels > 1 {
        regrid_with(&mut h, amr, params, Some(init))?;
        average_down(&mut h, params.dry_tolerance)?;
    }
    Ok(h)
}

/// Rebuild levels 2 and up from the current data.
pub fn regrid(h: &mut Hierarchy, amr: &AmrParams, params: &SolverParams) -> Result<()> {
    regrid_with(h, amr, params, None)
}

fn regrid_with(
    h: &mut Hierarchy,
    amr: &AmrParams,
    params: &SolverParams,
    init: Option<&InitialFn>,
) -> Result<()> {
    let max_levels = h.levels.len();
    let old = std::mem::replace(&mut h.levels, vec![Vec::new(); max_levels]);
    h.levels[0] = old[0].clone();
    for lev in 0..max_levels - 1 {
        if h.levels[lev].is_empty() {
            break;
        }
        let r = h.ratios[lev];
        let runs = plan_level(h, &old, lev, amr, params.dry_tolerance);
        let mut fine = Vec::with_capacity(runs.len());
        for (parent_idx, lo, hi) in runs {
            let mut p = new_fine_patch(h, lev, parent_idx, lo * r as i64, ((hi - lo) as usize) * r);
            fill_new_patch(&mut p, &h.levels[lev], old.get(lev + 1).map(|v| v.as_slice()), r, params, init)?;
            fine.push(p);
        }
        h.levels[lev + 1] = fine;
    }
    h.check_nesting()
}

/// Coarse-index runs [lo, hi) of level `lev` (0-based) to be covered by
/// level `lev + 1`, each with the index of its parent patch.
fn plan_level(
    h: &Hierarchy,
    old: &[Vec<Patch>],
    lev: usize,
    amr: &AmrParams,
    dry_tol: f64,
) -> Vec<(usize, i64, i64)> {
    let fine_level = lev + 2;
    let r = h.ratios[lev];
    let buffer = nesting_buffer(r) as i64;
    let mut runs = Vec::new();
    for (pi, p) in h.levels[lev].iter().enumerate() {
        let n = p.n;
        let mut flag = vec![false; n];
        for (k, f) in flag.iter_mut().enumerate() {
            let j = GHOST + k;
            let wet = |j: usize| p.cells[j].h > dry_tol;
            if !wet(j) {
                continue;
            }
            let eta = p.eta(j);
            let mut hit = eta.abs() > amr.amplitude_tol;
            for nb in [j - 1, j + 1] {
                if wet(nb) && (p.eta(nb) - eta).abs() > amr.gradient_tol {
                    hit = true;
                }
            }
            *f = hit;
        }
        // Keep refinement under any existing level two steps finer.
        if let Some(finer) = old.get(lev + 2) {
            let rr = (r * h.ratios[lev + 1]) as i64;
            for q in finer {
                let lo = q.i_lo.div_euclid(rr);
                let hi = (q.i_hi() - 1).div_euclid(rr) + 1;
                for i in lo.max(p.i_lo)..hi.min(p.i_hi()) {
                    flag[(i - p.i_lo) as usize] = true;
                }
            }
        }
        let x_of = |k: usize| p.x_center(GHOST + k);
        for region in &amr.static_regions {
            if region.min_level >= fine_level {
                for (k, f) in flag.iter_mut().enumerate() {
                    let x = x_of(k);
                    if x >= region.x_lo && x <= region.x_hi {
                        *f = true;
                    }
                }
            }
        }
        let mut grown = flag.clone();
        let b = amr.flag_buffer;
        for (k, &f) in flag.iter().enumerate() {
            if f {
                for g in grown.iter_mut().take((k + b + 1).min(n)).skip(k.saturating_sub(b)) {
                    *g = true;
                }
            }
        }
        for region in &amr.static_regions {
            if region.max_level < fine_level {
                for (k, g) in grown.iter_mut().enumerate() {
                    let x = x_of(k);
                    if x >= region.x_lo && x <= region.x_hi {
                        *g = false;
                    }
                }
            }
        }
        // Proper nesting: stay clear of interior and periodic edges.
        let needs_gap = |s: Side| !matches!(s, Side::Physical(BoundaryKind::Wall | BoundaryKind::Extrapolation));
        let lo_clip = if needs_gap(p.left) { buffer } else { 0 } as usize;
        let hi_clip = if needs_gap(p.right) { buffer } else { 0 } as usize;
        for (k, g) in grown.iter_mut().enumerate() {
            if k < lo_clip || k + hi_clip >= n {
                *g = false;
            }
        }
        let mut patch_runs: Vec<(i64, i64)> = Vec::new();
        let mut k = 0;
        while k < n {
            if grown[k] {
                let start = k;
                while k < n && grown[k] {
                    k += 1;
                }
                let (lo, hi) = (p.i_lo + start as i64, p.i_lo + k as i64);
                match patch_runs.last_mut() {
                    Some(last) if ((lo - last.1) as usize) * r < 2 * GHOST => last.1 = hi,
                    _ => patch_runs.push((lo, hi)),
                }
            } else {
                k += 1;
            }
        }
        runs.extend(patch_runs.into_iter().map(|(lo, hi)| (pi, lo, hi)));
    }
    runs
}

/// Geometry and bathymetry of a new level-(lev+2) patch over fine cells
/// [i_lo, i_lo + n). Interior elevations are conformed so that each block
/// averages to its parent cell.
fn new_fine_patch(h: &Hierarchy, lev: usize, parent_idx: usize, i_lo: i64, n: usize) -> Patch {
    let r = h.ratios[lev];
    let parent = &h.levels[lev][parent_idx];
    let level = lev + 2;
    let dx = h.dx(level);
    let cells_here = h.level_cells(level);
    let periodic = h.domain.is_periodic();
    let left = if i_lo == 0 && !periodic {
        Side::Physical(h.domain.left)
    } else {
        Side::Interior
    };
    let right = if i_lo + n as i64 == cells_here && !periodic {
        Side::Physical(h.domain.right)
    } else {
        Side::Interior
    };
    let mut p = Patch::new(level, i_lo, n, dx, h.domain.x_lo, left, right);
    p.t = parent.t;
    let mut b: Vec<f64> = (0..p.total_len())
        .map(|j| h.bathy_source.eval(h.domain.wrap(p.x_center(j))))
        .collect();
    for blk in 0..n / r {
        let s = GHOST + blk * r;
        let ic = coarse_index(i_lo + (blk * r) as i64, r);
        let bc = parent.bathy.b[parent.slot(ic).expect("parent covers fine patch")];
        conform_to_coarse(&mut b[s..s + r], bc);
    }
    p.bathy = Bathymetry::from_elevation(b);
    p.apply_bathymetry_boundary();
    p
}

fn fill_new_patch(
    p: &mut Patch,
    parents: &[Patch],
    old_fine: Option<&[Patch]>,
    r: usize,
    params: &SolverParams,
    init: Option<&InitialFn>,
) -> Result<()> {
    let dry_tol = params.dry_tolerance;
    if let Some(init) = init {
        for j in p.interior() {
            p.cells[j] = init(p.x_center(j), p.bathy.b[j]).sanitized(dry_tol);
        }
        return Ok(());
    }
    for blk in 0..p.n / r {
        let s = GHOST + blk * r;
        let i0 = p.global_index(s);
        let prev = old_fine.and_then(|v| v.iter().find(|q| q.contains_interior(i0)));
        let block = match prev {
            Some(q) => {
                let js = q.slot(i0).expect("old fine cell");
                q.cells[js..js + r].to_vec()
            }
            None => {
                let ic = coarse_index(i0, r);
                let parent = parents
                    .iter()
                    .find(|c| c.contains_interior(ic))
                    .ok_or_else(|| Error::Nesting {
                        level: p.level,
                        detail: format!("no parent for coarse cell {ic}"),
                    })?;
                interpolate_block(parent, r, ic, &p.bathy.b[s..s + r], dry_tol)?
            }
        };
        p.cells[s..s + r].copy_from_slice(&block);
    }
    Ok(())
}

/// Replace every covered coarse cell by the average of its fine cells,
/// finest level first.
pub fn average_down(h: &mut Hierarchy, dry_tol: f64) -> Result<()> {
    for lev in (1..h.num_levels()).rev() {
        let r = h.ratios[lev - 1];
        let (coarse, fine) = h.levels.split_at_mut(lev);
        average_level(&fine[0], &mut coarse[lev - 1], r, dry_tol)?;
    }
    Ok(())
}

fn average_level(fine: &[Patch], coarse: &mut [Patch], r: usize, dry_tol: f64) -> Result<()> {
    for f in fine {
        let ic = coarse_index(f.i_lo, r);
        let parent = coarse
            .iter_mut()
            .find(|c| c.contains_interior(ic))
            .ok_or_else(|| Error::Nesting {
                level: f.level,
                detail: format!("patch at {} has no parent", f.i_lo),
            })?;
        average_to_coarse(f, parent, r, dry_tol)?;
    }
    Ok(())
}

/// Largest coarse step keeping every level within `cfl_target`, given
/// that level l steps with dt / (r_1 ... r_{l-1}).
pub fn stable_hierarchy_dt(h: &Hierarchy, params: &SolverParams) -> Option<f64> {
    let mut dt: Option<f64> = None;
    for lev in 0..h.num_levels() {
        let scale = h.cumulative_ratio(lev + 1) as f64;
        for p in &h.levels[lev] {
            if let Some(d) = stable_dt(p, params.cfl_target, params.g, params.dry_tolerance) {
                let d = d * scale;
                dt = Some(dt.map_or(d, |v| v.min(d)));
            }
        }
    }
    dt
}

/// Parent-level data bracketing a fine substep.
#[derive(Clone, Copy)]
struct ParentBracket<'a> {
    old: &'a [Patch],
    new: &'a [Patch],
    ratio: usize,
}

/// Fill the ghost cells of `p`: physical sides by their rule, interior
/// sides by spatial interpolation of both parent snapshots blended at
/// fraction `theta` of the parent step.
fn fill_ghosts(p: &mut Patch, parent: Option<ParentBracket<'_>>, theta: f64, dry_tol: f64) -> Result<()> {
    if let Some(pb) = parent {
        let n = p.n;
        let mut slots = Vec::with_capacity(2 * GHOST);
        if p.left == Side::Interior {
            slots.extend(0..GHOST);
        }
        if p.right == Side::Interior {
            slots.extend(GHOST + n..n + 2 * GHOST);
        }
        if !slots.is_empty() {
            let a = interpolate_to_fine(pb.old, p, pb.ratio, &slots, dry_tol)?;
            let b = interpolate_to_fine(pb.new, p, pb.ratio, &slots, dry_tol)?;
            for (k, &j) in slots.iter().enumerate() {
                let (qa, qb) = (a[k], b[k]);
                p.cells[j] = CellState {
                    h: qa.h + theta * (qb.h - qa.h),
                    hu: qa.hu + theta * (qb.hu - qa.hu),
                    psi: qa.psi + theta * (qb.psi - qa.psi),
                }
                .sanitized(dry_tol);
            }
        }
    }
    fill_physical_ghosts(p, dry_tol);
    Ok(())
}

/// Ghost cells of a fine patch at fraction `theta` of the parent step,
/// from the parent level before (`old`) and after (`new`) that step.
pub fn fine_ghost_bc(
    fine: &mut Patch,
    old: &[Patch],
    new: &[Patch],
    ratio: usize,
    theta: f64,
    dry_tol: f64,
) -> Result<()> {
    fill_ghosts(fine, Some(ParentBracket { old, new, ratio }), theta, dry_tol)
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdvanceReport {
    /// Largest Courant number seen on each level.
    pub courant: Vec<f64>,
    /// Rejected attempts before the step went through.
    pub retries: usize,
    /// Coarse step actually taken.
    pub dt: f64,
}

/// Advance the whole hierarchy by one coarse step of at most `dt`. A step
/// rejected for CFL is retried from the saved state with a smaller step.
pub fn advance_hierarchy(h: &mut Hierarchy, dt: f64, params: &SolverParams) -> Result<AdvanceReport> {
    let mut dt = dt;
    let mut retries = 0;
    loop {
        let saved = h.levels.clone();
        let saved_solves = h.elliptic_solves.clone();
        match advance_once(h, dt, params) {
            Ok(courant) => {
                h.t += dt;
                for level in h.levels.iter_mut() {
                    for p in level {
                        p.t = h.t;
                    }
                }
                return Ok(AdvanceReport { courant, retries, dt });
            }
            Err(Error::CflViolation { courant, .. }) if retries < 8 => {
                h.levels = saved;
                h.elliptic_solves = saved_solves;
                dt *= (params.cfl_target / courant).min(0.5);
                retries += 1;
            }
            Err(e) => {
                h.levels = saved;
                h.elliptic_solves = saved_solves;
                return Err(e);
            }
        }
    }
}

fn advance_once(h: &mut Hierarchy, dt: f64, params: &SolverParams) -> Result<Vec<f64>> {
    let nlev = h.num_levels();
    let mut courant = vec![0.0; nlev];
    let t0 = h.t;
    let Hierarchy {
        levels,
        ratios,
        elliptic_solves,
        ..
    } = h;
    advance_level(
        &mut levels[..nlev],
        ratios,
        0,
        t0,
        dt,
        None,
        (0.0, 1.0),
        params,
        elliptic_solves,
        &mut courant,
    )?;
    Ok(courant)
}

#[allow(clippy::too_many_arguments)]
fn advance_level(
    levels: &mut [Vec<Patch>],
    ratios: &[usize],
    lev: usize,
    t0: f64,
    dt: f64,
    parent: Option<ParentBracket<'_>>,
    theta: (f64, f64),
    params: &SolverParams,
    solves: &mut [u64],
    courant: &mut [f64],
) -> Result<()> {
    let dry_tol = params.dry_tolerance;
    let has_child = lev + 1 < levels.len() && !levels[lev + 1].is_empty();
    let parallel = params.parallel;

    let results = par::map_mut(&mut levels[lev], parallel, |_, p| -> Result<bool> {
        fill_ghosts(p, parent, theta.0, dry_tol)?;
        update_psi(p, params)
    });
    for r in results {
        if r? {
            solves[lev] += 1;
        }
    }

    let old = if has_child { Some(levels[lev].clone()) } else { None };

    let results = par::map_mut(&mut levels[lev], parallel, |_, p| -> Result<SweReport> {
        let rep = source_and_swe(p, dt, params)?;
        p.t = t0 + dt;
        Ok(rep)
    });
    for r in results {
        let rep = r?;
        courant[lev] = courant[lev].max(rep.courant);
    }

    let Some(old) = old else {
        return Ok(());
    };
    let r = ratios[lev];

    // Provisional psi at the end of the step, for the fine ghost cells only.
    let results = par::map_mut(&mut levels[lev], parallel, |_, p| -> Result<(bool, Patch)> {
        fill_ghosts(p, parent, theta.1, dry_tol)?;
        let keep: Vec<f64> = p.cells.iter().map(|c| c.psi).collect();
        let solved = update_psi(p, params)?;
        let snapshot = p.clone();
        for (c, v) in p.cells.iter_mut().zip(keep) {
            c.psi = v;
        }
        Ok((solved, snapshot))
    });
    let mut new = Vec::with_capacity(results.len());
    for res in results {
        let (solved, snap) = res?;
        if solved {
            solves[lev] += 1;
        }
        new.push(snap);
    }

    for p in levels[lev + 1].iter_mut() {
        p.edge_flux = [0.0; 2];
    }
    let dt_fine = dt / r as f64;
    let bracket = ParentBracket {
        old: &old,
        new: &new,
        ratio: r,
    };
    for k in 0..r {
        let th = (k as f64 / r as f64, (k + 1) as f64 / r as f64);
        advance_level(
            levels,
            ratios,
            lev + 1,
            t0 + k as f64 * dt_fine,
            dt_fine,
            Some(bracket),
            th,
            params,
            solves,
            courant,
        )?;
    }
    for p in levels[lev + 1].iter_mut() {
        p.t = t0 + dt;
    }

    let (coarse, fine) = levels.split_at_mut(lev + 1);
    average_level(&fine[0], &mut coarse[lev], r, dry_tol)?;
    reflux(&mut fine[0], &mut coarse[lev], r, dry_tol)
}

/// Correct the uncovered coarse cells next to each fine patch so that the
/// mass crossing the coarse-fine edge is the fine levels' time-integrated
/// flux rather than the coarse one. A correction that would leave a thin
/// coarse cell with negative depth empties it and takes the rest of the
/// water from the fine cell at the edge, so no volume is created.
fn reflux(fine: &mut [Patch], coarse: &mut [Patch], r: usize, dry_tol: f64) -> Result<()> {
    let ri = r as i64;
    for f in fine.iter_mut() {
        for side in 0..2 {
            let (edge_side, edge_fine) = if side == 0 { (f.left, f.i_lo) } else { (f.right, f.i_hi()) };
            if edge_side != Side::Interior {
                continue;
            }
            let edge = edge_fine / ri;
            let outside = if side == 0 { edge - 1 } else { edge };
            let Some(c) = coarse.iter_mut().find(|c| c.contains_interior(edge - 1) && c.contains_interior(edge)) else {
                continue;
            };
            let coarse_flux = c.flux_record[(edge - c.i_lo) as usize];
            let delta = (coarse_flux - f.edge_flux[side]) / c.dx;
            let j = c.slot(outside).expect("interior cell");
            let q = &mut c.cells[j];
            if side == 0 {
                q.h += delta;
            } else {
                q.h -= delta;
            }
            let deficit = if q.h < 0.0 { -q.h * c.dx } else { 0.0 };
            *q = q.sanitized(dry_tol);
            if deficit > 0.0 {
                let jf = if side == 0 { GHOST } else { GHOST + f.n - 1 };
                let cell = &mut f.cells[jf];
                let h_new = (cell.h - deficit / f.dx).max(0.0);
                if cell.h > 0.0 {
                    cell.hu *= h_new / cell.h;
                }
                cell.h = h_new;
                *cell = cell.sanitized(dry_tol);
                average_to_coarse(f, c, r, dry_tol)?;
            }
        }
    }
    Ok(())
}
