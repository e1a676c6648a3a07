//! Inter-level transfer: coarse-to-fine interpolation and fine-to-coarse
//! averaging.

use crate::bathymetry::mean;
use crate::error::{Error, Result};
use crate::grid::Patch;
use crate::state::CellState;

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Coarse cell index containing fine cell `i_fine` (floor division).
#[inline]
pub fn coarse_index(i_fine: i64, ratio: usize) -> i64 {
    i_fine.div_euclid(ratio as i64)
}

/// Offset of a fine cell center from its coarse cell center, in coarse cell
/// widths, in (-1/2, 1/2).
#[inline]
pub fn fine_offset(i_fine: i64, ratio: usize) -> f64 {
    let r = ratio as i64;
    let sub = i_fine - coarse_index(i_fine, ratio) * r;
    (sub as f64 + 0.5) / ratio as f64 - 0.5
}

/// Interpolated state of fine cell `i_fine` whose elevation is `b_fine`.
///
/// Depth is reconstructed from the surface: the minmod-limited slope of
/// eta = h + B is applied and the fine/coarse elevation difference is
/// added back, so a flat surface stays exactly flat over any bathymetry.
/// Momentum and psi use their own limited slopes. Next to a dry coarse
/// cell all slopes are dropped; a dry coarse cell, or a reconstruction
/// that would go negative, yields h = 0.
pub fn interpolate_cell(
    coarse: &Patch,
    ratio: usize,
    i_fine: i64,
    b_fine: f64,
    dry_tol: f64,
) -> Result<CellState> {
    Ok(match reconstruct(coarse, ratio, i_fine, b_fine, dry_tol)? {
        Recon::Exact(q) | Recon::Clipped(q) => q,
        Recon::Copy(q) => q,
    })
}

/// All `b_fine.len()` fine cells of coarse cell `ic`, starting at fine
/// index `ic * ratio`. If any of them would be clipped at zero depth, all
/// of them copy the coarse state instead, so the block holds exactly the
/// coarse water volume.
pub fn interpolate_block(
    coarse: &Patch,
    ratio: usize,
    ic: i64,
    b_fine: &[f64],
    dry_tol: f64,
) -> Result<Vec<CellState>> {
    let i0 = ic * ratio as i64;
    let mut out = Vec::with_capacity(b_fine.len());
    for (k, &b) in b_fine.iter().enumerate() {
        match reconstruct(coarse, ratio, i0 + k as i64, b, dry_tol)? {
            Recon::Exact(q) => out.push(q),
            Recon::Clipped(_) | Recon::Copy(_) => {
                let j = coarse.slot(ic).expect("checked by reconstruct");
                return Ok(vec![coarse.cells[j]; b_fine.len()]);
            }
        }
    }
    Ok(out)
}

enum Recon {
    /// Volume-consistent reconstruction.
    Exact(CellState),
    /// Depth cut off at zero.
    Clipped(CellState),
    /// Coarse state copied unchanged (dry coarse cell).
    Copy(CellState),
}

fn reconstruct(coarse: &Patch, ratio: usize, i_fine: i64, b_fine: f64, dry_tol: f64) -> Result<Recon> {
    let ic = coarse_index(i_fine, ratio);
    let (jm, j0, jp) = match (coarse.slot(ic - 1), coarse.slot(ic), coarse.slot(ic + 1)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(Error::Nesting {
                level: coarse.level + 1,
                detail: format!(
                    "fine cell {i_fine} needs coarse cells {}..={} outside level-{} patch storage [{}, {})",
                    ic - 1,
                    ic + 1,
                    coarse.level,
                    coarse.i_lo - crate::grid::GHOST as i64,
                    coarse.i_hi() + crate::grid::GHOST as i64
                ),
            })
        }
    };
    let qc = coarse.cells[j0];
    if qc.is_dry(dry_tol) {
        return Ok(Recon::Copy(qc));
    }
    let (qm, qp) = (coarse.cells[jm], coarse.cells[jp]);
    let flat = qm.is_dry(dry_tol) || qp.is_dry(dry_tol);
    let off = fine_offset(i_fine, ratio);
    let eta = |j: usize| coarse.cells[j].h + coarse.bathy.b[j];
    let (s_eta, s_hu, s_psi) = if flat {
        (0.0, 0.0, 0.0)
    } else {
        let (em, e0, ep) = (eta(jm), eta(j0), eta(jp));
        (
            minmod(e0 - em, ep - e0),
            minmod(qc.hu - qm.hu, qp.hu - qc.hu),
            minmod(qc.psi - qm.psi, qp.psi - qc.psi),
        )
    };
    let h = qc.h + (s_eta * off + (coarse.bathy.b[j0] - b_fine));
    if !(h >= 0.0) {
        return Ok(Recon::Clipped(CellState::DRY));
    }
    Ok(Recon::Exact(
        CellState {
            h,
            hu: qc.hu + s_hu * off,
            psi: qc.psi + s_psi * off,
        }
        .sanitized(dry_tol),
    ))
}

/// Pick the coarse patch that can serve fine cell `i_fine`: the one whose
/// interior holds the containing coarse cell, else any whose storage does.
pub fn parent_for(coarse_level: &[Patch], ratio: usize, i_fine: i64) -> Option<&Patch> {
    let ic = coarse_index(i_fine, ratio);
    coarse_level
        .iter()
        .find(|p| p.contains_interior(ic))
        .or_else(|| {
            coarse_level
                .iter()
                .find(|p| p.slot(ic - 1).is_some() && p.slot(ic + 1).is_some())
        })
}

/// Spatial interpolation of the coarse level into the given storage slots
/// of `fine`, returning the values in slot order.
pub fn interpolate_to_fine(
    coarse_level: &[Patch],
    fine: &Patch,
    ratio: usize,
    slots: &[usize],
    dry_tol: f64,
) -> Result<Vec<CellState>> {
    slots
        .iter()
        .map(|&j| {
            let i = fine.global_index(j);
            let parent = parent_for(coarse_level, ratio, i).ok_or_else(|| Error::Nesting {
                level: fine.level,
                detail: format!(
                    "fine cell {i} (level {}) has no covering level-{} patch",
                    fine.level,
                    fine.level - 1
                ),
            })?;
            interpolate_cell(parent, ratio, i, fine.bathy.b[j], dry_tol)
        })
        .collect()
}

/// Replace (h, hu) of every coarse cell fully covered by the fine interior
/// with the mean of the covering fine cells. psi is left alone.
pub fn average_to_coarse(fine: &Patch, coarse: &mut Patch, ratio: usize, dry_tol: f64) -> Result<()> {
    if (fine.t - coarse.t).abs() > 1e-12 * fine.t.abs().max(1.0) {
        return Err(Error::Synchronization {
            fine_t: fine.t,
            coarse_t: coarse.t,
        });
    }
    let r = ratio as i64;
    let lo = fine.i_lo.div_euclid(r).max(coarse.i_lo);
    let hi = (fine.i_hi() - 1).div_euclid(r).min(coarse.i_hi() - 1);
    let mut hs = vec![0.0; ratio];
    let mut hus = vec![0.0; ratio];
    for ic in lo..=hi {
        if ic * r < fine.i_lo || (ic + 1) * r > fine.i_hi() {
            continue;
        }
        for k in 0..ratio {
            let jf = fine.slot(ic * r + k as i64).expect("covered fine cell");
            hs[k] = fine.cells[jf].h;
            hus[k] = fine.cells[jf].hu;
        }
        let jc = coarse.slot(ic).expect("coarse interior cell");
        let psi = coarse.cells[jc].psi;
        coarse.cells[jc] = CellState::new(mean(&hs), mean(&hus), psi).sanitized(dry_tol);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bathymetry::Bathymetry;
    use crate::grid::{Side, GHOST};
    use proptest::prelude::*;

    fn coarse_patch(values: &[CellState], b: &[f64]) -> Patch {
        let n = values.len() - 2 * GHOST;
        let mut p = Patch::new(1, 0, n, 1.0, 0.0, Side::Interior, Side::Interior);
        p.cells = values.to_vec();
        p.bathy = Bathymetry::from_elevation(b.to_vec());
        p
    }

    fn fine_patch(i_lo: i64, n: usize, ratio: usize, b: f64) -> Patch {
        let mut p = Patch::new(2, i_lo, n, 1.0 / ratio as f64, 0.0, Side::Interior, Side::Interior);
        p.bathy = Bathymetry::from_elevation(vec![b; p.total_len()]);
        p
    }

    #[test]
    fn constant_coarse_field_is_reproduced() {
        let c = CellState::new(3.0, -1.5, 0.25);
        let coarse = coarse_patch(&[c; 10], &[-10.0; 10]);
        for ratio in [1, 2, 3, 4] {
            let fine = fine_patch(3 * ratio as i64, 2 * ratio, ratio, -10.0);
            let slots: Vec<usize> = (0..fine.total_len()).collect();
            let v = interpolate_to_fine(std::slice::from_ref(&coarse), &fine, ratio, &slots, 1e-3).unwrap();
            assert!(v.iter().all(|q| *q == c), "ratio {ratio}: {v:?}");
        }
    }

    #[test]
    fn linear_coarse_field_is_reproduced_on_the_line() {
        // h = 5 + 0.5 x, hu = 1 - 0.25 x, psi = 0.1 x over flat B = 0.
        let xs: Vec<f64> = (0..12).map(|j| j as f64 - GHOST as f64 + 0.5).collect();
        let cells: Vec<CellState> = xs
            .iter()
            .map(|&x| CellState::new(5.0 + 0.5 * x, 1.0 - 0.25 * x, 0.1 * x))
            .collect();
        let coarse = coarse_patch(&cells, &[0.0; 12]);
        for ratio in [2, 3, 5] {
            let fine = fine_patch(3 * ratio as i64, 4 * ratio, ratio, 0.0);
            let slots: Vec<usize> = (0..fine.total_len()).collect();
            let v = interpolate_to_fine(std::slice::from_ref(&coarse), &fine, ratio, &slots, 1e-3).unwrap();
            for (k, &j) in slots.iter().enumerate() {
                let x = fine.x_center(j);
                assert!((v[k].h - (5.0 + 0.5 * x)).abs() < 1e-12);
                assert!((v[k].hu - (1.0 - 0.25 * x)).abs() < 1e-12);
                assert!((v[k].psi - 0.1 * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dry_neighbour_falls_back_to_piecewise_constant() {
        let mut cells = vec![CellState::new(0.1, 0.0, 0.0); 8];
        for c in cells.iter_mut().skip(4) {
            *c = CellState::DRY;
        }
        let coarse = coarse_patch(&cells, &[0.0; 8]);
        let fine = fine_patch(2, 4, 2, 0.0);
        // Fine cells 2..6 cover coarse cells 1 and 2 (wet 0.1 and dry 0).
        let slots: Vec<usize> = (0..fine.total_len()).collect();
        let v = interpolate_to_fine(std::slice::from_ref(&coarse), &fine, 2, &slots, 1e-3).unwrap();
        let hs: Vec<f64> = v.iter().map(|q| q.h).collect();
        assert_eq!(hs, vec![0.1, 0.1, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn surface_at_rest_stays_flat_over_bumpy_bathymetry() {
        let b: Vec<f64> = (0..10).map(|j| -4000.0 + 300.0 * (j as f64).sin()).collect();
        let cells: Vec<CellState> = b.iter().map(|&v| CellState::new(-v, 0.0, 0.0)).collect();
        let coarse = coarse_patch(&cells, &b);
        let mut fine = fine_patch(4, 8, 2, 0.0);
        let fb: Vec<f64> = (0..fine.total_len())
            .map(|j| -4000.0 + 300.0 * (fine.x_center(j) - 0.5 + GHOST as f64).sin() + 7.0)
            .collect();
        fine.bathy = Bathymetry::from_elevation(fb.clone());
        let slots: Vec<usize> = (0..fine.total_len()).collect();
        let v = interpolate_to_fine(std::slice::from_ref(&coarse), &fine, 2, &slots, 1e-3).unwrap();
        for (k, q) in v.iter().enumerate() {
            assert_eq!(q.h + fb[k], 0.0);
        }
    }

    #[test]
    fn uncovered_cell_is_a_nesting_error() {
        let coarse = coarse_patch(&[CellState::new(1.0, 0.0, 0.0); 6], &[0.0; 6]);
        let fine = fine_patch(8, 4, 2, 0.0);
        let slots: Vec<usize> = (0..fine.total_len()).collect();
        let err = interpolate_to_fine(std::slice::from_ref(&coarse), &fine, 2, &slots, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Nesting { .. }));
    }

    #[test]
    fn averaging_examples() {
        let mut coarse = coarse_patch(&[CellState::new(9.0, 9.0, 0.5); 6], &[0.0; 6]);
        let mut fine = fine_patch(2, 2, 2, 0.0);
        fine.cells[GHOST] = CellState::new(1.0, 0.0, 7.0);
        fine.cells[GHOST + 1] = CellState::new(3.0, 2.0, 7.0);
        average_to_coarse(&fine, &mut coarse, 2, 1e-3).unwrap();
        let q = coarse.cells[coarse.slot(1).unwrap()];
        assert_eq!((q.h, q.hu, q.psi), (2.0, 1.0, 0.5));
        assert_eq!(coarse.cells[coarse.slot(0).unwrap()].h, 9.0);

        let mut coarse = coarse_patch(&[CellState::new(9.0, 9.0, 0.0); 6], &[0.0; 6]);
        let mut fine = fine_patch(3, 3, 3, 0.0);
        for (k, hu) in [0.0, 1.5, 3.0].into_iter().enumerate() {
            fine.cells[GHOST + k] = CellState::new(1.0, hu, 0.0);
        }
        average_to_coarse(&fine, &mut coarse, 3, 1e-3).unwrap();
        assert_eq!(coarse.cells[coarse.slot(1).unwrap()].hu, 1.5);
    }

    #[test]
    fn block_fallback_is_all_or_nothing() {
        // The middle coarse cell is shallow and its right fine half sits on
        // a high spot, so one reconstruction would go negative.
        let cells = [
            CellState::new(1.0, 0.0, 0.0),
            CellState::new(1.0, 0.0, 0.0),
            CellState::new(1.0, 0.0, 0.0),
            CellState::new(0.5, 0.0, 0.0),
            CellState::new(1.0, 0.0, 0.0),
            CellState::new(1.0, 0.0, 0.0),
            CellState::new(1.0, 0.0, 0.0),
        ];
        let b = [-1.0, -1.0, -1.0, -0.5, -1.0, -1.0, -1.0];
        let coarse = coarse_patch(&cells, &b);
        let block = interpolate_block(&coarse, 2, 1, &[-1.2, 0.2], 1e-3).unwrap();
        assert_eq!(block, vec![CellState::new(0.5, 0.0, 0.0); 2]);
        let block = interpolate_block(&coarse, 2, 1, &[-0.6, -0.4], 1e-3).unwrap();
        assert!((block[0].h + block[1].h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn averaging_requires_matching_times() {
        let mut coarse = coarse_patch(&[CellState::new(1.0, 0.0, 0.0); 6], &[0.0; 6]);
        let mut fine = fine_patch(2, 2, 2, 0.0);
        fine.t = 0.5;
        assert!(matches!(
            average_to_coarse(&fine, &mut coarse, 2, 1e-3),
            Err(Error::Synchronization { .. })
        ));
    }

    proptest! {
        /// Interpolating linear data and averaging back is the identity, and
        /// the covered mass is unchanged.
        #[test]
        fn interpolate_then_average_is_identity_on_linear_data(
            a in 1.0f64..100.0, s in -0.5f64..0.5, ratio in 1usize..6,
        ) {
            let n = 12;
            let cells: Vec<CellState> = (0..n)
                .map(|j| CellState::new(a * (1.0 + s * j as f64 / n as f64), s * a - j as f64, 0.0))
                .collect();
            let mut coarse = coarse_patch(&cells, &vec![0.0; n]);
            let mut fine = fine_patch(3 * ratio as i64, 4 * ratio, ratio, 0.0);
            let slots: Vec<usize> = fine.interior().collect();
            let v = interpolate_to_fine(std::slice::from_ref(&coarse), &fine, ratio, &slots, 1e-3).unwrap();
            for (k, &j) in slots.iter().enumerate() {
                fine.cells[j] = v[k];
            }
            let before: Vec<CellState> = coarse.cells.clone();
            let fine_mass = fine.mass();
            average_to_coarse(&fine, &mut coarse, ratio, 1e-3).unwrap();
            let covered_mass: f64 = (3..7).map(|i| coarse.cells[coarse.slot(i).unwrap()].h).sum::<f64>();
            prop_assert!((covered_mass - fine_mass).abs() <= 1e-12 * fine_mass);
            for j in 0..n {
                prop_assert!((coarse.cells[j].h - before[j].h).abs() <= 1e-12 * a.max(1.0) * 10.0);
                prop_assert!((coarse.cells[j].hu - before[j].hu).abs() <= 1e-11 * a.max(1.0) * 10.0);
            }
        }
    }
}
