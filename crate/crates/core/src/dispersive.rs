//! Boussinesq correction: the D11 operator, assembly of the elliptic
//! system [I - D11] psi = -D11[(hu^2)_x + g h eta_x] + g h0^2 B1 (h0 eta_x)_xx,
//! and its direct solution.

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Patch, Side, GHOST};
use crate::params::SolverParams;

/// Tridiagonal system, optionally with periodic corner couplings: row 0's
/// `sub` multiplies unknown n-1 and row n-1's `sup` multiplies unknown 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
    pub periodic: bool,
}

impl TridiagonalSystem {
    pub fn identity(n: usize) -> Self {
        TridiagonalSystem {
            sub: vec![0.0; n],
            diag: vec![1.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
            periodic: false,
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// A x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i] * x[i - 1];
                } else if self.periodic {
                    v += self.sub[0] * x[n - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                } else if self.periodic {
                    v += self.sup[n - 1] * x[0];
                }
                v
            })
            .collect()
    }

    /// max |A x - rhs|.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Dense copy, for checking against other solvers.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] += self.diag[i];
            if i > 0 {
                a[i][i - 1] += self.sub[i];
            } else if self.periodic {
                a[0][n - 1] += self.sub[0];
            }
            if i + 1 < n {
                a[i][i + 1] += self.sup[i];
            } else if self.periodic {
                a[n - 1][0] += self.sup[n - 1];
            }
        }
        a
    }
}

/// D11(w) = (B1 + 1/2) h0^2 w_xx - (1/6) h0^3 (w/h0)_xx with three-point
/// second differences. `w` and `h0` carry one ghost value at each end;
/// the result has the interior length. Cells where h0 vanishes anywhere on
/// the stencil get 0.
pub fn apply_d11(w: &[f64], h0: &[f64], dx: f64, b1: f64) -> Vec<f64> {
    assert_eq!(w.len(), h0.len());
    let n = w.len().saturating_sub(2);
    let dx2 = dx * dx;
    (1..=n)
        .map(|i| {
            let (hm, h, hp) = (h0[i - 1], h0[i], h0[i + 1]);
            if hm <= 0.0 || h <= 0.0 || hp <= 0.0 {
                return 0.0;
            }
            let wxx = (w[i - 1] - 2.0 * w[i] + w[i + 1]) / dx2;
            let vxx = (w[i - 1] / hm - 2.0 * w[i] / h + w[i + 1] / hp) / dx2;
            (b1 + 0.5) * h * h * wxx - h * h * h * vxx / 6.0
        })
        .collect()
}

/// Cells where the Boussinesq terms are kept: still-water depth above
/// `switch_depth` and no dry (h0 = 0) neighbour. Ends of the array have
/// only one neighbour to check.
pub fn boussinesq_mask(h0: &[f64], switch_depth: f64) -> Vec<bool> {
    let n = h0.len();
    (0..n)
        .map(|i| {
            let left_wet = i == 0 || h0[i - 1] > 0.0;
            let right_wet = i + 1 == n || h0[i + 1] > 0.0;
            h0[i] > switch_depth && left_wet && right_wet
        })
        .collect()
}

/// Closure of the elliptic system at one patch end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndCondition {
    /// Known psi in the first ghost cell.
    Dirichlet(f64),
    /// psi odd about the patch edge, as momentum is at a wall.
    Reflecting,
}

/// Closure of the elliptic system at the two patch ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipticBoundary {
    Ends(EndCondition, EndCondition),
    Periodic,
}

impl EllipticBoundary {
    pub fn dirichlet(left: f64, right: f64) -> Self {
        EllipticBoundary::Ends(EndCondition::Dirichlet(left), EndCondition::Dirichlet(right))
    }
}

/// Field data for one elliptic assembly. Every array carries `GHOST`
/// ghost values at each end; `active` covers the interior only.
#[derive(Debug, Clone, Copy)]
pub struct EllipticInputs<'a> {
    pub h: &'a [f64],
    pub hu: &'a [f64],
    pub eta: &'a [f64],
    pub h0: &'a [f64],
    pub active: &'a [bool],
    pub dx: f64,
    pub g: f64,
    pub b1: f64,
    pub dry_tol: f64,
    pub boundary: EllipticBoundary,
}

/// Derivative of `f` at `j` by central differences, falling back to a
/// one-sided difference toward the wet side when a neighbour is dry.
#[inline]
fn wet_derivative(f: &[f64], wet: &[bool], j: usize, dx: f64) -> f64 {
    let lo = j > 0 && wet[j - 1];
    let hi = j + 1 < f.len() && wet[j + 1];
    match (lo, hi) {
        (true, true) => (f[j + 1] - f[j - 1]) / (2.0 * dx),
        (true, false) => (f[j] - f[j - 1]) / dx,
        (false, true) => (f[j + 1] - f[j]) / dx,
        (false, false) => 0.0,
    }
}

pub fn assemble_elliptic(inp: &EllipticInputs<'_>) -> TridiagonalSystem {
    let total = inp.h.len();
    let n = total - 2 * GHOST;
    assert_eq!(inp.active.len(), n);
    let dx = inp.dx;
    let dx2 = dx * dx;
    let wet: Vec<bool> = inp.h.iter().map(|&h| h > inp.dry_tol).collect();

    // Nonlinear flux gradient (hu^2)_x + g h eta_x and h0 eta_x, where
    // computable (every slot but the outermost ghosts).
    let momentum_flux: Vec<f64> = (0..total)
        .map(|j| {
            if wet[j] {
                inp.hu[j] * inp.hu[j] / inp.h[j]
            } else {
                0.0
            }
        })
        .collect();
    let mut forcing = vec![0.0; total];
    let mut h0_eta_x = vec![0.0; total];
    for j in 1..total - 1 {
        if !wet[j] {
            continue;
        }
        let eta_x = wet_derivative(inp.eta, &wet, j, dx);
        forcing[j] = wet_derivative(&momentum_flux, &wet, j, dx) + inp.g * inp.h[j] * eta_x;
        h0_eta_x[j] = inp.h0[j] * eta_x;
    }

    let mut sys = TridiagonalSystem::identity(n);
    sys.periodic = matches!(inp.boundary, EllipticBoundary::Periodic);
    for i in 0..n {
        let j = i + GHOST;
        let stencil_wet = wet[j - 1] && wet[j] && wet[j + 1];
        let (hm, h, hp) = (inp.h0[j - 1], inp.h0[j], inp.h0[j + 1]);
        if !inp.active[i] || !stencil_wet || hm <= 0.0 || h <= 0.0 || hp <= 0.0 {
            continue;
        }
        let c1 = (inp.b1 + 0.5) * h * h / dx2;
        let c2 = h * h * h / (6.0 * dx2);
        let lower = c1 - c2 / hm;
        let centre = -2.0 * c1 + 2.0 * c2 / h;
        let upper = c1 - c2 / hp;
        sys.sub[i] = -lower;
        sys.diag[i] = 1.0 - centre;
        sys.sup[i] = -upper;
        let d11_forcing = lower * forcing[j - 1] + centre * forcing[j] + upper * forcing[j + 1];
        let e_xx = (h0_eta_x[j - 1] - 2.0 * h0_eta_x[j] + h0_eta_x[j + 1]) / dx2;
        sys.rhs[i] = -d11_forcing + inp.g * h * h * inp.b1 * e_xx;
    }
    if let EllipticBoundary::Ends(left, right) = inp.boundary {
        if n > 0 {
            match left {
                EndCondition::Dirichlet(v) => sys.rhs[0] -= sys.sub[0] * v,
                EndCondition::Reflecting => sys.diag[0] -= sys.sub[0],
            }
            sys.sub[0] = 0.0;
            match right {
                EndCondition::Dirichlet(v) => sys.rhs[n - 1] -= sys.sup[n - 1] * v,
                EndCondition::Reflecting => sys.diag[n - 1] -= sys.sup[n - 1],
            }
            sys.sup[n - 1] = 0.0;
        }
    }
    sys
}

/// Direct solve. Thomas elimination is tried first; a vanishing pivot
/// triggers Gaussian elimination with partial pivoting on the band.
/// Periodic systems go through the Sherman-Morrison correction.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !sys.periodic {
        return solve_open(&sys.sub, &sys.diag, &sys.sup, &sys.rhs);
    }
    if n < 3 {
        // Corner couplings land on the ordinary off-diagonals.
        let mut sub = sys.sub.clone();
        let mut diag = sys.diag.clone();
        let mut sup = sys.sup.clone();
        if n == 1 {
            diag[0] += sub[0] + sup[0];
        } else {
            sup[0] += sub[0];
            sub[1] += sup[1];
        }
        sub[0] = 0.0;
        sup[n - 1] = 0.0;
        return solve_open(&sub, &diag, &sup, &sys.rhs);
    }
    let alpha = sys.sup[n - 1];
    let beta = sys.sub[0];
    let gamma = -sys.diag[0];
    let mut diag = sys.diag.clone();
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    let mut sub = sys.sub.clone();
    let mut sup = sys.sup.clone();
    sub[0] = 0.0;
    sup[n - 1] = 0.0;
    let x = solve_open(&sub, &diag, &sup, &sys.rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_open(&sub, &diag, &sup, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

fn solve_open(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    thomas(sub, diag, sup, rhs).or_else(|_| pivoting_band_solve(sub, diag, sup, rhs))
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..n {
        let a = if i > 0 { sub[i] } else { 0.0 };
        let denom = diag[i] - a * prev_c;
        if denom == 0.0 || !denom.is_finite() || denom.abs() < 1e-14 * diag[i].abs() {
            return Err(Error::SingularSystem { index: i });
        }
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - a * prev_d) / denom;
        prev_c = c[i];
        prev_d = d[i];
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Row-interchanging elimination on a tridiagonal band (fill-in confined
/// to a second superdiagonal).
fn pivoting_band_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut dl: Vec<f64> = (0..n).map(|i| if i + 1 < n { sub[i + 1] } else { 0.0 }).collect();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    let mut du2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if dl[i].abs() > d[i].abs() {
            // Swap rows i and i+1.
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            du2[i] = if i + 2 < n { du[i + 1] } else { 0.0 };
            if i + 2 < n {
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
            dl[i] = fact;
        } else {
            if d[i] == 0.0 {
                return Err(Error::SingularSystem { index: i });
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            du2[i] = 0.0;
            dl[i] = fact;
        }
    }
    if d[n - 1] == 0.0 {
        return Err(Error::SingularSystem { index: n - 1 });
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        if i + 1 < n {
            v -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= du2[i] * x[i + 2];
        }
        x[i] = v / d[i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularSystem { index: n - 1 })
    }
}

/// Solve for psi on a patch whose ghost cells are filled, writing the
/// interior psi. The ghost psi values act as Dirichlet data unless the
/// patch spans a periodic domain. Returns false when dispersion is off
/// (psi is then set to zero and nothing is solved).
pub fn solve_patch_psi(patch: &mut Patch, params: &SolverParams) -> Result<bool> {
    let n = patch.n;
    if !params.dispersion {
        for j in patch.interior() {
            patch.cells[j].psi = 0.0;
        }
        return Ok(false);
    }
    let h: Vec<f64> = patch.cells.iter().map(|c| c.h).collect();
    let hu: Vec<f64> = patch.cells.iter().map(|c| c.hu).collect();
    let eta: Vec<f64> = (0..patch.total_len()).map(|j| patch.eta(j)).collect();
    let h0 = &patch.bathy.h0;
    let mask_full = boussinesq_mask(h0, params.switch_depth);
    let active: Vec<bool> = (GHOST..GHOST + n)
        .map(|j| mask_full[j] && h[j - 1..=j + 1].iter().all(|&d| d > params.switch_depth))
        .collect();
    let periodic = matches!(
        (patch.left, patch.right),
        (Side::Physical(BoundaryKind::Periodic), Side::Physical(BoundaryKind::Periodic))
    );
    let boundary = if periodic {
        EllipticBoundary::Periodic
    } else {
        let end = |side: Side, ghost: usize| match side {
            Side::Physical(BoundaryKind::Wall) => EndCondition::Reflecting,
            _ => EndCondition::Dirichlet(patch.cells[ghost].psi),
        };
        EllipticBoundary::Ends(end(patch.left, GHOST - 1), end(patch.right, GHOST + n))
    };
    let sys = assemble_elliptic(&EllipticInputs {
        h: &h,
        hu: &hu,
        eta: &eta,
        h0,
        active: &active,
        dx: patch.dx,
        g: params.g,
        b1: params.b1,
        dry_tol: params.dry_tolerance,
        boundary,
    });
    let psi = solve_tridiagonal(&sys)?;
    for (k, v) in psi.into_iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "elliptic solve",
                level: patch.level,
            });
        }
        patch.cells[GHOST + k].psi = v;
    }
    Ok(true)
}

/// Max-norm error of the discrete elliptic solve for the manufactured
/// solution psi(x) = sin(a x) over h0(x) = H (1 + eps cos(b x)) on `n`
/// cells of a length-10 interval, with the exact right-hand side and
/// Dirichlet data.
pub fn manufactured_error(n: usize, eps: f64, b1: f64) -> Result<f64> {
    let length = 10.0;
    let dx = length / n as f64;
    let (a, bw, depth) = (0.9, 0.6, 1.5);
    let psi = |x: f64| (a * x).sin();
    let psi2 = |x: f64| -a * a * (a * x).sin();
    let h0 = |x: f64| depth * (1.0 + eps * (bw * x).cos());
    let h0_1 = |x: f64| -depth * eps * bw * (bw * x).sin();
    let h0_2 = |x: f64| -depth * eps * bw * bw * (bw * x).cos();
    let psi1 = |x: f64| a * (a * x).cos();
    // (psi/h0)'' by the quotient rule.
    let ratio2 = |x: f64| {
        let (p, p1, p2) = (psi(x), psi1(x), psi2(x));
        let (q, q1, q2) = (h0(x), h0_1(x), h0_2(x));
        p2 / q - 2.0 * p1 * q1 / (q * q) - p * q2 / (q * q) + 2.0 * p * q1 * q1 / (q * q * q)
    };
    let exact_rhs = |x: f64| {
        let h = h0(x);
        psi(x) - ((b1 + 0.5) * h * h * psi2(x) - h * h * h * ratio2(x) / 6.0)
    };
    let total = n + 2 * GHOST;
    let xs: Vec<f64> = (0..total).map(|j| (j as f64 - GHOST as f64 + 0.5) * dx).collect();
    let h0v: Vec<f64> = xs.iter().map(|&x| h0(x)).collect();
    let zeros = vec![0.0; total];
    let active = vec![true; n];
    let mut sys = assemble_elliptic(&EllipticInputs {
        h: &h0v,
        hu: &zeros,
        eta: &zeros,
        h0: &h0v,
        active: &active,
        dx,
        g: 9.81,
        b1,
        dry_tol: 1e-3,
        boundary: EllipticBoundary::dirichlet(0.0, 0.0),
    });
    let left = psi(xs[GHOST - 1]);
    let right = psi(xs[GHOST + n]);
    // Re-apply the Dirichlet closure with the manufactured ghost values.
    let lower0 = {
        let h = h0v[GHOST];
        let c1 = (b1 + 0.5) * h * h / (dx * dx);
        let c2 = h * h * h / (6.0 * dx * dx);
        c1 - c2 / h0v[GHOST - 1]
    };
    let upper_n = {
        let h = h0v[GHOST + n - 1];
        let c1 = (b1 + 0.5) * h * h / (dx * dx);
        let c2 = h * h * h / (6.0 * dx * dx);
        c1 - c2 / h0v[GHOST + n]
    };
    for i in 0..n {
        sys.rhs[i] = exact_rhs(xs[GHOST + i]);
    }
    sys.rhs[0] += lower0 * left;
    sys.rhs[n - 1] += upper_n * right;
    let x = solve_tridiagonal(&sys)?;
    Ok((0..n).map(|i| (x[i] - psi(xs[GHOST + i])).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};

    const B1: f64 = 1.0 / 15.0;

    #[test]
    fn d11_of_constant_is_zero() {
        let w = vec![3.5; 10];
        let h0 = vec![40.0; 10];
        assert!(apply_d11(&w, &h0, 0.3, B1).iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn d11_of_quadratic_on_unit_depth() {
        let dx = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| (i as f64 - 0.5) * dx).collect();
        let w: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let d = apply_d11(&w, &[1.0; 12], dx, B1);
        for v in d {
            assert!((v - 0.8).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn d11_with_b1_minus_half_matches_finite_difference_oracle() {
        let dx = 0.05;
        let h0c = 2.5;
        let f = |x: f64| (1.3 * x).sin() + 0.2 * x * x * x;
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 - 0.5) * dx).collect();
        let w: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let d = apply_d11(&w, &vec![h0c; 40], dx, -0.5);
        for (i, v) in d.iter().enumerate() {
            let x = xs[i + 1];
            let expect = -h0c * h0c * oracle::second_derivative(f, x, dx) / 6.0;
            assert!((v - expect).abs() < 2e-3, "{v} vs {expect}");
        }
    }

    #[test]
    fn mask_examples() {
        let m = boussinesq_mask(&[4000.0, 4000.0, 5.0, 0.0], 10.0);
        assert_eq!(m, vec![true, true, false, false]);
        assert!(boussinesq_mask(&[4000.0; 5], f64::INFINITY).iter().all(|a| !a));
        let m = boussinesq_mask(&[5.0, 3.0, 0.0, 2.0, 4.0], 0.0);
        assert_eq!(m, vec![true, false, false, false, true]);
    }

    fn still_inputs(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let total = n + 2 * GHOST;
        let b: Vec<f64> = (0..total).map(|j| -3000.0 - 800.0 * (j as f64 * 0.3).sin()).collect();
        let h: Vec<f64> = b.iter().map(|v| -v).collect();
        let eta: Vec<f64> = h.iter().zip(&b).map(|(h, b)| h + b).collect();
        (h.clone(), vec![0.0; total], eta, h)
    }

    #[test]
    fn still_water_gives_zero_rhs_and_psi() {
        let n = 30;
        let (h, hu, eta, h0) = still_inputs(n);
        let active = vec![true; n];
        let sys = assemble_elliptic(&EllipticInputs {
            h: &h,
            hu: &hu,
            eta: &eta,
            h0: &h0,
            active: &active,
            dx: 500.0,
            g: 9.81,
            b1: B1,
            dry_tol: 1e-3,
            boundary: EllipticBoundary::dirichlet(0.0, 0.0),
        });
        assert!(sys.rhs.iter().all(|&r| r == 0.0));
        assert!(solve_tridiagonal(&sys).unwrap().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn inactive_mask_gives_identity() {
        let n = 12;
        let (h, mut hu, eta, h0) = still_inputs(n);
        hu.iter_mut().enumerate().for_each(|(j, v)| *v = j as f64);
        let active = vec![false; n];
        let sys = assemble_elliptic(&EllipticInputs {
            h: &h,
            hu: &hu,
            eta: &eta,
            h0: &h0,
            active: &active,
            dx: 500.0,
            g: 9.81,
            b1: B1,
            dry_tol: 1e-3,
            boundary: EllipticBoundary::dirichlet(0.0, 0.0),
        });
        assert_eq!(sys, TridiagonalSystem::identity(n));
        assert!(solve_tridiagonal(&sys).unwrap().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn identity_and_zero_rhs_solves() {
        let mut sys = TridiagonalSystem::identity(5);
        sys.rhs = vec![1.0, -2.0, 3.0, 0.5, 9.0];
        assert_eq!(solve_tridiagonal(&sys).unwrap(), sys.rhs);
        let mut sys = TridiagonalSystem::identity(5);
        sys.sub = vec![0.0, 0.3, 0.3, 0.3, 0.3];
        sys.sup = vec![0.2, 0.2, 0.2, 0.2, 0.0];
        assert_eq!(solve_tridiagonal(&sys).unwrap(), vec![0.0; 5]);
    }

    fn random_system(rng: &mut impl Rng, n: usize, periodic: bool) -> TridiagonalSystem {
        let sub: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| (sub[i].abs() + sup[i].abs() + rng.gen_range(0.1..2.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let rhs = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut s = TridiagonalSystem {
            sub,
            diag,
            sup,
            rhs,
            periodic,
        };
        if !periodic {
            s.sub[0] = 0.0;
            s.sup[n - 1] = 0.0;
        }
        s
    }

    #[test]
    fn random_systems_match_dense_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = if trial == 0 { 8 } else { rng.gen_range(1..40) };
            let periodic = trial % 2 == 1;
            let sys = random_system(&mut rng, n, periodic);
            let x = solve_tridiagonal(&sys).unwrap();
            let reference = oracle::dense_solve(&sys.to_dense(), &sys.rhs).unwrap();
            for (a, b) in x.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12, "trial {trial} n {n}: {a} vs {b}; residuals {} {}", sys.residual_inf(&x), sys.residual_inf(&reference));
            }
            let rhs_norm = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sys.residual_inf(&x) <= 1e-12 * rhs_norm + 1e-14);
        }
    }

    #[test]
    fn zero_pivot_falls_back_to_pivoting() {
        // Thomas hits a zero pivot in row 0; the system itself is regular.
        let sys = TridiagonalSystem {
            sub: vec![0.0, 1.0, 1.0],
            diag: vec![0.0, 1.0, 3.0],
            sup: vec![2.0, 1.0, 0.0],
            rhs: vec![2.0, 3.0, 4.0],
            periodic: false,
        };
        let x = solve_tridiagonal(&sys).unwrap();
        let reference = oracle::dense_solve(&sys.to_dense(), &sys.rhs).unwrap();
        for (a, b) in x.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_system_names_the_row() {
        let sys = TridiagonalSystem {
            sub: vec![0.0, 1.0, 0.0],
            diag: vec![1.0, 1.0, 0.0],
            sup: vec![1.0, 1.0, 0.0],
            rhs: vec![1.0, 1.0, 1.0],
            periodic: false,
        };
        match solve_tridiagonal(&sys) {
            Err(Error::SingularSystem { index }) => assert!(index < 3),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        for eps in [0.0, 0.3] {
            let e: Vec<f64> = [40, 80, 160].iter().map(|&n| manufactured_error(n, eps, B1).unwrap()).collect();
            for w in e.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((order - 2.0).abs() < 0.2, "eps {eps}: errors {e:?}");
            }
        }
    }
}
