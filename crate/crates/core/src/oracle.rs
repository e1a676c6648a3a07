//! Independent reference solutions for verification.
//!
//! Nothing here shares stencils or linear algebra with the solver modules.

use crate::error::{Error, Result};

/// Exact solution of the flat-bottom dam break with initial states
/// (hL, 0) | (hR, 0), sampled at similarity coordinate `x/t`.
/// Returns (h, u).
pub fn exact_dambreak(h_left: f64, h_right: f64, g: f64, x_over_t: f64) -> (f64, f64) {
    assert!(h_left > h_right && h_right >= 0.0 && g > 0.0);
    let cl = (g * h_left).sqrt();
    if x_over_t <= -cl {
        return (h_left, 0.0);
    }
    if h_right == 0.0 {
        let front = 2.0 * cl;
        if x_over_t >= front {
            return (0.0, 0.0);
        }
        return rarefaction(cl, g, x_over_t);
    }
    let star = DamBreakStar::solve(h_left, h_right, g);
    let cm = (g * star.h).sqrt();
    if x_over_t < star.u - cm {
        rarefaction(cl, g, x_over_t)
    } else if x_over_t < star.shock_speed {
        (star.h, star.u)
    } else {
        (h_right, 0.0)
    }
}

fn rarefaction(cl: f64, g: f64, xi: f64) -> (f64, f64) {
    let c = (2.0 * cl - xi) / 3.0;
    (c * c / g, 2.0 * (xi + cl) / 3.0)
}

/// Middle state of a wet-bed dam break.
#[derive(Debug, Clone, Copy)]
pub struct DamBreakStar {
    pub h: f64,
    pub u: f64,
    pub shock_speed: f64,
}

impl DamBreakStar {
    /// Bisection on the mismatch between the rarefaction-side and
    /// shock-side velocities of the middle state.
    pub fn solve(h_left: f64, h_right: f64, g: f64) -> Self {
        let u_rare = |hm: f64| 2.0 * ((g * h_left).sqrt() - (g * hm).sqrt());
        let u_shock = |hm: f64| (hm - h_right) * (0.5 * g * (hm + h_right) / (hm * h_right)).sqrt();
        let f = |hm: f64| u_rare(hm) - u_shock(hm);
        let (mut lo, mut hi) = (h_right, h_left);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * h_left {
                break;
            }
        }
        let h = 0.5 * (lo + hi);
        let u = u_rare(h);
        DamBreakStar {
            h,
            u,
            shock_speed: h * u / (h - h_right),
        }
    }

    /// Momentum jump condition residual across the shock.
    pub fn momentum_residual(&self, h_right: f64, g: f64) -> f64 {
        let lhs = self.shock_speed * (self.h * self.u);
        let rhs = self.h * self.u * self.u + 0.5 * g * (self.h * self.h - h_right * h_right);
        lhs - rhs
    }
}

/// Phase speed of small-amplitude waves of wavenumber `k` in depth `h0`
/// for the linearized Madsen-Sorensen system over a flat bottom:
/// c^2 = g h0 (1 + B1 (k h0)^2) / (1 + (B1 + 1/3)(k h0)^2).
pub fn ms_dispersion(k: f64, h0: f64, g: f64, b1: f64) -> f64 {
    let kh2 = (k * h0) * (k * h0);
    (g * h0 * (1.0 + b1 * kh2) / (1.0 + (b1 + 1.0 / 3.0) * kh2)).sqrt()
}

/// Linear (Airy) water-wave phase speed, c^2 = (g/k) tanh(k h0).
pub fn airy_dispersion(k: f64, h0: f64, g: f64) -> f64 {
    if k == 0.0 {
        return (g * h0).sqrt();
    }
    (g / k * (k * h0).tanh()).sqrt()
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn dense_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return Err(Error::SingularSystem { index: col });
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

/// Fourth-order accurate second derivative by Richardson-extrapolated
/// central differences of a sampled function. Used to check difference
/// operators against something that is not a three-point stencil.
pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    let d = |s: f64| (f(x - s) - 2.0 * f(x) + f(x + s)) / (s * s);
    (4.0 * d(step / 2.0) - d(step)) / 3.0
}
