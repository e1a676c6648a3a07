//! Topography B(x) and the still-water depth derived from it.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Where cell bathymetry is sampled from.
#[derive(Clone)]
pub enum BathySource {
    Flat(f64),
    /// Analytic elevation profile.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Piecewise-linear profile through strictly increasing `x` nodes,
    /// held constant beyond the end nodes.
    Profile(Vec<(f64, f64)>),
}

impl fmt::Debug for BathySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BathySource::Flat(b) => write!(f, "Flat({b})"),
            BathySource::Function(_) => write!(f, "Function(..)"),
            BathySource::Profile(p) => write!(f, "Profile({} nodes)", p.len()),
        }
    }
}

impl BathySource {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BathySource::Function(Arc::new(f))
    }

    pub fn profile(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "empty bathymetry profile".into(),
            });
        }
        for (k, w) in nodes.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Parse {
                    line: k + 2,
                    message: format!("x must be strictly increasing ({} after {})", w[1].0, w[0].0),
                });
            }
        }
        Ok(BathySource::Profile(nodes))
    }

    /// Read a two-column "x B" text file. Blank lines and `#` comments are
    /// skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let mut next = |name: &str| -> Result<f64> {
                let tok = cols.next().ok_or_else(|| Error::Parse {
                    line: k + 1,
                    message: format!("missing column {name}"),
                })?;
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: k + 1,
                    message: format!("bad {name} `{tok}`: {e}"),
                })
            };
            let x = next("x")?;
            let b = next("B")?;
            if cols.next().is_some() {
                return Err(Error::Parse {
                    line: k + 1,
                    message: "expected exactly two columns".into(),
                });
            }
            nodes.push((x, b));
        }
        Self::profile(nodes)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BathySource::Flat(b) => *b,
            BathySource::Function(f) => f(x),
            BathySource::Profile(nodes) => {
                let first = nodes[0];
                let last = nodes[nodes.len() - 1];
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                // First node strictly to the right of x.
                let k = nodes.partition_point(|&(xn, _)| xn <= x);
                let (x0, b0) = nodes[k - 1];
                let (x1, b1) = nodes[k];
                b0 + (b1 - b0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// Still-water depth for an elevation.
#[inline]
pub fn still_depth(b: f64) -> f64 {
    if b < 0.0 {
        -b
    } else {
        0.0
    }
}

/// Cell-centered elevations of a patch (including ghosts) with the derived
/// still-water depth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bathymetry {
    pub b: Vec<f64>,
    pub h0: Vec<f64>,
}

impl Bathymetry {
    pub fn from_elevation(b: Vec<f64>) -> Self {
        let h0 = b.iter().map(|&v| still_depth(v)).collect();
        Bathymetry { b, h0 }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn set(&mut self, i: usize, b: f64) {
        self.b[i] = b;
        self.h0[i] = still_depth(b);
    }
}

/// Arithmetic mean with a fixed left-to-right summation order. Every
/// fine-to-coarse average in the crate goes through this function so that
/// averages of identical inputs are bit-identical.
#[inline]
pub fn mean(values: &[f64]) -> f64 {
    let mut s = 0.0;
    for &v in values {
        s += v;
    }
    s / values.len() as f64
}

/// Shift fine-cell samples so their `mean` reproduces the coarse value.
/// The uniform shift does the bulk of the work; the last sample absorbs
/// the remaining rounding. The match is exact whenever the target is a
/// reachable value of `mean`, and otherwise within one rounding step.
pub fn conform_to_coarse(fine: &mut [f64], coarse: f64) {
    let r = fine.len();
    if r == 1 {
        fine[0] = coarse;
        return;
    }
    let shift = coarse - mean(fine);
    for v in fine.iter_mut() {
        *v += shift;
    }
    let last = r - 1;
    for _ in 0..4 {
        let m = mean(fine);
        if m == coarse {
            return;
        }
        fine[last] += (coarse - m) * r as f64;
    }
    // Walk the last sample one ulp at a time, keeping the closest result.
    let mut best = (fine[last], (mean(fine) - coarse).abs());
    let up = mean(fine) < coarse;
    for _ in 0..512 {
        fine[last] = if up { next_up(fine[last]) } else { next_down(fine[last]) };
        let m = mean(fine);
        let err = (m - coarse).abs();
        if err < best.1 {
            best = (fine[last], err);
        }
        if m == coarse || (m > coarse) == up {
            break;
        }
    }
    fine[last] = best.0;
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn still_depth_is_zero_on_land() {
        let bathy = Bathymetry::from_elevation(vec![-4000.0, -5.0, 0.0, 12.0]);
        assert_eq!(bathy.h0, vec![4000.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn profile_interpolates_linearly_and_clamps() {
        let src = BathySource::parse("# x B\n0 -100\n10 -50\n\n20 10  # shore\n").unwrap();
        assert_eq!(src.eval(-5.0), -100.0);
        assert_eq!(src.eval(5.0), -75.0);
        assert_eq!(src.eval(10.0), -50.0);
        assert_eq!(src.eval(15.0), -20.0);
        assert_eq!(src.eval(50.0), 10.0);
    }

    #[test]
    fn profile_rejects_non_increasing_x() {
        assert!(BathySource::parse("0 1\n0 2\n").is_err());
        assert!(BathySource::parse("0 1\n1\n").is_err());
        assert!(BathySource::parse("0 1 2\n").is_err());
        assert!(BathySource::parse("").is_err());
    }

    #[test]
    fn conform_is_exact_for_power_of_two_ratios() {
        for coarse in [-4000.0, -3917.25, -12.5, 3.75] {
            for r in [2usize, 4, 8] {
                let mut fine: Vec<f64> = (0..r).map(|k| coarse + k as f64 * 0.37 - 1.1).collect();
                conform_to_coarse(&mut fine, coarse);
                assert_eq!(mean(&fine), coarse);
            }
        }
    }

    proptest! {
        #[test]
        fn conform_reproduces_coarse_exactly(
            coarse in -5000.0f64..100.0,
            noise in proptest::collection::vec(-50.0f64..50.0, 1..7),
        ) {
            let mut fine: Vec<f64> = noise.iter().map(|d| coarse + d).collect();
            conform_to_coarse(&mut fine, coarse);
            let err = (mean(&fine) - coarse).abs();
            prop_assert!(err <= 4.0 * f64::EPSILON * coarse.abs().max(1.0), "{}", err);
        }
    }
}
