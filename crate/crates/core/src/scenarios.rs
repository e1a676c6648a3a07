//! Initial conditions and bathymetry for the built-in scenarios.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amr::StaticRegion;
use crate::bathymetry::{still_depth, BathySource};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Domain};
use crate::oracle;
use crate::state::CellState;

pub const NAMES: [&str; 4] = [
    "lake_at_rest_bumpy",
    "dam_break",
    "periodic_linear_wave",
    "sloping_beach_crater",
];

/// How the crater's initial momentum is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityInit {
    /// Simple-wave Riemann invariant, u = 2(sqrt(g(h0 + eta)) - sqrt(g h0)).
    Nonlinear,
    /// u = eta sqrt(g / h0).
    Linear,
    /// Water initially at rest.
    None,
}

impl VelocityInit {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nonlinear" => Some(VelocityInit::Nonlinear),
            "linear" => Some(VelocityInit::Linear),
            "none" | "rest" => Some(VelocityInit::None),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VelocityInit::Nonlinear => "nonlinear",
            VelocityInit::Linear => "linear",
            VelocityInit::None => "none",
        }
    }
}

/// Crater surface displacement at `x`: a paraboloid bowl reaching -D at
/// the centre and 0 at the rim r = W/2, surrounded out to r = W by a
/// half-sine lip sized so that the profile has zero net volume.
pub fn crater_initial(x: f64, center: f64, depth: f64, diameter: f64) -> f64 {
    let radius = 0.5 * diameter;
    let r = (x - center).abs();
    if r <= radius {
        depth * (r * r / (radius * radius) - 1.0)
    } else if r <= 2.0 * radius {
        let lip = PI * depth / 3.0;
        lip * (PI * (r - radius) / radius).sin()
    } else {
        0.0
    }
}

/// Velocity of a wave travelling away from the disturbance; `outward` is
/// +1 to the right of the centre and -1 to the left.
pub fn outgoing_velocity(eta: f64, h0: f64, g: f64, outward: f64, mode: VelocityInit) -> f64 {
    if h0 <= 0.0 || eta == 0.0 {
        return 0.0;
    }
    let speed = match mode {
        VelocityInit::Nonlinear => {
            assert!(h0 + eta > 0.0, "disturbance deeper than the water column");
            2.0 * ((g * (h0 + eta)).sqrt() - (g * h0).sqrt())
        }
        VelocityInit::Linear => eta * (g / h0).sqrt(),
        VelocityInit::None => 0.0,
    };
    outward * speed
}

/// Momentum hu = (h0 + eta) u for a purely outgoing disturbance centred at
/// `center`, evaluated at positions `x`.
pub fn outgoing_velocity_init(
    x: &[f64],
    eta: &[f64],
    h0: &[f64],
    g: f64,
    center: f64,
    mode: VelocityInit,
) -> Vec<f64> {
    x.iter()
        .zip(eta.iter().zip(h0))
        .map(|(&xi, (&e, &d))| {
            let outward = if xi >= center { 1.0 } else { -1.0 };
            (d + e).max(0.0) * outgoing_velocity(e, d, g, outward, mode)
        })
        .collect()
}

/// Scenario-specific defaults applied on top of the generic ones.
pub fn apply_defaults(cfg: &mut RunConfig) -> Result<()> {
    match cfg.scenario.as_str() {
        "lake_at_rest_bumpy" => {
            cfg.x_lo = 0.0;
            cfg.x_hi = 100_000.0;
            cfg.base_cells = 100;
            cfg.t_final = 1000.0;
            cfg.amr.static_regions = vec![StaticRegion {
                x_lo: 30_000.0,
                x_hi: 70_000.0,
                min_level: 10,
                max_level: 10,
            }];
        }
        "dam_break" => {
            cfg.x_lo = 0.0;
            cfg.x_hi = 1.0;
            cfg.base_cells = 1000;
            cfg.t_final = 0.25;
            cfg.solver.g = 1.0;
            cfg.amr.amplitude_tol = f64::INFINITY;
            cfg.amr.gradient_tol = 0.01;
        }
        "periodic_linear_wave" => {
            cfg.boundary_left = BoundaryKind::Periodic;
            cfg.boundary_right = BoundaryKind::Periodic;
            derive(cfg, &HashSet::new());
        }
        "sloping_beach_crater" => {
            cfg.x_lo = 0.0;
            cfg.x_hi = 250_000.0;
            cfg.base_cells = 500;
            cfg.t_final = 600.0;
            cfg.gauges = vec![100_000.0, 231_000.0];
            cfg.max_levels = 3;
            cfg.amr.ratios = vec![2, 2];
            cfg.amr.amplitude_tol = 1.0;
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    }
    Ok(())
}

/// Recompute quantities that follow from the scenario shape unless the
/// config set them explicitly.
pub fn derive(cfg: &mut RunConfig, given: &HashSet<String>) {
    if cfg.scenario == "periodic_linear_wave" {
        let p = &cfg.shape;
        let k = p.wave_kh0 / p.wave_depth;
        let length = p.wavelengths as f64 * 2.0 * PI / k;
        if !given.contains("x_lo") {
            cfg.x_lo = 0.0;
        }
        if !given.contains("x_hi") {
            cfg.x_hi = cfg.x_lo + length;
        }
        if !given.contains("base_cells") {
            cfg.base_cells = 64 * p.wavelengths.max(1);
        }
        if !given.contains("t_final") {
            cfg.t_final = 2.0 * PI / k / wave_speed(cfg);
        }
    }
}

/// Linear phase speed of the periodic wave under the configured model.
pub fn wave_speed(cfg: &RunConfig) -> f64 {
    let p = &cfg.shape;
    let k = p.wave_kh0 / p.wave_depth;
    let s = &cfg.solver;
    if s.dispersion && p.wave_depth > s.switch_depth {
        oracle::ms_dispersion(k, p.wave_depth, s.g, s.b1)
    } else {
        (s.g * p.wave_depth).sqrt()
    }
}

pub fn validate_shape(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.shape;
    match cfg.scenario.as_str() {
        "dam_break" => {
            if !(p.dam_left_depth > p.dam_right_depth && p.dam_right_depth >= 0.0) {
                return Err(Error::config("dam_left_depth", "need dam_left_depth > dam_right_depth >= 0"));
            }
        }
        "periodic_linear_wave" => {
            if !(p.wave_kh0 > 0.0 && p.wave_depth > 0.0) {
                return Err(Error::config("wave_kh0", "wave_kh0 and wave_depth must be positive"));
            }
            if p.wavelengths == 0 {
                return Err(Error::config("wavelengths", "must be at least 1"));
            }
            if !(p.wave_amplitude.abs() < 1.0) {
                return Err(Error::config("wave_amplitude", "must be below 1 (fraction of depth)"));
            }
        }
        "sloping_beach_crater" => {
            if !(p.crater_depth > 0.0 && p.crater_depth < p.ocean_depth) {
                return Err(Error::config("crater_depth", "need 0 < crater_depth < ocean_depth"));
            }
            if !(p.crater_diameter > 0.0) {
                return Err(Error::config("crater_diameter", "must be positive"));
            }
        }
        "lake_at_rest_bumpy" => {
            if !(p.bump_width > 0.0) {
                return Err(Error::config("bump_width", "must be positive"));
            }
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    }
    Ok(())
}

/// Bed elevation source for the configured scenario, or the file given by
/// `bathymetry_file`.
pub fn bathymetry(cfg: &RunConfig) -> Result<BathySource> {
    if let Some(path) = &cfg.bathymetry_file {
        return BathySource::from_file(path);
    }
    let p = cfg.shape.clone();
    Ok(match cfg.scenario.as_str() {
        "lake_at_rest_bumpy" => BathySource::function(move |x| {
            let s = (x - p.bump_center) / p.bump_width;
            -p.ocean_depth + p.bump_height * (-s * s).exp()
        }),
        "dam_break" => BathySource::Flat(0.0),
        "periodic_linear_wave" => BathySource::Flat(-p.wave_depth),
        "sloping_beach_crater" => BathySource::profile(vec![
            (0.0, -p.ocean_depth),
            (150_000.0, -p.ocean_depth),
            (170_000.0, -100.0),
            (230_000.0, 0.0),
            (240_000.0, 10.0),
            (250_000.0, 10.0),
        ])?,
        other => return Err(Error::UnknownScenario(other.to_string())),
    })
}

/// Cell initialiser taking (cell centre, bed elevation).
pub type Initializer = Arc<dyn Fn(f64, f64) -> CellState + Send + Sync>;

pub fn initial_state(cfg: &RunConfig) -> Result<Initializer> {
    let p = cfg.shape.clone();
    let g = cfg.solver.g;
    Ok(match cfg.scenario.as_str() {
        "lake_at_rest_bumpy" => Arc::new(|_x, b| CellState::new(still_depth(b), 0.0, 0.0)),
        "dam_break" => Arc::new(move |x, b| {
            let depth = if x < p.dam_position { p.dam_left_depth } else { p.dam_right_depth };
            CellState::new((depth - b).max(0.0), 0.0, 0.0)
        }),
        "periodic_linear_wave" => {
            let k = p.wave_kh0 / p.wave_depth;
            let c = wave_speed(cfg);
            let amp = p.wave_amplitude * p.wave_depth;
            let x0 = cfg.x_lo;
            Arc::new(move |x, b| {
                let eta = amp * (k * (x - x0)).sin();
                CellState::new((eta - b).max(0.0), c * eta, 0.0)
            })
        }
        "sloping_beach_crater" => Arc::new(move |x, b| {
            let eta = crater_initial(x, p.crater_center, p.crater_depth, p.crater_diameter);
            let h0 = still_depth(b);
            let h = (eta - b).max(0.0);
            let outward = if x >= p.crater_center { 1.0 } else { -1.0 };
            let u = outgoing_velocity(eta, h0, g, outward, p.velocity_init);
            CellState::new(h, h * u, 0.0)
        }),
        other => return Err(Error::UnknownScenario(other.to_string())),
    })
}

/// Everything needed to build the initial hierarchy.
pub struct Scenario {
    pub domain: Domain,
    pub bathymetry: BathySource,
    pub init: Initializer,
}

pub fn build(cfg: &RunConfig) -> Result<Scenario> {
    Ok(Scenario {
        domain: Domain {
            x_lo: cfg.x_lo,
            x_hi: cfg.x_hi,
            base_cells: cfg.base_cells,
            left: cfg.boundary_left,
            right: cfg.boundary_right,
        },
        bathymetry: bathymetry(cfg)?,
        init: initial_state(cfg)?,
    })
}
