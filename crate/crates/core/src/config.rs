//! Run configuration: flat `key = value` text with per-scenario defaults.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amr::{AmrParams, StaticRegion};
use crate::error::{Error, Result};
use crate::grid::BoundaryKind;
use crate::params::SolverParams;
use crate::scenarios::{self, VelocityInit};
use crate::stepper::SourceIntegrator;
use crate::swe::Limiter;

/// Scenario shape parameters. Only the ones relevant to the chosen
/// scenario are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub ocean_depth: f64,
    pub bump_height: f64,
    pub bump_center: f64,
    pub bump_width: f64,
    pub dam_left_depth: f64,
    pub dam_right_depth: f64,
    pub dam_position: f64,
    /// k h0 of the periodic wave.
    pub wave_kh0: f64,
    pub wave_depth: f64,
    /// Amplitude as a fraction of `wave_depth`.
    pub wave_amplitude: f64,
    pub wavelengths: usize,
    pub crater_depth: f64,
    pub crater_diameter: f64,
    pub crater_center: f64,
    pub velocity_init: VelocityInit,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            ocean_depth: 4000.0,
            bump_height: 1500.0,
            bump_center: 50_000.0,
            bump_width: 8_000.0,
            dam_left_depth: 2.0,
            dam_right_depth: 1.0,
            dam_position: 0.5,
            wave_kh0: 1.0,
            wave_depth: 4000.0,
            wave_amplitude: 1e-4,
            wavelengths: 1,
            crater_depth: 1000.0,
            crater_diameter: 3000.0,
            crater_center: 75_000.0,
            velocity_init: VelocityInit::Nonlinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: String,
    pub x_lo: f64,
    pub x_hi: f64,
    pub base_cells: usize,
    pub max_levels: usize,
    pub boundary_left: BoundaryKind,
    pub boundary_right: BoundaryKind,
    pub t_final: f64,
    /// Seconds between frames; 0 writes only the first and last frame.
    pub output_interval: f64,
    /// Stop after this many coarse steps even before `t_final`; 0 = no limit.
    pub max_steps: usize,
    pub gauges: Vec<f64>,
    pub bathymetry_file: Option<PathBuf>,
    pub solver: SolverParams,
    pub amr: AmrParams,
    pub shape: ScenarioParams,
}

impl RunConfig {
    /// Defaults for a named scenario.
    pub fn for_scenario(name: &str) -> Result<Self> {
        let mut c = RunConfig {
            scenario: name.to_string(),
            x_lo: 0.0,
            x_hi: 100_000.0,
            base_cells: 100,
            max_levels: 1,
            boundary_left: BoundaryKind::Wall,
            boundary_right: BoundaryKind::Wall,
            t_final: 1000.0,
            output_interval: 0.0,
            max_steps: 0,
            gauges: Vec::new(),
            bathymetry_file: None,
            solver: SolverParams::default(),
            amr: AmrParams::default(),
            shape: ScenarioParams::default(),
        };
        scenarios::apply_defaults(&mut c)?;
        Ok(c)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text)
    }

    /// Parse `key = value` lines. `#` starts a comment. The `scenario` key
    /// selects the defaults that every other key overrides; it may appear
    /// anywhere in the file. `static_region` may be repeated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            entries.push((lineno + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = entries
            .iter()
            .rev()
            .find(|(_, k, _)| k == "scenario")
            .map(|(_, _, v)| v.clone())
            .ok_or_else(|| Error::config("scenario", "missing"))?;
        let mut cfg = Self::for_scenario(&scenario)?;
        let mut regions_given = false;
        for (_, k, v) in &entries {
            if k == "scenario" {
                continue;
            }
            if k == "static_region" && !regions_given {
                cfg.amr.static_regions.clear();
                regions_given = true;
            }
            cfg.set(k, v)?;
        }
        let given: HashSet<String> = entries.iter().map(|(_, k, _)| k.clone()).collect();
        if given.contains("ratios") && !given.contains("max_levels") {
            cfg.max_levels = cfg.amr.ratios.len() + 1;
        } else if given.contains("max_levels") && !given.contains("ratios") && cfg.max_levels >= 1 {
            cfg.amr.ratios.resize(cfg.max_levels - 1, 2);
        }
        scenarios::derive(&mut cfg, &given);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.solver;
        let a = &mut self.amr;
        let p = &mut self.shape;
        match key {
            "x_lo" => self.x_lo = num(key, value)?,
            "x_hi" => self.x_hi = num(key, value)?,
            "base_cells" => self.base_cells = int(key, value)?,
            "max_levels" => self.max_levels = int(key, value)?,
            "ratios" => {
                a.ratios = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|t| !t.is_empty())
                        .map(|t| int(key, t))
                        .collect::<Result<_>>()?
                }
            }
            "boundary" => {
                let b = boundary(key, value)?;
                self.boundary_left = b;
                self.boundary_right = b;
            }
            "boundary_left" => self.boundary_left = boundary(key, value)?,
            "boundary_right" => self.boundary_right = boundary(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "output_interval" => self.output_interval = num(key, value)?,
            "max_steps" => self.max_steps = int(key, value)?,
            "gauges" => {
                self.gauges = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| num(key, t))
                    .collect::<Result<_>>()?
            }
            "bathymetry_file" => self.bathymetry_file = Some(PathBuf::from(value)),
            "g" => s.g = num(key, value)?,
            "b1" => s.b1 = num(key, value)?,
            "switch_depth" => s.switch_depth = num(key, value)?,
            "dry_tolerance" => s.dry_tolerance = num(key, value)?,
            "dispersion" => s.dispersion = flag(key, value)?,
            "limiter" => {
                s.limiter = Limiter::parse(value).ok_or_else(|| Error::config(key, format!("unknown limiter {value:?}")))?
            }
            "source_integrator" => {
                s.source_integrator = SourceIntegrator::parse(value)
                    .ok_or_else(|| Error::config(key, format!("unknown integrator {value:?}")))?
            }
            "cfl_target" => s.cfl_target = num(key, value)?,
            "cfl_max" => s.cfl_max = num(key, value)?,
            "max_velocity" => s.max_velocity = num(key, value)?,
            "parallel" => s.parallel = flag(key, value)?,
            "amplitude_tol" => a.amplitude_tol = num(key, value)?,
            "gradient_tol" => a.gradient_tol = num(key, value)?,
            "regrid_interval" => a.regrid_interval = int(key, value)?,
            "flag_buffer" => a.flag_buffer = int(key, value)?,
            "static_region" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(Error::config(key, "expected: x_lo x_hi min_level max_level"));
                }
                a.static_regions.push(StaticRegion {
                    x_lo: num(key, parts[0])?,
                    x_hi: num(key, parts[1])?,
                    min_level: int(key, parts[2])?,
                    max_level: int(key, parts[3])?,
                });
            }
            "ocean_depth" => p.ocean_depth = num(key, value)?,
            "bump_height" => p.bump_height = num(key, value)?,
            "bump_center" => p.bump_center = num(key, value)?,
            "bump_width" => p.bump_width = num(key, value)?,
            "dam_left_depth" => p.dam_left_depth = num(key, value)?,
            "dam_right_depth" => p.dam_right_depth = num(key, value)?,
            "dam_position" => p.dam_position = num(key, value)?,
            "wave_kh0" => p.wave_kh0 = num(key, value)?,
            "wave_depth" => p.wave_depth = num(key, value)?,
            "wave_amplitude" => p.wave_amplitude = num(key, value)?,
            "wavelengths" => p.wavelengths = int(key, value)?,
            "depth_m" | "crater_depth" => p.crater_depth = num(key, value)?,
            "diameter_m" | "crater_diameter" => p.crater_diameter = num(key, value)?,
            "center_x_m" | "crater_center" => p.crater_center = num(key, value)?,
            "velocity_init" => {
                p.velocity_init = VelocityInit::parse(value)
                    .ok_or_else(|| Error::config(key, format!("unknown velocity init {value:?}")))?
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        if !(self.x_hi > self.x_lo) {
            return Err(Error::config("x_hi", "must exceed x_lo"));
        }
        if self.base_cells < 16 {
            return Err(Error::config("base_cells", "must be at least 16"));
        }
        if self.max_levels == 0 {
            return Err(Error::config("max_levels", "must be at least 1"));
        }
        if self.amr.ratios.len() + 1 != self.max_levels {
            return Err(Error::config(
                "ratios",
                format!(
                    "{} ratios given for max_levels = {} (need {})",
                    self.amr.ratios.len(),
                    self.max_levels,
                    self.max_levels - 1
                ),
            ));
        }
        if self.amr.ratios.iter().any(|&r| r < 1) {
            return Err(Error::config("ratios", "every ratio must be at least 1"));
        }
        if (self.boundary_left == BoundaryKind::Periodic) != (self.boundary_right == BoundaryKind::Periodic) {
            return Err(Error::config("boundary", "periodic must be set on both sides"));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::config("t_final", "must be positive"));
        }
        if !(self.output_interval >= 0.0) {
            return Err(Error::config("output_interval", "must be non-negative"));
        }
        if !(s.g > 0.0) {
            return Err(Error::config("g", "must be positive"));
        }
        if !(s.b1 > -1.0 / 3.0) {
            return Err(Error::config("b1", "must exceed -1/3"));
        }
        if !(s.dry_tolerance > 0.0) {
            return Err(Error::config("dry_tolerance", "must be positive"));
        }
        if !(s.switch_depth >= 0.0) {
            return Err(Error::config("switch_depth", "must be non-negative"));
        }
        if !(s.cfl_target > 0.0 && s.cfl_target <= s.cfl_max && s.cfl_max <= 1.0) {
            return Err(Error::config("cfl_target", "need 0 < cfl_target <= cfl_max <= 1"));
        }
        if !(s.max_velocity > 0.0) {
            return Err(Error::config("max_velocity", "must be positive"));
        }
        for r in &self.amr.static_regions {
            if !(r.x_hi > r.x_lo) || r.min_level > r.max_level || r.max_level == 0 {
                return Err(Error::config(
                    "static_region",
                    "need x_lo < x_hi and 1 <= min_level <= max_level",
                ));
            }
        }
        for &x in &self.gauges {
            if x < self.x_lo || x > self.x_hi {
                return Err(Error::config("gauges", format!("gauge at {x} is outside the domain")));
            }
        }
        scenarios::validate_shape(self)
    }

    /// The config rendered back into `key = value` form.
    pub fn to_text(&self) -> String {
        let s = &self.solver;
        let a = &self.amr;
        let p = &self.shape;
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("scenario", self.scenario.clone());
        kv("x_lo", self.x_lo.to_string());
        kv("x_hi", self.x_hi.to_string());
        kv("base_cells", self.base_cells.to_string());
        kv("max_levels", self.max_levels.to_string());
        kv(
            "ratios",
            a.ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "),
        );
        kv("boundary_left", self.boundary_left.name().into());
        kv("boundary_right", self.boundary_right.name().into());
        kv("t_final", self.t_final.to_string());
        kv("output_interval", self.output_interval.to_string());
        kv("max_steps", self.max_steps.to_string());
        kv("gauges", list(&self.gauges));
        if let Some(f) = &self.bathymetry_file {
            kv("bathymetry_file", f.display().to_string());
        }
        kv("g", s.g.to_string());
        kv("b1", s.b1.to_string());
        kv("switch_depth", s.switch_depth.to_string());
        kv("dry_tolerance", s.dry_tolerance.to_string());
        kv("dispersion", s.dispersion.to_string());
        kv("limiter", s.limiter.name().into());
        kv("source_integrator", s.source_integrator.name().into());
        kv("cfl_target", s.cfl_target.to_string());
        kv("cfl_max", s.cfl_max.to_string());
        kv("max_velocity", s.max_velocity.to_string());
        kv("parallel", s.parallel.to_string());
        kv("amplitude_tol", a.amplitude_tol.to_string());
        kv("gradient_tol", a.gradient_tol.to_string());
        kv("regrid_interval", a.regrid_interval.to_string());
        kv("flag_buffer", a.flag_buffer.to_string());
        for r in &a.static_regions {
            kv(
                "static_region",
                format!("{} {} {} {}", r.x_lo, r.x_hi, r.min_level, r.max_level),
            );
        }
        kv("ocean_depth", p.ocean_depth.to_string());
        kv("bump_height", p.bump_height.to_string());
        kv("bump_center", p.bump_center.to_string());
        kv("bump_width", p.bump_width.to_string());
        kv("dam_left_depth", p.dam_left_depth.to_string());
        kv("dam_right_depth", p.dam_right_depth.to_string());
        kv("dam_position", p.dam_position.to_string());
        kv("wave_kh0", p.wave_kh0.to_string());
        kv("wave_depth", p.wave_depth.to_string());
        kv("wave_amplitude", p.wave_amplitude.to_string());
        kv("wavelengths", p.wavelengths.to_string());
        kv("crater_depth", p.crater_depth.to_string());
        kv("crater_diameter", p.crater_diameter.to_string());
        kv("crater_center", p.crater_center.to_string());
        kv("velocity_init", p.velocity_init.name().into());
        out
    }
}

/// Parse a float, also accepting a simple fraction such as `1/15`.
fn num(key: &str, value: &str) -> Result<f64> {
    let parsed = match value.split_once('/') {
        Some((a, b)) => match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) if b != 0.0 => Some(a / b),
            _ => None,
        },
        None => match value {
            "inf" | "infinity" => Some(f64::INFINITY),
            _ => value.parse::<f64>().ok(),
        },
    };
    match parsed {
        Some(v) if !v.is_nan() => Ok(v),
        _ => Err(Error::config(key, format!("not a number: {value:?}"))),
    }
}

fn int(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("not a non-negative integer: {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("not a boolean: {value:?}"))),
    }
}

fn boundary(key: &str, value: &str) -> Result<BoundaryKind> {
    BoundaryKind::parse(value).ok_or_else(|| Error::config(key, format!("unknown boundary {value:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_comments() {
        let cfg = RunConfig::parse(
            "# demo\nmax_levels = 3\nratios = 2, 4\nscenario = lake_at_rest_bumpy\nb1 = 1/15 # optimal\nt_final=50\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, "lake_at_rest_bumpy");
        assert_eq!(cfg.amr.ratios, vec![2, 4]);
        assert_eq!(cfg.solver.b1, 1.0 / 15.0);
        assert_eq!(cfg.t_final, 50.0);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::parse("scenario = dam_break\nmax_levels = 3\nratios = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "ratios"), "{e}");
        let e = RunConfig::parse("scenario = dam_break\nbase_cells = 8\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "base_cells"));
        let e = RunConfig::parse("scenario = dam_break\nfoo = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "foo"));
        let e = RunConfig::parse("scenario = dam_break\ng = fast\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "g"));
        assert!(matches!(RunConfig::parse("t_final = 1\n"), Err(Error::Config { .. })));
        assert!(matches!(RunConfig::parse("scenario = nowhere\n"), Err(Error::UnknownScenario(_))));
        assert!(matches!(RunConfig::parse("scenario\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn level_count_and_ratios_fill_each_other() {
        let cfg = RunConfig::parse("scenario = dam_break\nmax_levels = 3\n").unwrap();
        assert_eq!(cfg.amr.ratios, vec![2, 2]);
        let cfg = RunConfig::parse("scenario = dam_break\nratios = 4\n").unwrap();
        assert_eq!(cfg.max_levels, 2);
    }

    #[test]
    fn periodic_wave_domain_follows_shape() {
        let cfg = RunConfig::parse("scenario = periodic_linear_wave\nwave_kh0 = 0.5\nwavelengths = 2\n").unwrap();
        assert!((cfg.x_hi - 2.0 * 2.0 * std::f64::consts::PI * 8000.0).abs() < 1e-6);
        assert_eq!(cfg.base_cells, 128);
        let cfg = RunConfig::parse("scenario = periodic_linear_wave\nbase_cells = 32\n").unwrap();
        assert_eq!(cfg.base_cells, 32);
    }

    #[test]
    fn text_round_trip() {
        for name in scenarios::NAMES {
            let mut cfg = RunConfig::for_scenario(name).unwrap();
            cfg.gauges = vec![cfg.x_lo, cfg.x_hi];
            let again = RunConfig::parse(&cfg.to_text()).unwrap();
            assert_eq!(again, cfg);
        }
    }
}
