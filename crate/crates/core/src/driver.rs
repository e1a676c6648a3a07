//! Time loop: regridding cadence, output times, gauges and the manifest.

use std::path::Path;
use std::time::Instant;

use crate::amr::{advance_hierarchy, build_hierarchy, regrid, stable_hierarchy_dt, AdvanceReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Hierarchy;
use crate::io::{write_frames, GaugeRecorder, Manifest};
use crate::scenarios;

pub const SOLVER_NAME: &str = "dispersive-amr";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Simulation {
    pub config: RunConfig,
    pub hierarchy: Hierarchy,
    pub steps: usize,
    pub retries: usize,
    pub mass_initial: f64,
    pub max_courant: Vec<f64>,
    pub gauges: GaugeRecorder,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let sc = scenarios::build(&config)?;
        let hierarchy = build_hierarchy(sc.domain, sc.bathymetry, &config.amr, &config.solver, &*sc.init)?;
        let mass_initial = hierarchy.composite_mass();
        let mut gauges = GaugeRecorder::new(&config.gauges);
        gauges.record(&hierarchy);
        Ok(Simulation {
            max_courant: vec![0.0; hierarchy.num_levels()],
            config,
            hierarchy,
            steps: 0,
            retries: 0,
            mass_initial,
            gauges,
        })
    }

    pub fn t(&self) -> f64 {
        self.hierarchy.t
    }

    pub fn mass(&self) -> f64 {
        self.hierarchy.composite_mass()
    }

    pub fn relative_mass_change(&self) -> f64 {
        let m0 = self.mass_initial;
        if m0 == 0.0 {
            return self.mass().abs();
        }
        (self.mass() - m0).abs() / m0.abs()
    }

    /// Coarse step the stability bound allows right now.
    pub fn stable_dt(&self) -> f64 {
        stable_hierarchy_dt(&self.hierarchy, &self.config.solver).unwrap_or(f64::INFINITY)
    }

    /// One coarse step of at most `dt_max`, regridding first when due.
    pub fn step(&mut self, dt_max: f64) -> Result<AdvanceReport> {
        let amr = &self.config.amr;
        if self.steps > 0
            && amr.regrid_interval > 0
            && self.hierarchy.num_levels() > 1
            && self.steps.is_multiple_of(amr.regrid_interval)
        {
            regrid(&mut self.hierarchy, amr, &self.config.solver)?;
        }
        let dt = self.stable_dt().min(dt_max);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::NonFinite { what: "time step", level: 1 });
        }
        let rep = advance_hierarchy(&mut self.hierarchy, dt, &self.config.solver)?;
        self.steps += 1;
        self.retries += rep.retries;
        for (m, c) in self.max_courant.iter_mut().zip(&rep.courant) {
            *m = m.max(*c);
        }
        self.gauges.record(&self.hierarchy);
        Ok(rep)
    }

    fn step_limit_reached(&self) -> bool {
        self.config.max_steps > 0 && self.steps >= self.config.max_steps
    }

    /// Step until `t_target` is reached exactly or the step limit hits.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let slack = 1e-12 * t_target.abs().max(1.0);
        while self.t() < t_target - slack && !self.step_limit_reached() {
            let remaining = t_target - self.t();
            let rep = self.step(remaining)?;
            if rep.dt == remaining {
                self.set_time(t_target);
            }
        }
        Ok(())
    }

    fn set_time(&mut self, t: f64) {
        self.hierarchy.t = t;
        for level in self.hierarchy.levels.iter_mut() {
            for p in level {
                p.t = t;
            }
        }
    }

    /// Take exactly `n` coarse steps (each at the stable step size).
    pub fn run_steps(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.step(f64::INFINITY)?;
        }
        Ok(())
    }

    /// Advance to `t_final`, writing frames, gauges and the manifest into
    /// `out` when given. On a solver error the current (last accepted)
    /// state is flushed as a final frame before the error is returned.
    pub fn run(&mut self, out: Option<&Path>) -> Result<Manifest> {
        let start = Instant::now();
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
        }
        let mut frames = Vec::new();
        let mut index = 0;
        let mut emit = |sim: &Simulation, frames: &mut Vec<String>| -> Result<()> {
            if let Some(dir) = out {
                frames.extend(write_frames(dir, index, &sim.hierarchy)?);
            }
            index += 1;
            Ok(())
        };
        emit(self, &mut frames)?;
        let t_final = self.config.t_final;
        let interval = self.config.output_interval;
        let mut k = 1usize;
        let result = loop {
            if self.t() >= t_final || self.step_limit_reached() {
                break Ok(());
            }
            let target = if interval > 0.0 { (k as f64 * interval).min(t_final) } else { t_final };
            if let Err(e) = self.advance_to(target) {
                break Err(e);
            }
            if self.step_limit_reached() && self.t() < target {
                break Ok(());
            }
            if self.t() < t_final {
                emit(self, &mut frames)?;
            }
            k += 1;
        };
        emit(self, &mut frames)?;
        let gauge_files = match out {
            Some(dir) => self.gauges.write(dir)?,
            None => Vec::new(),
        };
        let manifest = Manifest {
            solver: SOLVER_NAME.into(),
            version: VERSION.into(),
            status: if result.is_ok() { "ok".into() } else { "failed".into() },
            error: result.as_ref().err().map(|e| e.to_string()),
            config: self.config.clone(),
            t_reached: self.t(),
            steps: self.steps,
            retries: self.retries,
            mass_initial: self.mass_initial,
            mass_final: self.mass(),
            mass_relative_change: self.relative_mass_change(),
            max_courant: self.max_courant.clone(),
            elliptic_solves: self.hierarchy.elliptic_solves.clone(),
            frames,
            gauges: gauge_files,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        if let Some(dir) = out {
            manifest.write(dir)?;
        }
        result.map(|_| manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{list_frames, parse_frame};

    fn small(name: &str, extra: &str) -> RunConfig {
        RunConfig::parse(&format!("scenario = {name}\n{extra}")).unwrap()
    }

    #[test]
    fn output_times_are_hit_exactly() {
        let mut sim = Simulation::new(small("dam_break", "base_cells = 100\noutput_interval = 0.05\n")).unwrap();
        let dir = std::env::temp_dir().join(format!("damr-driver-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let m = sim.run(Some(&dir)).unwrap();
        assert_eq!(sim.t(), 0.25);
        let frames = list_frames(&dir).unwrap();
        assert_eq!(frames.len(), 6);
        let times: Vec<f64> = frames
            .values()
            .map(|v| parse_frame(&std::fs::read_to_string(&v[0]).unwrap()).unwrap().t)
            .collect();
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.05 * k as f64).abs() < 1e-12, "{times:?}");
        }
        assert!(m.mass_relative_change <= 1e-12);
        let back = Manifest::read(&dir).unwrap();
        assert_eq!(back.steps, m.steps);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn step_limit_stops_early() {
        let mut sim = Simulation::new(small("dam_break", "base_cells = 100\nmax_steps = 7\n")).unwrap();
        let m = sim.run(None).unwrap();
        assert_eq!(m.steps, 7);
        assert!(sim.t() < 0.25);
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = small("dam_break", "base_cells = 64\nmax_levels = 2\ngradient_tol = 0.05\nregrid_interval = 2\n");
        let mut a = Simulation::new(cfg.clone()).unwrap();
        let mut b = Simulation::new(cfg).unwrap();
        a.run(None).unwrap();
        b.run(None).unwrap();
        for (la, lb) in a.hierarchy.levels.iter().zip(&b.hierarchy.levels) {
            assert_eq!(la.len(), lb.len());
            for (pa, pb) in la.iter().zip(lb) {
                assert_eq!(pa.cells, pb.cells);
            }
        }
    }

    #[test]
    fn gauges_record_every_step() {
        let mut sim = Simulation::new(small("dam_break", "base_cells = 50\ngauges = 0.25, 0.75\n")).unwrap();
        sim.run(None).unwrap();
        assert_eq!(sim.gauges.series[0].len(), sim.steps + 1);
        assert_eq!(sim.gauges.series[0][0][1], 2.0);
        assert_eq!(sim.gauges.series[1][0][1], 1.0);
    }
}
