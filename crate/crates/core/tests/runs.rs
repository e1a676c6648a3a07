//! End-to-end runs through the driver and the file formats.

use std::path::Path;

use dispersive_amr::config::RunConfig;
use dispersive_amr::driver::Simulation;
use dispersive_amr::io::{format_frame, list_frames, parse_frame, Manifest};
use dispersive_amr::oracle::exact_dambreak;
use dispersive_amr::validation::convergence;

fn cfg(text: &str) -> RunConfig {
    RunConfig::parse(text).unwrap()
}

fn run_into(dir: &Path, text: &str) -> (Simulation, Manifest) {
    let mut sim = Simulation::new(cfg(text)).unwrap();
    let m = sim.run(Some(dir)).unwrap();
    (sim, m)
}

#[test]
fn written_frames_parse_back_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = run_into(
        dir.path(),
        "scenario = dam_break\nbase_cells = 64\nmax_levels = 2\ngradient_tol = 0.05\noutput_interval = 0.1\n",
    );
    assert_eq!(m.status, "ok");
    let frames = list_frames(dir.path()).unwrap();
    assert_eq!(frames.len(), 4);
    let last = frames.values().last().unwrap();
    assert!(last.len() >= 2, "expected refined patches in the last frame");
    for paths in frames.values() {
        for p in paths {
            let text = std::fs::read_to_string(p).unwrap();
            assert_eq!(format_frame(&parse_frame(&text).unwrap()), text);
        }
    }
    let back = Manifest::read(dir.path()).unwrap();
    assert_eq!(back.frames.len(), frames.values().map(Vec::len).sum::<usize>());
}

#[test]
fn identical_configs_write_identical_files() {
    let text = "scenario = sloping_beach_crater\nbase_cells = 200\nt_final = 120\noutput_interval = 60\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_into(a.path(), text);
    run_into(b.path(), text);
    let fa = list_frames(a.path()).unwrap();
    let fb = list_frames(b.path()).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (pa, pb) in fa.values().flatten().zip(fb.values().flatten()) {
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    }
}

#[test]
fn linear_wave_converges_at_second_order() {
    let rep = convergence("periodic_linear_wave", &[64, 128, 256], "").unwrap();
    for o in &rep.orders {
        assert!(*o >= 1.8, "{}", rep.render());
    }
}

#[test]
fn lake_final_frame_is_still() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = run_into(dir.path(), "scenario = lake_at_rest_bumpy\nmax_levels = 3\nt_final = 200\n");
    let frames = list_frames(dir.path()).unwrap();
    let last = frames.values().last().unwrap();
    assert_eq!(last.len(), m.config.max_levels);
    for p in last {
        let f = parse_frame(&std::fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(f.t, 200.0);
        for r in &f.rows {
            assert_eq!(r.hu, 0.0);
            assert_eq!(r.psi, 0.0);
            assert!(r.eta.abs() < 1e-12, "eta {} at {}", r.eta, r.x);
        }
    }
}

#[test]
fn dam_break_frame_tracks_the_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = run_into(dir.path(), "scenario = dam_break\nbase_cells = 400\n");
    let frames = list_frames(dir.path()).unwrap();
    let f = parse_frame(&std::fs::read_to_string(&frames.values().last().unwrap()[0]).unwrap()).unwrap();
    assert_eq!(f.t, 0.25);
    let s = &m.config.shape;
    let err: f64 = f
        .rows
        .iter()
        .map(|r| (r.h - exact_dambreak(s.dam_left_depth, s.dam_right_depth, 1.0, (r.x - s.dam_position) / f.t).0).abs())
        .sum::<f64>()
        * f.dx;
    assert!(err < 2e-3, "L1(h) {err}");
}

#[test]
fn crater_wave_inundates_the_onshore_gauge() {
    let dir = tempfile::tempdir().unwrap();
    let (sim, m) = run_into(dir.path(), "scenario = sloping_beach_crater\nmax_levels = 1\nt_final = 3000\n");
    assert_eq!(m.gauges.len(), 2);
    let onshore = &sim.gauges.series[1];
    assert_eq!(onshore[0][1], 0.0);
    let wet = onshore.iter().filter(|s| s[1] > 1e-2).count();
    assert!(wet > 0, "no inundation recorded");
    let text = std::fs::read_to_string(dir.path().join(&m.gauges[1])).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), onshore.len());
}

#[test]
fn regridded_crater_conserves_mass_through_inundation() {
    let mut sim = Simulation::new(cfg("scenario = sloping_beach_crater\nt_final = 3000\n")).unwrap();
    let m = sim.run(None).unwrap();
    assert!(m.steps > 1500);
    assert!(m.mass_relative_change < 1e-12, "relative change {:e}", m.mass_relative_change);
}

#[test]
fn parallel_and_sequential_patch_updates_agree_bitwise() {
    let text = "scenario = sloping_beach_crater\nbase_cells = 400\nt_final = 200\n";
    let mut a = Simulation::new(cfg(&format!("{text}parallel = true\n"))).unwrap();
    let mut b = Simulation::new(cfg(&format!("{text}parallel = false\n"))).unwrap();
    a.run(None).unwrap();
    b.run(None).unwrap();
    assert_eq!(a.steps, b.steps);
    for (la, lb) in a.hierarchy.levels.iter().zip(&b.hierarchy.levels) {
        assert_eq!(la.len(), lb.len());
        for (pa, pb) in la.iter().zip(lb) {
            assert_eq!(pa.cells, pb.cells);
        }
    }
}
