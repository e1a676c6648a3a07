use std::path::Path;
use std::process::{Command, Output};

fn bouss1d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bouss1d")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn run_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = dam_break\nbase_cells = 80\noutput_interval = 0.125\ngauges = 0.3\n",
    );
    let out = dir.path().join("out");
    let o = bouss1d(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.json", "gauge_00.txt", "frame_00000_L1_P0.txt", "frame_00002_L1_P0.txt"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let o = bouss1d(&["plot", "--quiet", "--out", out.to_str().unwrap(), "--range", "0.5,2.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(out.join("plot_00002.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write_config(dir.path(), "scenario = dam_break\nno_such_key = 1\n");
    assert_eq!(bouss1d(&["run", "--config", &bad_key]).status.code(), Some(2));
    let bad_scenario = write_config(dir.path(), "scenario = tidal_bore\n");
    assert_eq!(bouss1d(&["run", "--config", &bad_scenario]).status.code(), Some(2));
    let missing = dir.path().join("absent.toml");
    assert_eq!(bouss1d(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bouss1d(&["validate", "no_such_suite"]).status.code(), Some(2));
}

#[test]
fn plot_without_frames_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bouss1d(&["plot", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_writes_report_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let o = bouss1d(&["validate", "balance", "--quiet", "--out", report.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&report).unwrap().starts_with("PASS balance"));
}

#[test]
fn convergence_below_threshold_exits_with_1() {
    let o = bouss1d(&["convergence", "--quiet", "--cells", "32,64,128", "--min-order", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bouss1d(&["convergence", "--quiet", "--cells", "32,64,100"]);
    assert_eq!(o.status.code(), Some(2));
}
