//! Frame, gauge and manifest files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{Hierarchy, Patch};

/// One row of a frame file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRow {
    pub x: f64,
    pub h: f64,
    pub hu: f64,
    pub eta: f64,
    pub psi: f64,
    pub b: f64,
}

/// Interior data of one patch at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub level: usize,
    pub i_lo: i64,
    pub dx: f64,
    pub rows: Vec<FrameRow>,
}

impl Frame {
    pub fn from_patch(p: &Patch, t: f64) -> Self {
        let rows = p
            .interior()
            .map(|j| {
                let c = p.cells[j];
                FrameRow {
                    x: p.x_center(j),
                    h: c.h,
                    hu: c.hu,
                    eta: p.eta(j),
                    psi: c.psi,
                    b: p.bathy.b[j],
                }
            })
            .collect();
        Frame {
            t,
            level: p.level,
            i_lo: p.i_lo,
            dx: p.dx,
            rows,
        }
    }

    pub fn x_lo(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.x - 0.5 * self.dx)
    }

    pub fn x_hi(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.x + 0.5 * self.dx)
    }
}

pub fn format_frame(f: &Frame) -> String {
    let mut s = String::with_capacity(64 + f.rows.len() * 150);
    let _ = writeln!(
        s,
        "# t={:.16e} level={} i_lo={} dx={:.16e}",
        f.t, f.level, f.i_lo, f.dx
    );
    s.push_str("# x h hu eta psi B\n");
    for r in &f.rows {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            r.x, r.h, r.hu, r.eta, r.psi, r.b
        );
    }
    s
}

pub fn parse_frame(text: &str) -> Result<Frame> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty frame".into(),
    })?;
    let bad = |line: usize, message: String| Error::Parse { line, message };
    let body = header
        .strip_prefix("# ")
        .ok_or_else(|| bad(1, "missing frame header".into()))?;
    let mut fields = BTreeMap::new();
    for item in body.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| bad(1, format!("malformed header item {item:?}")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(1, format!("header lacks {k}")));
    let float = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(1, format!("bad {k}"))) };
    let t = float("t")?;
    let dx = float("dx")?;
    let level = get("level")?.parse().map_err(|_| bad(1, "bad level".into()))?;
    let i_lo = get("i_lo")?.parse().map_err(|_| bad(1, "bad i_lo".into()))?;
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(k + 1, e.to_string()))?;
        if v.len() != 6 {
            return Err(bad(k + 1, format!("expected 6 columns, found {}", v.len())));
        }
        rows.push(FrameRow {
            x: v[0],
            h: v[1],
            hu: v[2],
            eta: v[3],
            psi: v[4],
            b: v[5],
        });
    }
    Ok(Frame { t, level, i_lo, dx, rows })
}

pub fn frame_file_name(index: usize, level: usize, patch: usize) -> String {
    format!("frame_{index:05}_L{level}_P{patch}.txt")
}

/// Write every patch of `h` as frame `index`; returns the file names.
pub fn write_frames(dir: &Path, index: usize, h: &Hierarchy) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for level in &h.levels {
        for (k, p) in level.iter().enumerate() {
            let name = frame_file_name(index, p.level, k);
            fs::write(dir.join(&name), format_frame(&Frame::from_patch(p, h.t)))?;
            names.push(name);
        }
    }
    Ok(names)
}

/// Frame files in `dir`, grouped by frame index and sorted by level then patch.
pub fn list_frames(dir: &Path) -> Result<BTreeMap<usize, Vec<PathBuf>>> {
    let mut out: BTreeMap<usize, Vec<(usize, usize, PathBuf)>> = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some((i, l, p)) = parse_frame_name(name) {
            out.entry(i).or_default().push((l, p, path.clone()));
        }
    }
    Ok(out
        .into_iter()
        .map(|(i, mut v)| {
            v.sort();
            (i, v.into_iter().map(|(_, _, p)| p).collect())
        })
        .collect())
}

fn parse_frame_name(name: &str) -> Option<(usize, usize, usize)> {
    let rest = name.strip_prefix("frame_")?.strip_suffix(".txt")?;
    let mut parts = rest.split('_');
    let i = parts.next()?.parse().ok()?;
    let l = parts.next()?.strip_prefix('L')?.parse().ok()?;
    let p = parts.next()?.strip_prefix('P')?.parse().ok()?;
    parts.next().is_none().then_some((i, l, p))
}

/// (h, hu, eta) at `x` from the finest patch containing it, linear in x
/// between the two nearest interior cell centres.
pub fn sample_point(h: &Hierarchy, x: f64) -> Option<[f64; 3]> {
    let (p, _) = h.finest_at(x)?;
    let s = (x - p.x_origin) / p.dx - 0.5;
    let i0 = (s.floor() as i64).clamp(p.i_lo, (p.i_hi() - 2).max(p.i_lo));
    let i1 = (i0 + 1).min(p.i_hi() - 1);
    let w = if i1 > i0 { (s - i0 as f64).clamp(0.0, 1.0) } else { 0.0 };
    let (j0, j1) = (p.slot(i0)?, p.slot(i1)?);
    let lerp = |a: f64, b: f64| a + w * (b - a);
    let (c0, c1) = (p.cells[j0], p.cells[j1]);
    Some([lerp(c0.h, c1.h), lerp(c0.hu, c1.hu), lerp(p.eta(j0), p.eta(j1))])
}

/// Time series at fixed positions.
#[derive(Debug, Clone, Default)]
pub struct GaugeRecorder {
    pub positions: Vec<f64>,
    /// `series[g]` holds rows `[t, h, hu, eta]` for gauge `g`.
    pub series: Vec<Vec<[f64; 4]>>,
}

impl GaugeRecorder {
    pub fn new(positions: &[f64]) -> Self {
        GaugeRecorder {
            positions: positions.to_vec(),
            series: vec![Vec::new(); positions.len()],
        }
    }

    pub fn record(&mut self, h: &Hierarchy) {
        for (g, &x) in self.positions.iter().enumerate() {
            if let Some([d, m, e]) = sample_point(h, x) {
                self.series[g].push([h.t, d, m, e]);
            }
        }
    }

    pub fn file_name(g: usize) -> String {
        format!("gauge_{g:02}.txt")
    }

    pub fn format(&self, g: usize) -> String {
        let mut s = format!("# gauge={g} x={:.16e}\n# t h hu eta\n", self.positions[g]);
        for r in &self.series[g] {
            let _ = writeln!(s, "{:.16e} {:.16e} {:.16e} {:.16e}", r[0], r[1], r[2], r[3]);
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let mut names = Vec::new();
        for g in 0..self.positions.len() {
            let name = Self::file_name(g);
            fs::write(dir.join(&name), self.format(g))?;
            names.push(name);
        }
        Ok(names)
    }
}

/// Summary written as `manifest.json` at the end of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub solver: String,
    pub version: String,
    pub status: String,
    pub error: Option<String>,
    pub config: RunConfig,
    pub t_reached: f64,
    pub steps: usize,
    pub retries: usize,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub mass_relative_change: f64,
    pub max_courant: Vec<f64>,
    pub elliptic_solves: Vec<u64>,
    pub frames: Vec<String>,
    pub gauges: Vec<String>,
    pub wall_seconds: f64,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        fs::write(dir.join(Self::FILE), text)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(Self::FILE))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryKind, Side};
    use crate::state::CellState;
    use proptest::prelude::*;

    fn patch() -> Patch {
        let mut p = Patch::new(2, 6, 5, 0.25, -1.0, Side::Interior, Side::Physical(BoundaryKind::Wall));
        for (k, j) in p.interior().enumerate() {
            p.cells[j] = CellState::new(1.0 + 0.1 * k as f64, -0.3 * k as f64, 1e-7 / 3.0);
            p.bathy.b[j] = -1.0 / 7.0 * k as f64;
        }
        p
    }

    #[test]
    fn header_and_rows() {
        let text = format_frame(&Frame::from_patch(&patch(), 0.5));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "# t=5.0000000000000000e-1 level=2 i_lo=6 dx=2.5000000000000000e-1"
        );
        assert_eq!(lines.next().unwrap(), "# x h hu eta psi B");
        let first: Vec<&str> = lines.next().unwrap().split(' ').collect();
        assert_eq!(first.len(), 6);
        assert_eq!(first[0], "6.2500000000000000e-1");
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn frame_round_trip_is_byte_identical() {
        let text = format_frame(&Frame::from_patch(&patch(), 1.0 / 3.0));
        let f = parse_frame(&text).unwrap();
        assert_eq!(f, Frame::from_patch(&patch(), 1.0 / 3.0));
        assert_eq!(format_frame(&f), text);
    }

    #[test]
    fn malformed_frames_are_rejected() {
        assert!(parse_frame("").is_err());
        assert!(parse_frame("t=1\n").is_err());
        assert!(parse_frame("# t=1 level=1 i_lo=0\n").is_err());
        assert!(matches!(
            parse_frame("# t=1 level=1 i_lo=0 dx=1\n1 2 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn frame_names() {
        assert_eq!(frame_file_name(3, 2, 1), "frame_00003_L2_P1.txt");
        assert_eq!(parse_frame_name("frame_00003_L2_P1.txt"), Some((3, 2, 1)));
        assert_eq!(parse_frame_name("gauge_00.txt"), None);
    }

    proptest! {
        #[test]
        fn any_values_round_trip(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 6..60), t in -1e9f64..1e9) {
            let rows = vals
                .chunks_exact(6)
                .map(|c| FrameRow { x: c[0], h: c[1], hu: c[2], eta: c[3], psi: c[4], b: c[5] })
                .collect();
            let f = Frame { t, level: 1, i_lo: -3, dx: 0.1, rows };
            let text = format_frame(&f);
            let g = parse_frame(&text).unwrap();
            prop_assert_eq!(&g, &f);
            prop_assert_eq!(format_frame(&g), text);
        }
    }
}
