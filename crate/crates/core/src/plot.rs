//! SVG rendering of frames: eta and the bed against x, with refined patch
//! outlines.

use std::fmt::Write as _;

use crate::io::Frame;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const LEVEL_COLOURS: [&str; 6] = ["#1f5fa8", "#2c9c5a", "#c2512c", "#8e44ad", "#b7950b", "#444444"];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn polyline(out: &mut String, pts: impl Iterator<Item = (f64, f64)>, colour: &str, width: f64) {
    out.push_str("<polyline fill=\"none\" stroke=\"");
    out.push_str(colour);
    let _ = write!(out, "\" stroke-width=\"{width}\" points=\"");
    for (x, y) in pts {
        let _ = write!(out, "{x:.2},{y:.2} ");
    }
    out.push_str("\"/>\n");
}

/// One frame (all patches of all levels at one time) as an SVG document.
/// `eta_range` fixes the vertical axis; otherwise it is fitted to eta over
/// wet cells. The bed is drawn clipped to that range.
pub fn render_svg(frames: &[Frame], eta_range: Option<(f64, f64)>, title: &str) -> String {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for f in frames {
        x0 = x0.min(f.x_lo());
        x1 = x1.max(f.x_hi());
        for r in f.rows.iter().filter(|r| r.h > 0.0) {
            y0 = y0.min(r.eta);
            y1 = y1.max(r.eta);
        }
    }
    if let Some((a, b)) = eta_range {
        y0 = a;
        y1 = b;
    }
    if !(x1 > x0) {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !(y1 > y0) {
        let c = if y0.is_finite() { y0 } else { 0.0 };
        y0 = c - 1.0;
        y1 = c + 1.0;
    }
    let pad = 0.08 * (y1 - y0);
    let ax = Axes {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
    };
    let clip = |y: f64| y.clamp(ax.y0, ax.y1);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        escape(title)
    );
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (v, anchor_y) in [(ax.y0, ax.py(ax.y0)), (ax.y1, ax.py(ax.y1))] {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.3e}</text>",
            MARGIN - 4.0,
            anchor_y + 4.0,
            v
        );
    }
    for (v, anchor) in [(ax.x0, "start"), (ax.x1, "end")] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"{anchor}\">{:.4e}</text>",
            ax.px(v),
            HEIGHT - MARGIN + 16.0,
            v
        );
    }

    // Bed from the level-1 frames, eta per patch coloured by level.
    for f in frames.iter().filter(|f| f.level == 1) {
        polyline(
            &mut s,
            f.rows.iter().map(|r| (ax.px(r.x), ax.py(clip(r.b)))),
            "#8b6d4a",
            1.5,
        );
    }
    for f in frames {
        let colour = LEVEL_COLOURS[(f.level - 1).min(LEVEL_COLOURS.len() - 1)];
        if f.level > 1 {
            let (a, b) = (ax.px(f.x_lo()), ax.px(f.x_hi()));
            let inset = 3.0 * (f.level - 1) as f64;
            let _ = writeln!(
                s,
                "<rect x=\"{a:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
                MARGIN + inset,
                (b - a).max(0.5),
                HEIGHT - 2.0 * (MARGIN + inset)
            );
        }
        let mut run: Vec<(f64, f64)> = Vec::new();
        for r in &f.rows {
            if r.h > 0.0 {
                run.push((ax.px(r.x), ax.py(clip(r.eta))));
            } else if !run.is_empty() {
                polyline(&mut s, run.drain(..), colour, 1.2);
            }
        }
        if !run.is_empty() {
            polyline(&mut s, run.into_iter(), colour, 1.2);
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::FrameRow;

    fn frame(level: usize, xs: &[f64], h: f64) -> Frame {
        Frame {
            t: 1.0,
            level,
            i_lo: 0,
            dx: 1.0,
            rows: xs
                .iter()
                .map(|&x| FrameRow {
                    x,
                    h,
                    hu: 0.0,
                    eta: 0.1 * x,
                    psi: 0.0,
                    b: -h,
                })
                .collect(),
        }
    }

    #[test]
    fn draws_one_outline_per_refined_patch() {
        let frames = vec![
            frame(1, &[0.5, 1.5, 2.5, 3.5], 2.0),
            frame(2, &[1.25, 1.75], 2.0),
            frame(3, &[1.375, 1.625], 2.0),
        ];
        let svg = render_svg(&frames, None, "t = 1 <s>");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("stroke=\"black\"").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("t = 1 &lt;s&gt;"));
    }

    #[test]
    fn dry_cells_split_the_surface_line() {
        let mut f = frame(1, &[0.5, 1.5, 2.5, 3.5, 4.5], 1.0);
        f.rows[2].h = 0.0;
        let svg = render_svg(&[f], Some((-1.0, 1.0)), "");
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
