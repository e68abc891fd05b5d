//! Two-panel figure: trail and landmarks on the left, normalized aberration
//! bars on the right. Output bytes depend only on the input values.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector2;

use crate::landscape::Landmark;
use crate::polarity::AberrationProfile;
use crate::slam::TrailPoint;

const PANEL: f64 = 400.0;
const MARGIN: f64 = 40.0;
const WIDTH: f64 = 2.0 * PANEL + 3.0 * MARGIN;
const HEIGHT: f64 = PANEL + 2.0 * MARGIN;

pub struct Figure<'a> {
    pub trail: &'a [TrailPoint],
    pub ground_truth: &'a [Landmark],
    /// Estimated landmark positions by sub-concept index.
    pub estimated: Vec<(i32, Vector2<f64>)>,
    pub profile: &'a AberrationProfile,
    pub title: String,
}

struct Frame {
    min: Vector2<f64>,
    scale: f64,
}

impl Frame {
    fn fit<'p>(points: impl Iterator<Item = &'p Vector2<f64>>) -> Frame {
        let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if !lo.x.is_finite() {
            lo = Vector2::new(0.0, 0.0);
            hi = Vector2::new(100.0, 100.0);
        }
        let extent = (hi - lo).max().max(1.0);
        let pad = 0.05 * extent;
        Frame {
            min: lo - Vector2::new(pad, pad),
            scale: PANEL / (extent + 2.0 * pad),
        }
    }

    /// Screen coordinates inside the left panel, y pointing up.
    fn map(&self, p: &Vector2<f64>) -> (f64, f64) {
        let x = MARGIN + (p.x - self.min.x) * self.scale;
        let y = MARGIN + PANEL - (p.y - self.min.y) * self.scale;
        (x, y)
    }
}

fn polyline(out: &mut String, frame: &Frame, points: impl Iterator<Item = Vector2<f64>>, class: &str) {
    let coords: Vec<String> = points
        .map(|p| {
            let (x, y) = frame.map(&p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(out, r#"<polyline class="{class}" points="{}"/>"#, coords.join(" "));
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(fig: &Figure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    out.push_str(concat!(
        "<style>",
        ".truth{fill:none;stroke:#c0392b;stroke-width:1}",
        ".estimate{fill:none;stroke:#2c3e50;stroke-width:1;stroke-dasharray:4 2}",
        ".gt{fill:#c0392b}.est{fill:none;stroke:#2c3e50}",
        ".pos{fill:#27ae60}.neg{fill:#8e44ad}.axis{stroke:#555;stroke-width:1}",
        "text{font-family:sans-serif;font-size:10px}",
        "</style>\n"
    ));
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{:.0}">{}</text>"#, MARGIN / 2.0, escape(&fig.title));

    // trail panel
    let _ = writeln!(out, r#"<g id="trail">"#);
    let points = fig
        .trail
        .iter()
        .flat_map(|t| [t.truth.position(), t.estimate.position()])
        .chain(fig.ground_truth.iter().map(|l| l.position))
        .chain(fig.estimated.iter().map(|(_, p)| *p))
        .collect::<Vec<_>>();
    let frame = Frame::fit(points.iter());
    let _ = writeln!(
        out,
        r#"<rect class="axis" x="{MARGIN}" y="{MARGIN}" width="{PANEL}" height="{PANEL}" fill="none"/>"#
    );
    polyline(&mut out, &frame, fig.trail.iter().map(|t| t.truth.position()), "truth");
    polyline(&mut out, &frame, fig.trail.iter().map(|t| t.estimate.position()), "estimate");
    for l in fig.ground_truth {
        let (x, y) = frame.map(&l.position);
        let _ = writeln!(out, r#"<circle class="gt" cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
    }
    for (_, p) in &fig.estimated {
        let (x, y) = frame.map(p);
        let _ = writeln!(out, r#"<circle class="est" cx="{x:.2}" cy="{y:.2}" r="5"/>"#);
    }
    let _ = writeln!(out, "</g>");

    // aberration panel on a fixed [-1, 1] axis
    let left = 2.0 * MARGIN + PANEL;
    let zero = MARGIN + PANEL / 2.0;
    let half = PANEL / 2.0;
    let _ = writeln!(out, r#"<g id="aberration">"#);
    let _ = writeln!(
        out,
        r#"<rect class="axis" x="{left}" y="{MARGIN}" width="{PANEL}" height="{PANEL}" fill="none"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{left}" y1="{zero}" x2="{:.0}" y2="{zero}"/>"#,
        left + PANEL
    );
    let entries = fig.profile.entries();
    let slot = PANEL / entries.len().max(1) as f64;
    for (k, e) in entries.iter().enumerate() {
        let v = e.value.clamp(-1.0, 1.0);
        let x = left + slot * (k as f64 + 0.2);
        let w = slot * 0.6;
        let (y, h) = if v >= 0.0 { (zero - v * half, v * half) } else { (zero, -v * half) };
        let class = if v >= 0.0 { "pos" } else { "neg" };
        let _ = writeln!(
            out,
            r#"<rect class="{class}" data-index="{}" x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}"/>"#,
            e.index
        );
    }
    for (k, e) in entries.iter().enumerate() {
        let x = left + slot * (k as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.0}" text-anchor="middle">{}</text>"#,
            MARGIN + PANEL + 14.0,
            escape(&e.name)
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(fig: &Figure, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(fig))
}
