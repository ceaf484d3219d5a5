//! Minimal SVG 1.1 writer: polylines, markers and labels.

use std::fmt::Write;

use cmcrot_core::integrate::{Event, EventKind};
use cmcrot_core::TracedCurve;

pub struct Frame {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

impl Frame {
    pub fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = (x - self.x.0) / (self.x.1 - self.x.0);
        let sy = (y - self.y.0) / (self.y.1 - self.y.0);
        (
            self.margin + sx * self.width,
            self.margin + (1.0 - sy) * self.height,
        )
    }
}

pub struct Svg {
    pub frame: Frame,
    body: String,
}

impl Svg {
    pub fn new(frame: Frame) -> Self {
        Self {
            frame,
            body: String::new(),
        }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        let mut last: Option<(f64, f64)> = None;
        for (i, &(x, y)) in pts.iter().enumerate() {
            let (u, v) = self.frame.px(x, y);
            // drop sub-pixel moves, but keep the end point
            if let Some((lu, lv)) = last {
                if (u - lu).hypot(v - lv) < 0.5 && i + 1 < pts.len() {
                    continue;
                }
            }
            let _ = write!(d, "{u:.2},{v:.2} ");
            last = Some((u, v));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    pub fn dashed_line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str) {
        let (x1, y1) = self.frame.px(a.0, a.1);
        let (x2, y2) = self.frame.px(b.0, b.1);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-dasharray="4 3"/>"#
        );
    }

    pub fn marker(&mut self, x: f64, y: f64, fill: &str, label: &str) {
        let (u, v) = self.frame.px(x, y);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{u:.2}" cy="{v:.2}" r="4" fill="{fill}" stroke="black"/>"#
        );
        if !label.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
                u + 6.0,
                v - 6.0,
                escape(label)
            );
        }
    }

    pub fn text(&mut self, u: f64, v: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{u:.2}" y="{v:.2}" font-size="12">{}</text>"#,
            escape(s)
        );
    }

    fn axes(&self, out: &mut String) {
        let f = &self.frame;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            f.margin, f.margin, f.width, f.height
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{:.3}</text>"#,
            f.margin,
            f.margin + f.height + 14.0,
            f.x.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.3}</text>"#,
            f.margin + f.width,
            f.margin + f.height + 14.0,
            f.x.1
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.3}</text>"#,
            f.margin - 4.0,
            f.margin + f.height,
            f.y.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.3}</text>"#,
            f.margin - 4.0,
            f.margin + 10.0,
            f.y.1
        );
    }

    pub fn finish(self, title: &str) -> String {
        let f = &self.frame;
        let (w, h) = (f.width + 2.0 * f.margin, f.height + 2.0 * f.margin);
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(out, "<title>{}</title>", escape(title));
        let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        self.axes(&mut out);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="13">{}</text>"#,
            f.margin,
            16.0,
            escape(title)
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// The profile curve in the quadrant with its events.
pub fn profile(curve: &TracedCurve, events: &[Event], title: &str) -> String {
    let pts: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .map(|s| (s.state.x, s.state.y))
        .collect();
    let hi = pts
        .iter()
        .fold(0.0f64, |m, p| m.max(p.0).max(p.1))
        .max(1e-9)
        * 1.05;
    let mut svg = Svg::new(Frame {
        x: (0.0, hi),
        y: (0.0, hi),
        width: 480.0,
        height: 480.0,
        margin: 40.0,
    });
    svg.polyline(&pts, "steelblue", 1.5);
    for e in events {
        match e.kind {
            EventKind::AsymptoteX => {
                let c = e.value.unwrap_or(e.state.x);
                svg.dashed_line((c, 0.0), (c, hi), "gray");
            }
            EventKind::AsymptoteY => {
                let c = e.value.unwrap_or(e.state.y);
                svg.dashed_line((0.0, c), (hi, c), "gray");
            }
            EventKind::AxisTouchX | EventKind::AxisTouchY | EventKind::OriginApproach => {
                svg.marker(e.state.x, e.state.y, "crimson", e.kind.name());
            }
            EventKind::BoundsExit | EventKind::MaxLength => {}
        }
    }
    svg.finish(title)
}
