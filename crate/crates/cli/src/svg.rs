//! Minimal SVG writer for slices, colorings and paths. Every coordinate is printed with
//! six significant digits so repeated runs produce identical files.

use std::fmt::Write;

use abp_core::levelset::{CurveComponent, LevelSlice};
use abp_core::topology::{AdmissiblePath, Coloring, SegmentKind};
use abp_core::{Domain, Point};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 24.0;
/// Resolution of the shaded coloring raster, per side.
const SHADE_CELLS: usize = 240;

/// Six significant digits, shortest form.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let r: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{r}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub struct Canvas {
    lo: Point,
    hi: Point,
    scale: f64,
    width: f64,
    height: f64,
    body: String,
}

impl Canvas {
    pub fn new(k: &Domain) -> Canvas {
        let (lo, hi) = k.bbox();
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let scale = (WIDTH - 2.0 * MARGIN) / span;
        Canvas {
            lo,
            hi,
            scale,
            width: (hi.x - lo.x) * scale + 2.0 * MARGIN,
            height: (hi.y - lo.y) * scale + 2.0 * MARGIN,
            body: String::new(),
        }
    }

    fn map(&self, p: Point) -> (String, String) {
        (
            fmt6(MARGIN + (p.x - self.lo.x) * self.scale),
            fmt6(MARGIN + (self.hi.y - p.y) * self.scale),
        )
    }

    fn path_data(&self, pts: &[Point], close: bool) -> String {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{x} {y} ", if i == 0 { "M" } else { "L" });
        }
        if close {
            d.push('Z');
        }
        d.trim_end().to_string()
    }

    /// Fills `c⁻¹(−1)` on a coarse raster, merging runs along each row.
    pub fn shade(&mut self, k: &Domain, col: &Coloring) {
        let n = SHADE_CELLS;
        let dx = (self.hi.x - self.lo.x) / n as f64;
        let dy = (self.hi.y - self.lo.y) / n as f64;
        let _ = writeln!(
            self.body,
            r##"<g fill="#9ab" fill-opacity="0.45" stroke="none">"##
        );
        for j in 0..n {
            let y = self.lo.y + (j as f64 + 0.5) * dy;
            let mut run: Option<usize> = None;
            for i in 0..=n {
                let neg = i < n && {
                    let p = Point::new(self.lo.x + (i as f64 + 0.5) * dx, y);
                    k.contains(p) && col.color_at(p).map(|c| c < 0).unwrap_or(false)
                };
                match (neg, run) {
                    (true, None) => run = Some(i),
                    (false, Some(s)) => {
                        let a = Point::new(self.lo.x + s as f64 * dx, y + 0.5 * dy);
                        let (x0, y0) = self.map(a);
                        let _ = writeln!(
                            self.body,
                            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}"/>"#,
                            fmt6((i - s) as f64 * dx * self.scale),
                            fmt6(dy * self.scale)
                        );
                        run = None;
                    }
                    _ => {}
                }
            }
        }
        self.body.push_str("</g>\n");
    }

    pub fn boundary(&mut self, k: &Domain) {
        let style = r##"fill="none" stroke="#222" stroke-width="1.5" stroke-dasharray="8 5""##;
        match *k {
            Domain::Disk { center, radius } => {
                let (cx, cy) = self.map(center);
                let _ = writeln!(
                    self.body,
                    r#"<circle cx="{cx}" cy="{cy}" r="{}" {style}/>"#,
                    fmt6(radius * self.scale)
                );
            }
            Domain::Rect { lo, hi } => {
                let (x0, y0) = self.map(Point::new(lo.x, hi.y));
                let _ = writeln!(
                    self.body,
                    r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" {style}/>"#,
                    fmt6((hi.x - lo.x) * self.scale),
                    fmt6((hi.y - lo.y) * self.scale)
                );
            }
        }
    }

    fn curve(&mut self, c: &CurveComponent) {
        // loops solid, arcs drawn thicker in a second colour
        let style = if c.closed {
            r##"stroke="#1f4e9c" stroke-width="1.6""##
        } else {
            r##"stroke="#9c1f3a" stroke-width="2.4""##
        };
        let _ = writeln!(
            self.body,
            r#"<path class="{}" d="{}" fill="none" {style}/>"#,
            if c.closed { "loop" } else { "arc" },
            self.path_data(&c.vertices, false)
        );
    }

    pub fn slice(&mut self, s: &LevelSlice) {
        for c in s.components() {
            self.curve(c);
        }
    }

    pub fn path(&mut self, p: &AdmissiblePath) {
        for sg in &p.segments {
            let (colour, width, dash) = match sg.kind {
                SegmentKind::VertDown | SegmentKind::VertUp => ("#1a7f37", "2", ""),
                SegmentKind::LoopArc => ("#e07b00", "3.5", ""),
                SegmentKind::GhatArc => ("#b0008a", "3.5", r#" stroke-dasharray="2 3""#),
                SegmentKind::HhatArc => ("#6a2fc0", "3.5", ""),
                SegmentKind::BoundaryArc => ("#7a4a10", "3.5", r#" stroke-dasharray="6 3""#),
            };
            let pts = if sg.points.is_empty() {
                vec![sg.start, sg.end]
            } else {
                sg.points.clone()
            };
            let _ = writeln!(
                self.body,
                r#"<path class="{}" d="{}" fill="none" stroke="{colour}" stroke-width="{width}"{dash}/>"#,
                kind_name(sg.kind),
                self.path_data(&pts, false)
            );
        }
        for (label, at) in waypoints(p) {
            self.point(at, &label);
        }
    }

    pub fn point(&mut self, p: Point, label: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            self.body,
            r##"<circle cx="{x}" cy="{y}" r="3" fill="#000"/>"##
        );
        let (lx, ly) = self.map(p);
        let _ = writeln!(
            self.body,
            r#"<text x="{lx}" y="{ly}" dx="5" dy="-5" font-size="13" font-family="serif">{}</text>"#,
            escape(label)
        );
    }

    pub fn note(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            r##"<text x="{}" y="{}" font-size="12" font-family="sans-serif" fill="#a00">{}</text>"##,
            fmt6(MARGIN),
            fmt6(self.height - 6.0),
            escape(text)
        );
    }

    pub fn title(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="16" font-size="13" font-family="sans-serif">{}</text>"#,
            fmt6(MARGIN),
            escape(text)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            self.body,
            w = fmt6(self.width),
            h = fmt6(self.height),
        )
    }
}

fn kind_name(k: SegmentKind) -> &'static str {
    match k {
        SegmentKind::VertDown => "vert_down",
        SegmentKind::VertUp => "vert_up",
        SegmentKind::LoopArc => "loop_arc",
        SegmentKind::GhatArc => "ghat_arc",
        SegmentKind::BoundaryArc => "boundary_arc",
        SegmentKind::HhatArc => "hhat_arc",
    }
}

fn sub(k: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    k.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

/// Waypoint labels: the path leaves `q₁`, lands on a curve at
/// `G(ξ₁)` (or `Ĝ`, `Ĥ`), runs along it to `ξ₁`, and so on until `x*`.
pub fn waypoints(p: &AdmissiblePath) -> Vec<(String, Point)> {
    let mut out = vec![(format!("q{}", sub(1)), p.start_point)];
    let mut k = 0;
    for (i, sg) in p.segments.iter().enumerate() {
        let arc = !sg.kind.is_vertical();
        if arc {
            k += 1;
            let from = match sg.kind {
                SegmentKind::LoopArc => Some(format!("G(ξ{})", sub(k))),
                SegmentKind::GhatArc => Some(format!("Ĝ(ξ{})", sub(k))),
                SegmentKind::HhatArc => Some(format!("Ĥ(ξ{})", sub(k))),
                _ => None,
            };
            if let Some(l) = from.filter(|_| i > 0) {
                out.push((l, sg.start));
            }
            out.push((format!("ξ{}", sub(k)), sg.end));
        }
    }
    out.push(("x*".into(), p.end_point));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt6(1.23456789), "1.23457");
        assert_eq!(fmt6(-0.000123456789), "-0.000123457");
        assert_eq!(fmt6(400.0), "400");
        assert_eq!(fmt6(0.0), "0");
    }
}
