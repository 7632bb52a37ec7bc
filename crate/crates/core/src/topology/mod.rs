//! Crossing parity, binary colorings of `K ∖ Σ`, loop signs, the fiber map `G`, and the
//! admissible-path constructions.

mod path;
mod validate;

pub use path::{
    construct_path_boundary, construct_path_compact, AdmissiblePath, PathSegment, SegmentKind,
};
pub use validate::{validate_path, PathReport};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Domain, Grid};
use crate::geom::{segment_crossing, signed_area, Crossing, Point};
use crate::levelset::{CurveComponent, LevelSlice};

const JITTER_TRIES: usize = 8;

fn scale_of(pts: &[Point]) -> f64 {
    pts.iter()
        .fold(1.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
}

/// Parity of the number of transversal crossings of the segment `x0 → y` with `Σ`.
/// Contacts near polyline vertices or tangential overlaps trigger a deterministic jitter of
/// `y` (well below the geometric tolerance) and a retry.
pub fn crossing_parity(s: &LevelSlice, x0: Point, y: Point) -> Result<u8> {
    let curves: Vec<&[Point]> = s.components().map(|c| c.vertices.as_slice()).collect();
    crossing_parity_curves(curves.into_iter(), x0, y)
}

fn crossing_parity_curves<'a>(
    curves: impl Iterator<Item = &'a [Point]> + Clone,
    x0: Point,
    y: Point,
) -> Result<u8> {
    let scale = scale_of(&[x0, y]);
    let eps_deg = 1e-12 * scale;
    'retry: for k in 0..=JITTER_TRIES {
        let target = if k == 0 {
            y
        } else {
            let th = k as f64 * 2.399_963_229_728_653;
            y + Point::new(th.cos(), th.sin()) * (1e-10 * scale * k as f64)
        };
        let (lo, hi) = (
            Point::new(x0.x.min(target.x), x0.y.min(target.y)),
            Point::new(x0.x.max(target.x), x0.y.max(target.y)),
        );
        let mut count = 0u32;
        for c in curves.clone() {
            for w in c.windows(2) {
                let (a, b) = (w[0], w[1]);
                if a.x.max(b.x) < lo.x - eps_deg
                    || a.x.min(b.x) > hi.x + eps_deg
                    || a.y.max(b.y) < lo.y - eps_deg
                    || a.y.min(b.y) > hi.y + eps_deg
                {
                    continue;
                }
                match segment_crossing(x0, target, a, b, eps_deg) {
                    Crossing::None => {}
                    Crossing::Proper(..) => count += 1,
                    Crossing::Degenerate => continue 'retry,
                }
            }
        }
        return Ok((count % 2) as u8);
    }
    Err(Error::DegenerateConfiguration(format!(
        "crossing parity from {x0:?} to {y:?} stayed degenerate after {JITTER_TRIES} jitters"
    )))
}

/// A ±1 coloring of `K ∖ Σ` relative to a base point. Grid cells are flood-filled into
/// components; cells meeting `Σ` stay unlabeled and fall back to a direct parity query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coloring {
    pub base_point: Point,
    pub parity_index: u8,
    pub grid: Grid,
    pub domain: Domain,
    /// Row-major cell labels; `u32::MAX` marks cells cut by `Σ` or outside `K`.
    pub component_labels: Vec<u32>,
    pub component_colors: Vec<i8>,
    curves: Vec<Vec<Point>>,
}

const UNLABELED: u32 = u32::MAX;

impl Coloring {
    fn sign(&self, parity: u8) -> i8 {
        let base = if parity == 0 { 1 } else { -1 };
        if self.parity_index == 0 {
            base
        } else {
            -base
        }
    }

    fn cell_label(&self, p: Point) -> Option<u32> {
        let (i, j) = self.grid.cell_of(p)?;
        let l = self.component_labels[j * (self.grid.nx - 1) + i];
        (l != UNLABELED).then_some(l)
    }

    /// Color at `p ∈ K ∖ Σ`.
    pub fn color_at(&self, p: Point) -> Result<i8> {
        if let Some(l) = self.cell_label(p) {
            return Ok(self.component_colors[l as usize]);
        }
        let parity =
            crossing_parity_curves(self.curves.iter().map(|c| c.as_slice()), self.base_point, p)?;
        Ok(self.sign(parity))
    }

    pub fn component_count(&self) -> usize {
        self.component_colors.len()
    }

    /// Whether `p` falls in a flood-filled cell (away from `Σ` by at least a cell).
    pub fn is_labeled(&self, p: Point) -> bool {
        self.cell_label(p).is_some()
    }
}

fn mark_point(cut: &mut [bool], g: &Grid, p: Point) {
    let cx = g.nx - 1;
    let cy = g.ny - 1;
    let fx = (p.x - g.lo.x) / g.hx;
    let fy = (p.y - g.lo.y) / g.hy;
    let i = fx.floor() as i64;
    let j = fy.floor() as i64;
    // the point may sit on a cell edge, so mark every cell whose closure can hold it
    for dj in -1..=1i64 {
        for di in -1..=1i64 {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= cx as i64 || b >= cy as i64 {
                continue;
            }
            let (a, b) = (a as usize, b as usize);
            let x0 = g.xs(a);
            let x1 = g.xs(a + 1);
            let y0 = g.ys(b);
            let y1 = g.ys(b + 1);
            let tol = 1e-9 * g.spacing();
            if p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol {
                cut[b * cx + a] = true;
            }
        }
    }
}

/// Flood-fills `K ∖ Σ` on the cells of `g` and colors each component by its crossing
/// parity from `x_star`, composed with `parity_index`.
pub fn build_coloring(
    s: &LevelSlice,
    k: &Domain,
    g: &Grid,
    x_star: Point,
    parity_index: u8,
) -> Result<Coloring> {
    let cx = g.nx - 1;
    let cy = g.ny - 1;
    let mut cut = vec![false; cx * cy];
    for c in s.components() {
        for w in c.vertices.windows(2) {
            mark_point(&mut cut, g, w[0]);
            mark_point(&mut cut, g, w[0].lerp(w[1], 0.5));
        }
        if let Some(&p) = c.vertices.last() {
            mark_point(&mut cut, g, p);
        }
    }
    let mut labels = vec![UNLABELED; cx * cy];
    let mut reps: Vec<Point> = Vec::new();
    let mut queue = VecDeque::new();
    for j0 in 0..cy {
        for i0 in 0..cx {
            let idx0 = j0 * cx + i0;
            if labels[idx0] != UNLABELED || cut[idx0] || !k.contains(g.cell_center(i0, j0)) {
                continue;
            }
            let l = reps.len() as u32;
            reps.push(g.cell_center(i0, j0));
            labels[idx0] = l;
            queue.push_back((i0, j0));
            while let Some((i, j)) = queue.pop_front() {
                let mut visit = |a: usize, b: usize| {
                    let idx = b * cx + a;
                    if labels[idx] == UNLABELED && !cut[idx] && k.contains(g.cell_center(a, b)) {
                        labels[idx] = l;
                        queue.push_back((a, b));
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < cx {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < cy {
                    visit(i, j + 1);
                }
            }
        }
    }
    let mut col = Coloring {
        base_point: x_star,
        parity_index,
        grid: *g,
        domain: *k,
        component_labels: labels,
        component_colors: Vec::new(),
        curves: s.components().map(|c| c.vertices.clone()).collect(),
    };
    match g.cell_of(x_star) {
        Some((i, j)) if col.component_labels[j * cx + i] != UNLABELED && k.contains(x_star) => {}
        _ => {
            return Err(Error::InvalidBasePoint(format!(
                "{x_star:?} lies in a cell cut by the level set or outside K"
            )))
        }
    }
    let mut colors = Vec::with_capacity(reps.len());
    for &r in &reps {
        colors.push(col.sign(crossing_parity(s, x_star, r)?));
    }
    col.component_colors = colors;
    Ok(col)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopSign {
    Positive,
    Negative,
}

/// Outward unit normal at vertex `i` of a closed polyline with the given orientation.
fn outward_normal(c: &CurveComponent, i: usize, ccw: bool) -> Point {
    let n = c.len() - 1;
    let prev = c.vertices[(i + n - 1) % n];
    let next = c.vertices[(i + 1) % n];
    let d = next - prev;
    let nrm = if ccw {
        Point::new(d.y, -d.x)
    } else {
        Point::new(-d.y, d.x)
    };
    let l = nrm.norm();
    if l == 0.0 {
        nrm
    } else {
        nrm * (1.0 / l)
    }
}

/// `c`-positive when the side toward the unbounded component carries +1.
pub fn classify_loop_sign(c: &CurveComponent, col: &Coloring) -> Result<LoopSign> {
    if !c.closed || c.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "component {} is not a closed loop",
            c.id
        )));
    }
    let ccw = signed_area(&c.vertices[..c.len() - 1]) > 0.0;
    let h = col.grid.spacing();
    let n = c.len() - 1;
    let samples = 8.min(n);
    let mut outside: Option<i8> = None;
    for s in 0..samples {
        let i = s * n / samples;
        let y = c.vertices[i];
        let nrm = outward_normal(c, i, ccw);
        let mut got = None;
        for delta in [2.0 * h, 0.5 * h, h / 8.0, h / 64.0] {
            let po = y + nrm * delta;
            let pi = y - nrm * delta;
            if !col.domain.contains(po) || !col.domain.contains(pi) {
                continue;
            }
            let (Ok(a), Ok(b)) = (col.color_at(po), col.color_at(pi)) else {
                continue;
            };
            if a != b {
                got = Some(a);
                break;
            }
        }
        let Some(a) = got else { continue };
        match outside {
            None => outside = Some(a),
            Some(o) if o != a => {
                return Err(Error::DegenerateConfiguration(format!(
                    "loop {} has inconsistent side colors",
                    c.id
                )))
            }
            _ => {}
        }
    }
    match outside {
        Some(1) => Ok(LoopSign::Positive),
        Some(_) => Ok(LoopSign::Negative),
        None => Err(Error::DegenerateConfiguration(format!(
            "loop {} has no resolvable side",
            c.id
        ))),
    }
}

/// Vertex form of `G`: among vertices within `tol_x` of the fiber through vertex `i`, the
/// highest one at or above it (positive loops) or the lowest at or below it (negative).
/// Returns the point and whether it fell back to the vertex itself.
pub fn g_map(i: usize, c: &CurveComponent, sign: LoopSign, tol_x: f64) -> (Point, bool) {
    let x = c.vertices[i];
    let mut best = x;
    let mut found = false;
    for &v in &c.vertices {
        if (v.x - x.x).abs() > tol_x || v == x {
            continue;
        }
        match sign {
            LoopSign::Positive if v.y >= x.y && v.y > best.y => {
                best = v;
                found = true;
            }
            LoopSign::Negative if v.y <= x.y && v.y < best.y => {
                best = v;
                found = true;
            }
            _ => {}
        }
    }
    (best, !found)
}

/// A point on a component: segment index and parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePos {
    pub seg: usize,
    pub t: f64,
}

/// Crossings of the vertical line `p₁ = x` with the polyline, one per segment under the
/// half-open rule `min ≤ x < max`, as `(position, p₂)`.
pub fn fiber_crossings(c: &CurveComponent, x: f64) -> Vec<(CurvePos, f64)> {
    let mut out = Vec::new();
    for (k, w) in c.vertices.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
        if !(lo.x <= x && x < hi.x) {
            continue;
        }
        let t = (x - a.x) / (b.x - a.x);
        out.push((CurvePos { seg: k, t }, a.y + t * (b.y - a.y)));
    }
    out
}

/// Exact-fiber `G`: the highest (positive) or lowest (negative) crossing of the loop with
/// the vertical line through `from`.
pub fn fiber_extreme(c: &CurveComponent, from: Point, sign: LoopSign) -> Option<(CurvePos, Point)> {
    let cr = fiber_crossings(c, from.x);
    let pick = match sign {
        LoopSign::Positive => cr.into_iter().max_by(|a, b| a.1.total_cmp(&b.1)),
        LoopSign::Negative => cr.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)),
    }?;
    Some((pick.0, Point::new(from.x, pick.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(c: Point, r: f64, n: usize, id: usize) -> CurveComponent {
        let pts: Vec<Point> = (0..=n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k % n) as f64 / n as f64 + 0.0137;
                Point::new(c.x + r * t.cos(), c.y + r * t.sin())
            })
            .collect();
        CurveComponent::new(id, pts, true, vec![0.0; n + 1], vec![0.0; n + 1])
    }

    pub(crate) fn slice_of(loops: Vec<CurveComponent>) -> LevelSlice {
        LevelSlice {
            z: 0.1,
            regular: true,
            min_grad_fx2_on_curve: 1.0,
            snapped_nodes: 0,
            eps_zero: 0.0,
            loops,
            arcs: vec![],
        }
    }

    #[test]
    fn parity_trivial_and_jordan() {
        let s = slice_of(vec![circle(Point::new(0.0, 0.0), 0.5, 200, 0)]);
        let out = Point::new(0.8, 0.1);
        assert_eq!(crossing_parity(&s, out, out).unwrap(), 0);
        assert_eq!(crossing_parity(&s, out, Point::new(0.1, 0.05)).unwrap(), 1);
    }

    #[test]
    fn coloring_one_loop_and_sign() {
        // Hand oracle: x* outside a circle, parity 0. The outside has even crossing number,
        // so color +1 outside and −1 inside; the outward side is +1, hence c-positive.
        let k = Domain::disk(Point::new(0.0, 0.0), 1.0).unwrap();
        let g = Grid::square(k, 129).unwrap();
        let s = slice_of(vec![circle(Point::new(0.0, 0.0), 0.5, 300, 0)]);
        let xs = Point::new(0.0, 0.8);
        let col = build_coloring(&s, &k, &g, xs, 0).unwrap();
        assert_eq!(col.color_at(xs).unwrap(), 1);
        assert_eq!(col.color_at(Point::new(0.05, 0.02)).unwrap(), -1);
        assert_eq!(
            classify_loop_sign(&s.loops[0], &col).unwrap(),
            LoopSign::Positive
        );
        let col1 = build_coloring(&s, &k, &g, xs, 1).unwrap();
        assert_eq!(col1.color_at(xs).unwrap(), -1);
        assert_eq!(
            classify_loop_sign(&s.loops[0], &col1).unwrap(),
            LoopSign::Negative
        );
    }

    #[test]
    fn base_point_on_curve_is_rejected() {
        let k = Domain::disk(Point::new(0.0, 0.0), 1.0).unwrap();
        let g = Grid::square(k, 129).unwrap();
        let s = slice_of(vec![circle(Point::new(0.0, 0.0), 0.5, 300, 0)]);
        let on = s.loops[0].vertices[17];
        assert!(matches!(
            build_coloring(&s, &k, &g, on, 0),
            Err(Error::InvalidBasePoint(_))
        ));
    }

    #[test]
    fn g_on_circle() {
        let c = circle(Point::new(0.0, 0.0), 1.0, 360, 0);
        let bottom = (0..c.len())
            .min_by(|&a, &b| c.vertices[a].y.total_cmp(&c.vertices[b].y))
            .unwrap();
        let top = (0..c.len())
            .max_by(|&a, &b| c.vertices[a].y.total_cmp(&c.vertices[b].y))
            .unwrap();
        let tol = 2.0 * std::f64::consts::TAU / 360.0;
        let (p, fb) = g_map(bottom, &c, LoopSign::Positive, tol);
        assert!(!fb && (p.y - c.vertices[top].y).abs() < 1e-3);
        let (p, fb) = g_map(top, &c, LoopSign::Positive, tol);
        assert!(fb && p == c.vertices[top]);
    }
}
