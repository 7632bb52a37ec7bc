//! Admissible paths from `∂K` to a base point, built backwards from the base point by
//! vertical first-hit rays and jumps along the components of `Σ`.

use serde::{Deserialize, Serialize};

use super::{classify_loop_sign, fiber_crossings, fiber_extreme, Coloring, CurvePos, LoopSign};
use crate::error::{Error, Result};
use crate::field::Domain;
use crate::geom::Point;
use crate::levelset::{component_budgets, BudgetKind, CurveComponent, LevelSlice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Vertical, moving down through color +1.
    VertDown,
    /// Vertical, moving up through color −1.
    VertUp,
    /// Along a loop from `G(x)` to `x`.
    LoopArc,
    /// Along an arc from `Ĝ(x)` to `x`.
    GhatArc,
    /// Along an arc from its boundary endpoint `q` to `x`, past a zero of `F`.
    BoundaryArc,
    /// Along an arc from `Ĥ(x)` to `x`, with `F·p₁′ ≤ 0`.
    HhatArc,
}

impl SegmentKind {
    pub fn is_vertical(self) -> bool {
        matches!(self, SegmentKind::VertDown | SegmentKind::VertUp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub kind: SegmentKind,
    pub start: Point,
    pub end: Point,
    pub component_id: Option<usize>,
    /// Polyline from `start` to `end` (just the two endpoints for vertical segments).
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePath {
    pub segments: Vec<PathSegment>,
    pub start_point: Point,
    pub end_point: Point,
    /// Recursion cases fired while building, in construction order (3 loop jump, 4 `Ĝ`,
    /// 5 boundary arc, 6 `Ĥ` walk).
    pub cases: Vec<u8>,
    /// Number of base-point jitters needed.
    pub retries: usize,
}

impl AdmissiblePath {
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }
}

enum Target {
    Boundary,
    Curve(usize, CurvePos),
}

struct Ctx<'a> {
    s: &'a LevelSlice,
    col: &'a Coloring,
    k: &'a Domain,
    f: Option<&'a [Vec<f64>]>,
    eps: f64,
    h: f64,
    signs: Vec<Option<LoopSign>>,
    q_pref: Vec<Option<usize>>,
}

fn point_at(c: &CurveComponent, p: CurvePos) -> Point {
    c.point_on_segment(p.seg, p.t)
}

fn vertex_pos(c: &CurveComponent, m: usize) -> CurvePos {
    if m + 1 >= c.len() {
        CurvePos {
            seg: c.len() - 2,
            t: 1.0,
        }
    } else {
        CurvePos { seg: m, t: 0.0 }
    }
}

fn param(p: CurvePos) -> f64 {
    p.seg as f64 + p.t
}

/// Points from `a` forward to `b` (wrapping on closed curves).
fn forward_points(c: &CurveComponent, a: CurvePos, b: CurvePos) -> Vec<Point> {
    let mut out = vec![point_at(c, a)];
    let m = c.len() - 1;
    if !(a.seg == b.seg && a.t <= b.t) {
        let mut j = (a.seg + 1) % m.max(1);
        if !c.closed {
            j = a.seg + 1;
        }
        loop {
            out.push(c.vertices[j]);
            if j == b.seg {
                break;
            }
            j += 1;
            if c.closed {
                j %= m;
            } else if j > b.seg {
                break;
            }
        }
    }
    out.push(point_at(c, b));
    out.dedup();
    out
}

fn polyline_length(p: &[Point]) -> f64 {
    p.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// [`sub_arc_raw`] with its end vertices replaced by the exact segment endpoints.
fn sub_arc(c: &CurveComponent, a: CurvePos, b: CurvePos, start: Point, end: Point) -> Vec<Point> {
    let mut p = sub_arc_raw(c, a, b);
    if let Some(f) = p.first_mut() {
        *f = start;
    }
    if p.len() == 1 {
        p.push(end);
    } else if let Some(l) = p.last_mut() {
        *l = end;
    }
    p
}

/// The sub-arc from `a` to `b`: the only one on an arc, the shorter one on a loop.
fn sub_arc_raw(c: &CurveComponent, a: CurvePos, b: CurvePos) -> Vec<Point> {
    if c.closed {
        let f = forward_points(c, a, b);
        let mut r = forward_points(c, b, a);
        r.reverse();
        if polyline_length(&f) <= polyline_length(&r) {
            f
        } else {
            r
        }
    } else if param(a) <= param(b) {
        forward_points(c, a, b)
    } else {
        let mut r = forward_points(c, b, a);
        r.reverse();
        r
    }
}

impl<'a> Ctx<'a> {
    fn new(
        s: &'a LevelSlice,
        col: &'a Coloring,
        k: &'a Domain,
        f: Option<&'a [Vec<f64>]>,
    ) -> Ctx<'a> {
        let n = s.component_count();
        let mut q_pref = vec![None; n];
        if f.is_some() {
            for b in component_budgets(s, 2.0 * col.grid.spacing()) {
                if b.kind == BudgetKind::ArcVanishing {
                    q_pref[b.id] = b.q_index;
                }
            }
        }
        Ctx {
            s,
            col,
            k,
            f,
            eps: 1e-9 * k.diameter().max(1.0),
            h: col.grid.spacing(),
            signs: vec![None; n],
            q_pref,
        }
    }

    fn ray(&self, p: Point, dir: f64) -> (Point, Target) {
        let bd = match self.k.fiber_interval(p.x) {
            Some((lo, hi)) => (if dir > 0.0 { hi - p.y } else { p.y - lo }).max(0.0),
            None => 0.0,
        };
        let mut best = bd;
        let mut target = Target::Boundary;
        for c in self.s.components() {
            for (pos, y) in fiber_crossings(c, p.x) {
                let d = (y - p.y) * dir;
                if d > self.eps && d < best {
                    best = d;
                    target = Target::Curve(c.id, pos);
                }
            }
        }
        (Point::new(p.x, p.y + dir * best), target)
    }

    /// Color just beyond `p` in direction `dir`, probing no farther than half the distance
    /// to the next crossing.
    fn probe(&self, p: Point, dir: f64) -> Result<i8> {
        let (hit, _) = self.ray(p, dir);
        let gap = (hit.y - p.y).abs();
        if gap <= self.eps {
            return Err(Error::DegenerateConfiguration(format!(
                "no room to probe at {p:?}"
            )));
        }
        let d = (0.25 * self.h).min(0.5 * gap);
        self.col.color_at(Point::new(p.x, p.y + dir * d))
    }

    fn loop_sign(&mut self, id: usize) -> Result<LoopSign> {
        if let Some(s) = self.signs[id] {
            return Ok(s);
        }
        let c = self.s.component(id).expect("component id");
        let sign = classify_loop_sign(c, self.col)?;
        self.signs[id] = Some(sign);
        Ok(sign)
    }

    fn build(&mut self, x_star: Point) -> Result<(Vec<PathSegment>, Vec<u8>)> {
        let guard = 10 * self.s.component_count() + 10;
        let mut rev: Vec<PathSegment> = Vec::new();
        let mut cases = Vec::new();
        let mut visited: Vec<usize> = Vec::new();
        let mut cur = x_star;
        let mut dir = if self.col.color_at(x_star)? > 0 {
            1.0
        } else {
            -1.0
        };
        loop {
            if rev.len() > guard {
                return Err(Error::ConstructionFailure(format!(
                    "no boundary reached after {} segments",
                    rev.len()
                )));
            }
            let (hit, target) = self.ray(cur, dir);
            rev.push(PathSegment {
                kind: if dir > 0.0 {
                    SegmentKind::VertDown
                } else {
                    SegmentKind::VertUp
                },
                start: hit,
                end: cur,
                component_id: None,
                points: vec![hit, cur],
            });
            let (id, pos) = match target {
                Target::Boundary => break,
                Target::Curve(id, pos) => (id, pos),
            };
            if visited.contains(&id) {
                return Err(Error::ConstructionFailure(format!(
                    "ray returned to component {id}"
                )));
            }
            visited.push(id);
            let c = self.s.component(id).expect("component id");
            if c.closed {
                let sign = self.loop_sign(id)?;
                let (gpos, gpt) = fiber_extreme(c, hit, sign).ok_or_else(|| {
                    Error::ConstructionFailure("empty fiber on a hit loop".into())
                })?;
                if gpt.dist(hit) <= self.eps {
                    return Err(Error::ConstructionFailure(format!(
                        "vertical tangency on loop {id}"
                    )));
                }
                rev.push(PathSegment {
                    kind: SegmentKind::LoopArc,
                    start: gpt,
                    end: hit,
                    component_id: Some(id),
                    points: sub_arc(c, gpos, pos, gpt, hit),
                });
                cases.push(3);
                cur = gpt;
                dir = if sign == LoopSign::Positive {
                    1.0
                } else {
                    -1.0
                };
                continue;
            }
            match self.arc_walk(id, hit, pos, &mut rev, &mut cases, guard)? {
                Some((p, d)) => {
                    cur = p;
                    dir = d;
                }
                None => break,
            }
        }
        rev.reverse();
        Ok((rev, cases))
    }
}

impl Ctx<'_> {
    /// A vertical direction from `p` admissible for the adjacent region that does not run
    /// back into arc `id`.
    fn leave_arc(&self, p: Point, id: usize) -> Option<f64> {
        let up = self.probe(p, 1.0).is_ok_and(|v| v > 0);
        let down = self.probe(p, -1.0).is_ok_and(|v| v < 0);
        [(up, 1.0), (down, -1.0)]
            .into_iter()
            .filter(|&(ok, _)| ok)
            .map(|(_, d)| d)
            .find(|&d| !matches!(self.ray(p, d).1, Target::Curve(j, _) if j == id))
    }

    /// Arc cases from the hit `x` at `pos`: a boundary arc when `F` vanishes (finishing the
    /// path), otherwise `Ĥ` walks and `Ĝ` jumps until a vertical ray can leave the arc.
    /// Returns the point and direction of that ray, or `None` once `∂K` is reached.
    fn arc_walk(
        &self,
        id: usize,
        x: Point,
        pos: CurvePos,
        rev: &mut Vec<PathSegment>,
        cases: &mut Vec<u8>,
        guard: usize,
    ) -> Result<Option<(Point, f64)>> {
        let c = self.s.component(id).expect("component id");
        let f = self.f.ok_or_else(|| {
            Error::WrongCase(format!(
                "component {id} meets the boundary; use the boundary construction"
            ))
        })?;
        let fv = &f[id];
        let zeros = zero_positions(fv, self.s.eps_zero);
        if !zeros.is_empty() {
            let hp = param(pos);
            let last = c.len() - 1;
            let ok0 = zeros.iter().any(|&z| z <= hp);
            let ok1 = zeros.iter().any(|&z| z >= hp);
            let q = match self.q_pref[id] {
                Some(q) if (q == 0 && ok0) || (q == last && ok1) => q,
                _ if ok0 => 0,
                _ => last,
            };
            rev.push(PathSegment {
                kind: SegmentKind::BoundaryArc,
                start: c.vertices[q],
                end: x,
                component_id: Some(id),
                points: sub_arc(c, vertex_pos(c, q), pos, c.vertices[q], x),
            });
            cases.push(5);
            return Ok(None);
        }
        let (mut x, mut pos) = (x, pos);
        while rev.len() <= guard {
            let (m, at_end) = hhat_walk(c, pos, fv);
            let mpos = vertex_pos(c, m);
            let y = c.vertices[m];
            rev.push(PathSegment {
                kind: SegmentKind::HhatArc,
                start: y,
                end: x,
                component_id: Some(id),
                points: sub_arc(c, mpos, pos, y, x),
            });
            cases.push(6);
            if at_end {
                return Ok(None);
            }
            if let Some(d) = self.leave_arc(y, id) {
                return Ok(Some((y, d)));
            }
            let cands = ghat_candidates(c, y, m, self.eps);
            let Some(&first) = cands.first() else {
                return Err(Error::ConstructionFailure(format!(
                    "fold on arc {id} has an empty fiber"
                )));
            };
            let (tpos, exit) = cands
                .iter()
                .find_map(|&t| self.leave_arc(point_at(c, t), id).map(|d| (t, Some(d))))
                .unwrap_or((first, None));
            let tp = point_at(c, tpos);
            rev.push(PathSegment {
                kind: SegmentKind::GhatArc,
                start: tp,
                end: y,
                component_id: Some(id),
                points: sub_arc(c, tpos, mpos, tp, y),
            });
            cases.push(4);
            if let Some(d) = exit {
                return Ok(Some((tp, d)));
            }
            x = tp;
            pos = tpos;
        }
        Err(Error::ConstructionFailure(format!(
            "no exit from arc {id} after {} segments",
            rev.len()
        )))
    }
}

/// Fractional vertex positions where the samples vanish or change sign.
fn zero_positions(f: &[f64], eps_zero: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..f.len() {
        if f[k].abs() < eps_zero {
            out.push(k as f64);
        } else if k + 1 < f.len() && f[k] * f[k + 1] < 0.0 && f[k + 1].abs() >= eps_zero {
            out.push(k as f64 + f[k] / (f[k] - f[k + 1]));
        }
    }
    out
}

/// Walks from `pos` in the direction where `p₁` moves with the sign of `F`, up to the first
/// reversal of `p₁` (a fold) or the end of the arc. Returns the vertex and whether it is an
/// endpoint.
fn hhat_walk(c: &CurveComponent, pos: CurvePos, f: &[f64]) -> (usize, bool) {
    let v = &c.vertices;
    let n = v.len();
    let s_f = f[pos.seg].signum();
    let dx = v[pos.seg + 1].x - v[pos.seg].x;
    let scale = v.iter().fold(1.0f64, |m, p| m.max(p.x.abs()));
    let tiny = 1e-13 * scale;
    let forward = dx.signum() == s_f;
    let step_sign = if forward { dx.signum() } else { -dx.signum() };
    if forward {
        let mut m = pos.seg + 1;
        let mut run_start = None;
        while m + 1 < n {
            let d = v[m + 1].x - v[m].x;
            if d.abs() <= tiny {
                run_start.get_or_insert(m);
            } else if d.signum() != step_sign {
                return (run_start.unwrap_or(m), false);
            } else {
                run_start = None;
            }
            m += 1;
        }
        (n - 1, true)
    } else {
        let mut m = pos.seg;
        let mut run_start = None;
        while m > 0 {
            let d = v[m - 1].x - v[m].x;
            if d.abs() <= tiny {
                run_start.get_or_insert(m);
            } else if d.signum() != step_sign {
                return (run_start.unwrap_or(m), false);
            } else {
                run_start = None;
            }
            m -= 1;
        }
        (0, true)
    }
}

/// Candidate `Ĝ` targets for the fold vertex `m`: the earliest crossing of its fiber in each
/// orientation, then the fiber extremes.
fn ghat_candidates(c: &CurveComponent, y: Point, m: usize, eps: f64) -> Vec<CurvePos> {
    let cr: Vec<(CurvePos, f64)> = fiber_crossings(c, y.x)
        .into_iter()
        .filter(|(_, py)| (py - y.y).abs() > eps)
        .collect();
    let mut out: Vec<CurvePos> = Vec::new();
    let mut add = |p: Option<CurvePos>| {
        if let Some(p) = p {
            if !out.iter().any(|q| q.seg == p.seg && q.t == p.t) {
                out.push(p);
            }
        }
    };
    let mf = m as f64;
    add(cr
        .iter()
        .filter(|(p, _)| param(*p) < mf)
        .map(|x| x.0)
        .min_by(|a, b| param(*a).total_cmp(&param(*b))));
    add(cr
        .iter()
        .filter(|(p, _)| param(*p) > mf)
        .map(|x| x.0)
        .max_by(|a, b| param(*a).total_cmp(&param(*b))));
    add(cr.iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|x| x.0));
    add(cr.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|x| x.0));
    out
}

const MAX_RETRIES: usize = 8;

fn construct(
    s: &LevelSlice,
    col: &Coloring,
    f: Option<&[Vec<f64>]>,
    x_star: Point,
    k: &Domain,
) -> Result<AdmissiblePath> {
    let mut ctx = Ctx::new(s, col, k, f);
    let base_color = col.color_at(x_star)?;
    let mut last_err = None;
    for attempt in 0..=MAX_RETRIES {
        let x = if attempt == 0 {
            x_star
        } else {
            let mag = attempt.div_ceil(2) as f64 * 1e-3 * ctx.h;
            let sgn = if attempt % 2 == 1 { 1.0 } else { -1.0 };
            Point::new(x_star.x + sgn * mag, x_star.y)
        };
        if attempt > 0 && (!col.is_labeled(x) || col.color_at(x)? != base_color) {
            continue;
        }
        match ctx.build(x) {
            Ok((segments, cases)) => {
                let start_point = segments.first().map(|s| s.start).unwrap_or(x);
                return Ok(AdmissiblePath {
                    segments,
                    start_point,
                    end_point: x,
                    cases,
                    retries: attempt,
                });
            }
            Err(e @ (Error::ConstructionFailure(_) | Error::DegenerateConfiguration(_))) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err
        .unwrap_or_else(|| Error::ConstructionFailure("no admissible base point jitter".into())))
}

/// Path for a slice made only of loops.
pub fn construct_path_compact(
    s: &LevelSlice,
    col: &Coloring,
    x_star: Point,
    k: &Domain,
) -> Result<AdmissiblePath> {
    if !s.arcs.is_empty() {
        return Err(Error::WrongCase(format!(
            "slice has {} arcs meeting the boundary",
            s.arcs.len()
        )));
    }
    construct(s, col, None, x_star, k)
}

/// Path for a general slice. `f_values[id]` holds `F` at the vertices of component `id`.
pub fn construct_path_boundary(
    s: &LevelSlice,
    col: &Coloring,
    f_values: &[Vec<f64>],
    x_star: Point,
    k: &Domain,
) -> Result<AdmissiblePath> {
    if f_values.len() != s.component_count() {
        return Err(Error::InvalidInput(
            "F must have one sample list per component".into(),
        ));
    }
    construct(s, col, Some(f_values), x_star, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hhat_walk_stops_at_fold() {
        // a parabola x = (y − 0.5)², traversed bottom to top
        let pts: Vec<Point> = (0..=20)
            .map(|k| {
                let y = k as f64 / 20.0 + 0.013;
                Point::new((y - 0.5) * (y - 0.5), y)
            })
            .collect();
        let n = pts.len();
        let c = CurveComponent::new(0, pts, false, vec![1.0; n], vec![0.0; n]);
        // On the lower branch p₁ decreases; F > 0 walks toward increasing p₁, i.e. back to 0.
        assert_eq!(
            hhat_walk(&c, CurvePos { seg: 3, t: 0.5 }, &vec![1.0; n]),
            (0, true)
        );
        let (m, end) = hhat_walk(&c, CurvePos { seg: 3, t: 0.5 }, &vec![-1.0; n]);
        assert!(!end);
        assert_eq!(m, 10);
    }

    #[test]
    fn sub_arc_on_loop_takes_shorter_way() {
        let n = 40;
        let pts: Vec<Point> = (0..=n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k % n) as f64 / n as f64;
                Point::new(t.cos(), t.sin())
            })
            .collect();
        let c = CurveComponent::new(0, pts, true, vec![0.0; n + 1], vec![0.0; n + 1]);
        let a = CurvePos { seg: 38, t: 0.5 };
        let b = CurvePos { seg: 1, t: 0.5 };
        let p = sub_arc_raw(&c, a, b);
        assert_eq!(p.len(), 5);
        assert!(polyline_length(&p) < 0.5);
    }
}
