use serde::{Deserialize, Serialize};

use crate::geom::{interval_union_length, Point};

/// One polyline component of a slice. Closed components repeat their first vertex at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveComponent {
    pub id: usize,
    pub vertices: Vec<Point>,
    pub closed: bool,
    pub endpoints_on_boundary: bool,
    pub arclengths: Vec<f64>,
    pub samples_fx1: Vec<f64>,
    pub samples_sz: Vec<f64>,
}

impl CurveComponent {
    /// Builds a component from its vertices and samples; arclengths are derived.
    pub fn new(
        id: usize,
        vertices: Vec<Point>,
        closed: bool,
        samples_fx1: Vec<f64>,
        samples_sz: Vec<f64>,
    ) -> Self {
        CurveComponent {
            id,
            arclengths: cumulative_lengths(&vertices),
            vertices,
            closed,
            endpoints_on_boundary: !closed,
            samples_fx1,
            samples_sz,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_arc(&self) -> bool {
        !self.closed
    }

    pub fn length(&self) -> f64 {
        self.arclengths.last().copied().unwrap_or(0.0)
    }

    /// The point at parameter `t ∈ [0, 1]` of segment `k`.
    pub fn point_on_segment(&self, k: usize, t: f64) -> Point {
        self.vertices[k].lerp(self.vertices[k + 1], t)
    }

    /// `H¹(p₁(C))`: the length of the union of the projected segments.
    pub fn projection_measure(&self) -> f64 {
        let mut iv: Vec<(f64, f64)> = self.vertices.windows(2).map(|w| (w[0].x, w[1].x)).collect();
        interval_union_length(&mut iv)
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> CurveComponent {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut fx1 = self.samples_fx1.clone();
        fx1.reverse();
        let mut sz = self.samples_sz.clone();
        sz.reverse();
        CurveComponent {
            id: self.id,
            arclengths: cumulative_lengths(&vertices),
            vertices,
            closed: self.closed,
            endpoints_on_boundary: self.endpoints_on_boundary,
            samples_fx1: fx1,
            samples_sz: sz,
        }
    }

    /// Negates the per-vertex samples, as for the field `−f` at level `−z`.
    pub fn negated(&self) -> CurveComponent {
        CurveComponent {
            samples_fx1: self.samples_fx1.iter().map(|v| -v).collect(),
            samples_sz: self.samples_sz.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }
}

pub(crate) fn cumulative_lengths(v: &[Point]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for (k, p) in v.iter().enumerate() {
        if k > 0 {
            acc += p.dist(v[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Discrete total variation of `f_{x₁}` along the component.
pub fn total_variation_along(c: &CurveComponent) -> f64 {
    c.samples_fx1.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldKind {
    Fold,
    BoundaryTerminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldingPoint {
    pub index: usize,
    pub kind: FoldKind,
}

/// Vertices where the `p₁` increments reverse sign. A run of zero increments collapses to
/// the vertex where it starts.
pub fn find_folding_points(c: &CurveComponent) -> Vec<FoldingPoint> {
    let v = &c.vertices;
    let scale = v.iter().fold(0.0f64, |m, p| m.max(p.x.abs())).max(1.0);
    let tiny = 1e-13 * scale;
    let mut out = Vec::new();
    let mut last: Option<(f64, usize)> = None;
    for k in 0..v.len().saturating_sub(1) {
        let d = v[k + 1].x - v[k].x;
        if d.abs() <= tiny {
            continue;
        }
        let s = d.signum();
        if let Some((ls, lk)) = last {
            if ls != s {
                out.push(FoldingPoint {
                    index: lk + 1,
                    kind: FoldKind::Fold,
                });
            }
        }
        last = Some((s, k));
    }
    out
}

/// `Ĝ` at vertex `i`: the earliest vertex (in parameter order) sharing `p₁` with vertex `i`,
/// found from the first sign change of `p₁ − p₁(vᵢ)` and snapped to the nearer endpoint of
/// that segment, capped at `i`.
pub fn ghat(c: &CurveComponent, i: usize) -> usize {
    let xs: Vec<f64> = c.vertices.iter().map(|p| p.x).collect();
    let (pmin, pmax) = prefix_ranges(&xs);
    ghat_with(&xs, &pmin, &pmax, i)
}

/// `Ĝ` for every vertex at once.
pub fn ghat_all(c: &CurveComponent) -> Vec<usize> {
    let xs: Vec<f64> = c.vertices.iter().map(|p| p.x).collect();
    let (pmin, pmax) = prefix_ranges(&xs);
    (0..xs.len())
        .map(|i| ghat_with(&xs, &pmin, &pmax, i))
        .collect()
}

fn prefix_ranges(xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = Vec::with_capacity(xs.len());
    let mut hi = Vec::with_capacity(xs.len());
    let (mut l, mut h) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in xs {
        l = l.min(x);
        h = h.max(x);
        lo.push(l);
        hi.push(h);
    }
    (lo, hi)
}

fn ghat_with(xs: &[f64], pmin: &[f64], pmax: &[f64], i: usize) -> usize {
    if i == 0 || xs.len() < 2 {
        return 0;
    }
    let x = xs[i];
    // Smallest m ≥ 1 with x inside the range of vertices 0..=m; the crossing segment is m−1.
    let (mut lo, mut hi) = (1usize, i);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pmin[mid] <= x && x <= pmax[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo - 1;
    let (a, b) = (xs[k], xs[k + 1]);
    let t = if b != a { (x - a) / (b - a) } else { 0.0 };
    let snapped = if t < 0.5 { k } else { k + 1 };
    snapped.min(i)
}

/// `Ĥ` at vertex `i`: the last fold strictly before `i`, or the start of the arc.
pub fn hhat(_c: &CurveComponent, i: usize, folds: &[FoldingPoint]) -> usize {
    folds
        .iter()
        .filter(|f| f.kind == FoldKind::Fold && f.index < i)
        .map(|f| f.index)
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_from(pts: Vec<Point>, closed: bool) -> CurveComponent {
        let n = pts.len();
        let fx1 = pts.iter().map(|p| p.x).collect();
        CurveComponent::new(0, pts, closed, fx1, vec![0.0; n])
    }

    #[test]
    fn parabola_has_one_fold_at_apex() {
        let pts: Vec<Point> = (-50..=50)
            .map(|k| {
                let y = k as f64 / 50.0 + 0.003;
                Point::new(y * y, y)
            })
            .collect();
        let c = curve_from(pts, false);
        let folds = find_folding_points(&c);
        assert_eq!(folds.len(), 1);
        let apex = (0..c.len())
            .min_by(|&a, &b| c.vertices[a].x.total_cmp(&c.vertices[b].x))
            .unwrap();
        assert_eq!(folds[0].index, apex);
    }

    #[test]
    fn cubic_has_no_fold() {
        let pts: Vec<Point> = (-50..=50)
            .map(|k| {
                let y = k as f64 / 50.0;
                Point::new(y * y * y, y)
            })
            .collect();
        assert!(find_folding_points(&curve_from(pts, false)).is_empty());
    }

    #[test]
    fn ghat_monotone_is_identity_and_hhat_basics() {
        let pts: Vec<Point> = (0..20)
            .map(|k| Point::new(k as f64, (k as f64).sin()))
            .collect();
        let c = curve_from(pts, false);
        assert_eq!(ghat_all(&c), (0..20).collect::<Vec<_>>());
        assert_eq!(hhat(&c, 10, &[]), 0);
        let f = [FoldingPoint {
            index: 4,
            kind: FoldKind::Fold,
        }];
        assert_eq!(hhat(&c, 10, &f), 4);
        assert_eq!(hhat(&c, 3, &f), 0);
    }

    #[test]
    fn tv_of_p1_on_circle() {
        let n = 1000;
        let pts: Vec<Point> = (0..=n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                Point::new(t.cos(), t.sin())
            })
            .collect();
        let c = curve_from(pts, true);
        assert!((total_variation_along(&c) - 4.0).abs() < 0.04);
        assert!((c.projection_measure() - 2.0).abs() < 1e-12);
    }
}
