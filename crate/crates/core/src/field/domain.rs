use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::Point;

/// The compact set `K`, a closed disk or an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Disk { center: Point, radius: f64 },
    Rect { lo: Point, hi: Point },
}

impl Domain {
    pub fn disk(center: Point, radius: f64) -> Result<Domain> {
        let d = Domain::Disk { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn rect(lo: Point, hi: Point) -> Result<Domain> {
        let d = Domain::Rect { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Disk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
                    return Err(invalid(format!(
                        "disk radius must be positive, got {radius}"
                    )));
                }
            }
            Domain::Rect { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && hi.x > lo.x && hi.y > lo.y) {
                    return Err(invalid("rect needs lo < hi in both coordinates"));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Domain::Disk { center, radius } => {
                let d = p - center;
                d.dot(d) <= radius * radius
            }
            Domain::Rect { lo, hi } => p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y,
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Domain::Disk { center, .. } => center,
            Domain::Rect { lo, hi } => lo.lerp(hi, 0.5),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::Rect { lo, hi } => hi.dist(lo),
        }
    }

    /// Smallest axis-aligned box containing the domain.
    pub fn bbox(&self) -> (Point, Point) {
        match *self {
            Domain::Disk { center, radius } => (
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ),
            Domain::Rect { lo, hi } => (lo, hi),
        }
    }

    /// `n` points on `∂K`. Rectangles always include their four corners.
    pub fn boundary_samples(&self, n: usize) -> Vec<Point> {
        match *self {
            Domain::Disk { center, radius } => (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
                })
                .collect(),
            Domain::Rect { lo, hi } => {
                let corners = [lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];
                let n = n.max(4);
                let w = hi.x - lo.x;
                let h = hi.y - lo.y;
                let per = 2.0 * (w + h);
                let mut out = Vec::with_capacity(n);
                let mut used = 0;
                for e in 0..4 {
                    let len = if e % 2 == 0 { w } else { h };
                    let k = if e == 3 {
                        n - used
                    } else {
                        ((n as f64 * len / per).round() as usize).max(1)
                    };
                    used += k;
                    let (a, b) = (corners[e], corners[(e + 1) % 4]);
                    for s in 0..k {
                        out.push(a.lerp(b, s as f64 / k as f64));
                    }
                }
                out.truncate(n);
                out
            }
        }
    }

    /// Euclidean distance from `p` to `∂K`.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        match *self {
            Domain::Disk { center, radius } => (p.dist(center) - radius).abs(),
            Domain::Rect { lo, hi } => {
                if self.contains(p) {
                    (p.x - lo.x).min(hi.x - p.x).min(p.y - lo.y).min(hi.y - p.y)
                } else {
                    let dx = (lo.x - p.x).max(p.x - hi.x).max(0.0);
                    let dy = (lo.y - p.y).max(p.y - hi.y).max(0.0);
                    dx.hypot(dy)
                }
            }
        }
    }

    /// The vertical chord `{y : (x, y) ∈ K}`, if nonempty.
    pub fn fiber_interval(&self, x: f64) -> Option<(f64, f64)> {
        match *self {
            Domain::Disk { center, radius } => {
                let dx = x - center.x;
                let r2 = radius * radius - dx * dx;
                (r2 >= 0.0).then(|| {
                    let s = r2.sqrt();
                    (center.y - s, center.y + s)
                })
            }
            Domain::Rect { lo, hi } => (x >= lo.x && x <= hi.x).then_some((lo.y, hi.y)),
        }
    }

    /// Parameter `t ∈ [0, 1]` where the segment from `a` (inside) to `b` first leaves `K`.
    pub fn exit_parameter(&self, a: Point, b: Point) -> f64 {
        let d = b - a;
        match *self {
            Domain::Disk { center, radius } => {
                let w = a - center;
                let qa = d.dot(d);
                if qa == 0.0 {
                    return 0.0;
                }
                let qb = 2.0 * w.dot(d);
                let qc = w.dot(w) - radius * radius;
                let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
                ((-qb + disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0)
            }
            Domain::Rect { lo, hi } => {
                let mut t = 1.0f64;
                for (p, dp, l, h) in [(a.x, d.x, lo.x, hi.x), (a.y, d.y, lo.y, hi.y)] {
                    if dp > 0.0 {
                        t = t.min((h - p) / dp);
                    } else if dp < 0.0 {
                        t = t.min((l - p) / dp);
                    }
                }
                t.clamp(0.0, 1.0)
            }
        }
    }

    /// The point where the segment from `a` (inside) to `b` leaves `K`.
    pub fn segment_exit(&self, a: Point, b: Point) -> Point {
        a.lerp(b, self.exit_parameter(a, b))
    }

    pub fn translated(&self, offset: Point) -> Domain {
        match *self {
            Domain::Disk { center, radius } => Domain::Disk {
                center: center + offset,
                radius,
            },
            Domain::Rect { lo, hi } => Domain::Rect {
                lo: lo + offset,
                hi: hi + offset,
            },
        }
    }

    /// Whether `self ⊆ other`.
    pub fn is_inside(&self, other: &Domain) -> bool {
        match (*self, *other) {
            (
                Domain::Disk { center, radius },
                Domain::Disk {
                    center: c2,
                    radius: r2,
                },
            ) => center.dist(c2) + radius <= r2 * (1.0 + 1e-12),
            (Domain::Disk { .. }, Domain::Rect { lo, hi })
            | (Domain::Rect { .. }, Domain::Rect { lo, hi }) => {
                let (a, b) = self.bbox();
                a.x >= lo.x && a.y >= lo.y && b.x <= hi.x && b.y <= hi.y
            }
            (Domain::Rect { lo, hi }, Domain::Disk { .. }) => {
                [lo, hi, Point::new(lo.x, hi.y), Point::new(hi.x, lo.y)]
                    .iter()
                    .all(|&p| other.contains(p))
            }
        }
    }
}

/// A uniform node grid over the bounding box of a domain. The last node in each direction
/// is the box corner exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
    pub lo: Point,
    pub hi: Point,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(domain: Domain, nx: usize, ny: usize) -> Result<Grid> {
        if nx < 2 || ny < 2 {
            return Err(invalid(format!(
                "grid needs at least 2 nodes per axis, got {nx}x{ny}"
            )));
        }
        domain.validate()?;
        let (lo, hi) = domain.bbox();
        Ok(Grid {
            domain,
            nx,
            ny,
            lo,
            hi,
            hx: (hi.x - lo.x) / (nx - 1) as f64,
            hy: (hi.y - lo.y) / (ny - 1) as f64,
        })
    }

    pub fn square(domain: Domain, n: usize) -> Result<Grid> {
        Grid::new(domain, n, n)
    }

    pub fn xs(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.hi.x
        } else {
            self.lo.x + i as f64 * self.hx
        }
    }

    pub fn ys(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.hi.y
        } else {
            self.lo.y + j as f64 * self.hy
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.xs(i), self.ys(j))
    }

    /// The larger of the two spacings.
    pub fn spacing(&self) -> f64 {
        self.hx.max(self.hy)
    }

    /// Cell `(i, j)` (lower-left node indices) containing `p`, if `p` lies in the box.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let fx = (p.x - self.lo.x) / self.hx;
        let fy = (p.y - self.lo.y) / self.hy;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (self.nx - 1) as f64 && fy <= (self.ny - 1) as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        Some((i, j))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        self.node(i, j).lerp(self.node(i + 1, j + 1), 0.5)
    }
}
