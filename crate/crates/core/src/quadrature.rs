//! The scalar quantities on both sides of the main inequalities: `∫_K |det D²f|`,
//! oscillations over `K` and `∂K`, vertical oscillation along a curve, and the Schur
//! complement determinant identity.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Domain, Grid, ScalarField};
use crate::geom::{pairwise_sum, Point};
use crate::levelset::CurveComponent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub resolution: [usize; 2],
    /// The same integral at half resolution, for convergence diagnostics.
    pub richardson_estimate: Option<f64>,
}

const SUB: usize = 4;

/// Midpoint rule for `∫_K |det D²f|`. Cells with all four corners in `K` count fully;
/// cells meeting `∂K` are weighted by a 4×4 sub-stencil restricted to `K`.
pub fn integrate_abs_det_hessian(f: &ScalarField, k: &Domain, g: &Grid) -> Result<IntegralResult> {
    let value = integrate_once(f, k, g)?;
    let half = if g.nx >= 5 && g.ny >= 5 {
        let h = Grid::new(g.domain, (g.nx - 1) / 2 + 1, (g.ny - 1) / 2 + 1)?;
        Some(integrate_once(f, k, &h)?)
    } else {
        None
    };
    Ok(IntegralResult {
        value,
        resolution: [g.nx, g.ny],
        richardson_estimate: half,
    })
}

fn integrate_once(f: &ScalarField, k: &Domain, g: &Grid) -> Result<f64> {
    if g.nx < 2 || g.ny < 2 {
        return Err(invalid("degenerate grid"));
    }
    let rows: Vec<f64> = (0..g.ny - 1)
        .into_par_iter()
        .map(|j| {
            let y0 = g.ys(j);
            let y1 = g.ys(j + 1);
            let mut row = Vec::with_capacity(g.nx - 1);
            for i in 0..g.nx - 1 {
                let x0 = g.xs(i);
                let x1 = g.xs(i + 1);
                let area = (x1 - x0) * (y1 - y0);
                let corners = [
                    Point::new(x0, y0),
                    Point::new(x1, y0),
                    Point::new(x1, y1),
                    Point::new(x0, y1),
                ];
                let inside = corners.iter().filter(|&&c| k.contains(c)).count();
                let c = Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
                if inside == 4 {
                    row.push(f.jet(c).det_hessian().abs() * area);
                    continue;
                }
                // A cell with no corner inside can still meet K only if K reaches past
                // its half-diagonal.
                let half_diag = 0.5 * (x1 - x0).hypot(y1 - y0);
                if inside == 0 && !k.contains(c) && k.distance_to_boundary(c) > half_diag {
                    continue;
                }
                let mut acc = 0.0;
                for b in 0..SUB {
                    for a in 0..SUB {
                        let p = Point::new(
                            x0 + (a as f64 + 0.5) / SUB as f64 * (x1 - x0),
                            y0 + (b as f64 + 0.5) / SUB as f64 * (y1 - y0),
                        );
                        if k.contains(p) {
                            acc += f.jet(p).det_hessian().abs();
                        }
                    }
                }
                row.push(acc * area / (SUB * SUB) as f64);
            }
            pairwise_sum(&row)
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

/// `max − min` of `f` over the sample points.
pub fn oscillation(f: &ScalarField, points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("oscillation over an empty point set"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            let v = f.evaluate(p);
            (lo.min(v), hi.max(v))
        });
    Ok(hi - lo)
}

/// Number of boundary samples used for `Osc_∂K` on a grid.
pub fn boundary_sample_count(g: &Grid) -> usize {
    4 * g.nx.max(g.ny)
}

/// Grid nodes lying in `K`, in row-major order.
pub fn interior_nodes(k: &Domain, g: &Grid) -> Vec<Point> {
    let mut out = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.node(i, j);
            if k.contains(p) {
                out.push(p);
            }
        }
    }
    out
}

/// `Osc_K f` over the grid nodes in `K` together with the boundary samples, so that it is
/// never smaller than [`oscillation_boundary`].
pub fn oscillation_interior(f: &ScalarField, k: &Domain, g: &Grid) -> Result<f64> {
    let mut pts = interior_nodes(k, g);
    pts.extend(k.boundary_samples(boundary_sample_count(g)));
    oscillation(f, &pts)
}

pub fn oscillation_boundary(f: &ScalarField, k: &Domain, g: &Grid) -> Result<f64> {
    oscillation(f, &k.boundary_samples(boundary_sample_count(g)))
}

/// Vertical oscillation of per-vertex values `u` along `c`: the largest `u(x) − u(y)` over
/// vertex pairs with `|p₁(x) − p₁(y)| ≤ tol_x`.
pub fn vertical_oscillation(u: &[f64], c: &CurveComponent, tol_x: f64) -> f64 {
    vertical_oscillation_points(u, &c.vertices, tol_x)
}

/// Sliding-window form of the vertical oscillation: after sorting on `p₁`, the best partner
/// of each vertex is the window minimum of `u`, maintained with a monotone deque.
pub fn vertical_oscillation_points(u: &[f64], pts: &[Point], tol_x: f64) -> f64 {
    let n = pts.len().min(u.len());
    if n < 2 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(a.cmp(&b)));
    let xs: Vec<f64> = order.iter().map(|&i| pts[i].x).collect();
    let us: Vec<f64> = order.iter().map(|&i| u[i]).collect();
    let mut best = 0.0f64;
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut right = 0;
    for i in 0..n {
        while right < n && xs[right] <= xs[i] + tol_x {
            while dq.back().is_some_and(|&b| us[b] >= us[right]) {
                dq.pop_back();
            }
            dq.push_back(right);
            right += 1;
        }
        while dq.front().is_some_and(|&f| xs[f] < xs[i] - tol_x) {
            dq.pop_front();
        }
        if let Some(&m) = dq.front() {
            best = best.max(us[i] - us[m]);
        }
    }
    best
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `|det(M)/c − det(A − b⊗b/c)|` for `M = [[A, b], [bᵀ, c]]`.
pub fn schur_det_identity(m: &[[f64; 3]; 3]) -> Result<f64> {
    let c = m[2][2];
    if c.abs() <= 1e-12 {
        return Err(Error::NearSingularPivot(c));
    }
    let b = [m[0][2], m[1][2]];
    let s00 = m[0][0] - b[0] * b[0] / c;
    let s01 = m[0][1] - b[0] * b[1] / c;
    let s10 = m[1][0] - b[1] * b[0] / c;
    let s11 = m[1][1] - b[1] * b[1] / c;
    Ok((det3(m) / c - (s00 * s11 - s01 * s10)).abs())
}
