//! Marching squares over cached node values, with chaining into polylines.

use std::collections::HashMap;

use crate::field::Grid;
use crate::geom::Point;

pub(crate) const BLOCK: usize = 16;

/// Per-block min/max of node values, used to skip cells the level cannot cross.
pub(crate) struct BlockRanges {
    pub bx: usize,
    pub by: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BlockRanges {
    pub fn new(values: &[f64], nx: usize, ny: usize) -> BlockRanges {
        let cx = nx - 1;
        let cy = ny - 1;
        let bx = cx.div_ceil(BLOCK);
        let by = cy.div_ceil(BLOCK);
        let mut lo = vec![f64::INFINITY; bx * by];
        let mut hi = vec![f64::NEG_INFINITY; bx * by];
        for b in 0..by {
            let j0 = b * BLOCK;
            let j1 = ((b + 1) * BLOCK).min(cy);
            for a in 0..bx {
                let i0 = a * BLOCK;
                let i1 = ((a + 1) * BLOCK).min(cx);
                let (mut l, mut h) = (f64::INFINITY, f64::NEG_INFINITY);
                for j in j0..=j1 {
                    for &v in &values[j * nx + i0..=j * nx + i1] {
                        l = l.min(v);
                        h = h.max(v);
                    }
                }
                lo[b * bx + a] = l;
                hi[b * bx + a] = h;
            }
        }
        BlockRanges { bx, by, lo, hi }
    }
}

/// Result of contouring one level: ordered polylines (closed ones repeat their first vertex).
pub(crate) struct Contours {
    pub polylines: Vec<(Vec<Point>, bool)>,
    pub snapped_nodes: usize,
}

fn h_edge(nx: usize, i: usize, j: usize) -> u64 {
    2 * (j * nx + i) as u64
}

fn v_edge(nx: usize, i: usize, j: usize) -> u64 {
    2 * (j * nx + i) as u64 + 1
}

/// Traces the zero set of `values − z` on `g`. Node values within `eps_snap` of `z` are
/// pushed to `z ± eps_snap` so no contour passes through a node. Saddle cells ask
/// `center(i, j)` for the field value minus `z` at the cell center.
pub(crate) fn contour(
    g: &Grid,
    values: &[f64],
    blocks: &BlockRanges,
    z: f64,
    eps_snap: f64,
    center: impl Fn(usize, usize) -> f64,
) -> Contours {
    let nx = g.nx;
    let ny = g.ny;
    let shifted = |i: usize, j: usize| -> f64 {
        let w = values[j * nx + i] - z;
        if w.abs() < eps_snap {
            if w < 0.0 {
                -eps_snap
            } else {
                eps_snap
            }
        } else {
            w
        }
    };
    let mut segs: Vec<[u64; 2]> = Vec::new();
    let mut edge_w: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut snapped = 0usize;
    for b in 0..blocks.by {
        for a in 0..blocks.bx {
            let idx = b * blocks.bx + a;
            if z < blocks.lo[idx] - eps_snap || z > blocks.hi[idx] + eps_snap {
                continue;
            }
            let i0 = a * BLOCK;
            let j0 = b * BLOCK;
            let i1 = ((a + 1) * BLOCK).min(nx - 1);
            let j1 = ((b + 1) * BLOCK).min(ny - 1);
            // Owned nodes: the half-open block range, plus the far edge for the last block.
            let oi1 = if a + 1 == blocks.bx { nx } else { i1 };
            let oj1 = if b + 1 == blocks.by { ny } else { j1 };
            for j in j0..oj1 {
                for i in i0..oi1 {
                    if (values[j * nx + i] - z).abs() < eps_snap {
                        snapped += 1;
                    }
                }
            }
            for j in j0..j1 {
                for i in i0..i1 {
                    let w = [
                        shifted(i, j),
                        shifted(i + 1, j),
                        shifted(i + 1, j + 1),
                        shifted(i, j + 1),
                    ];
                    let case = (w[0] > 0.0) as u8
                        | ((w[1] > 0.0) as u8) << 1
                        | ((w[2] > 0.0) as u8) << 2
                        | ((w[3] > 0.0) as u8) << 3;
                    if case == 0 || case == 15 {
                        continue;
                    }
                    let e = [
                        h_edge(nx, i, j),
                        v_edge(nx, i + 1, j),
                        h_edge(nx, i, j + 1),
                        v_edge(nx, i, j),
                    ];
                    // lower-index node value first
                    let ew = [(w[0], w[1]), (w[1], w[2]), (w[3], w[2]), (w[0], w[3])];
                    let mut push = |p: usize, q: usize| {
                        segs.push([e[p], e[q]]);
                        edge_w.entry(e[p]).or_insert(ew[p]);
                        edge_w.entry(e[q]).or_insert(ew[q]);
                    };
                    match case {
                        5 | 10 => {
                            let above = center(i, j) > 0.0;
                            if (case == 5) == above {
                                push(0, 1);
                                push(2, 3);
                            } else {
                                push(3, 0);
                                push(1, 2);
                            }
                        }
                        _ => {
                            let crossing: Vec<usize> = (0..4)
                                .filter(|&k| (ew[k].0 > 0.0) != (ew[k].1 > 0.0))
                                .collect();
                            push(crossing[0], crossing[1]);
                        }
                    }
                }
            }
        }
    }

    let point_of = |id: u64| -> Point {
        let (wa, wb) = edge_w[&id];
        let t = wa / (wa - wb);
        let node = (id / 2) as usize;
        let (i, j) = (node % nx, node / nx);
        let p = if id.is_multiple_of(2) {
            let (xa, xb) = (g.xs(i), g.xs(i + 1));
            Point::new(xa + t * (xb - xa), g.ys(j))
        } else {
            let (ya, yb) = (g.ys(j), g.ys(j + 1));
            Point::new(g.xs(i), ya + t * (yb - ya))
        };
        Point::new(p.x.clamp(g.lo.x, g.hi.x), p.y.clamp(g.lo.y, g.hi.y))
    };

    let mut by_edge: HashMap<u64, [usize; 2]> = HashMap::with_capacity(segs.len() * 2);
    for (s, pair) in segs.iter().enumerate() {
        for &e in pair {
            let slot = by_edge.entry(e).or_insert([usize::MAX; 2]);
            if slot[0] == usize::MAX {
                slot[0] = s;
            } else {
                slot[1] = s;
            }
        }
    }
    let other = |e: u64, s: usize| -> Option<usize> {
        let slot = by_edge[&e];
        let o = if slot[0] == s { slot[1] } else { slot[0] };
        (o != usize::MAX).then_some(o)
    };
    let far = |s: usize, e: u64| -> u64 {
        if segs[s][0] == e {
            segs[s][1]
        } else {
            segs[s][0]
        }
    };

    let mut used = vec![false; segs.len()];
    let mut polylines = Vec::new();
    for s0 in 0..segs.len() {
        if used[s0] {
            continue;
        }
        used[s0] = true;
        let mut fwd = vec![segs[s0][0], segs[s0][1]];
        let mut closed = false;
        let (mut s, mut e) = (s0, segs[s0][1]);
        while let Some(n) = other(e, s) {
            if n == s0 {
                closed = true;
                break;
            }
            if used[n] {
                break;
            }
            used[n] = true;
            e = far(n, e);
            s = n;
            fwd.push(e);
        }
        if !closed {
            let mut back = Vec::new();
            let (mut s, mut e) = (s0, segs[s0][0]);
            while let Some(n) = other(e, s) {
                if used[n] {
                    break;
                }
                used[n] = true;
                e = far(n, e);
                s = n;
                back.push(e);
            }
            back.reverse();
            back.extend(fwd);
            fwd = back;
        }
        // A closed walk ends on its starting edge, so the closing vertex is already there.
        let pts: Vec<Point> = fwd.iter().map(|&id| point_of(id)).collect();
        polylines.push((pts, closed));
    }
    Contours {
        polylines,
        snapped_nodes: snapped,
    }
}
