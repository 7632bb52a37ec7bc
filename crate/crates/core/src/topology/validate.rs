use serde::{Deserialize, Serialize};

use super::path::{AdmissiblePath, SegmentKind};
use super::Coloring;
use crate::field::Domain;
use crate::geom::{point_segment_distance, Point};
use crate::levelset::{CurveComponent, LevelSlice};

/// Outcome of [`validate_path`]; `violations` is empty for an admissible path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PathReport {
    pub violations: Vec<String>,
    pub segment_count: usize,
    /// Components touched, in path order, with consecutive repeats merged.
    pub visits: Vec<usize>,
}

impl PathReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn distance_to_curve(c: &CurveComponent, p: Point) -> f64 {
    c.vertices
        .windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn touching(s: &LevelSlice, p: Point, eps: f64) -> Vec<usize> {
    s.components()
        .filter(|c| distance_to_curve(c, p) <= eps)
        .map(|c| c.id)
        .collect()
}

/// Checks chaining, Property (1) (boundary start, base-point end), Property (2) (no
/// component is re-entered after being left) and per-segment admissibility.
pub fn validate_path(p: &AdmissiblePath, s: &LevelSlice, col: &Coloring, k: &Domain) -> PathReport {
    let eps = 1e-9 * k.diameter().max(1.0);
    let h = col.grid.spacing();
    let mut v = Vec::new();
    let segs = &p.segments;
    if segs.is_empty() {
        v.push("path has no segments".to_string());
    }
    for (j, w) in segs.windows(2).enumerate() {
        if w[0].end.dist(w[1].start) > eps {
            v.push(format!("segments {j} and {} do not chain", j + 1));
        }
    }
    if let Some(first) = segs.first() {
        if k.distance_to_boundary(first.start) > eps || first.start.dist(p.start_point) > eps {
            v.push(format!(
                "path starts at {:?}, not on the boundary",
                first.start
            ));
        }
    }
    if let Some(last) = segs.last() {
        // a retried construction ends at a jittered copy of the base point
        let tol = if p.retries == 0 { eps } else { 1e-2 * h };
        if last.end.dist(p.end_point) > eps || p.end_point.dist(col.base_point) > tol {
            v.push("path does not end at the base point".to_string());
        }
    }

    let mut visits: Vec<usize> = Vec::new();
    let note = |ids: &[usize], visits: &mut Vec<usize>| {
        // components touched at one place are one visit unless the path is already on one
        let last = visits.last().copied();
        if let Some(l) = last {
            if ids.contains(&l) {
                return;
            }
        }
        if let Some(&id) = ids.first() {
            visits.push(id);
        }
    };
    for (j, sg) in segs.iter().enumerate() {
        match sg.kind {
            SegmentKind::VertDown | SegmentKind::VertUp => {
                if (sg.start.x - sg.end.x).abs() > eps {
                    v.push(format!("segment {j} is not vertical"));
                }
                let down = sg.kind == SegmentKind::VertDown;
                if (down && sg.end.y > sg.start.y + eps) || (!down && sg.end.y < sg.start.y - eps) {
                    v.push(format!("segment {j} moves against its kind"));
                }
                let want = if down { 1 } else { -1 };
                for q in 0..32 {
                    let t = (q as f64 + 0.5) / 32.0;
                    let pt = sg.start.lerp(sg.end, t);
                    match col.color_at(pt) {
                        Ok(c) if c == want => {}
                        Ok(_) => {
                            v.push(format!(
                                "segment {j} passes through color {} at {pt:?}",
                                -want
                            ));
                            break;
                        }
                        Err(e) => {
                            v.push(format!("segment {j}: color undetermined at {pt:?}: {e}"));
                            break;
                        }
                    }
                }
                note(&touching(s, sg.start, eps), &mut visits);
                note(&touching(s, sg.end, eps), &mut visits);
            }
            _ => {
                let Some(id) = sg.component_id else {
                    v.push(format!("arc segment {j} has no component"));
                    continue;
                };
                let Some(c) = s.component(id) else {
                    v.push(format!("arc segment {j} names unknown component {id}"));
                    continue;
                };
                if sg.points.first() != Some(&sg.start) || sg.points.last() != Some(&sg.end) {
                    v.push(format!(
                        "arc segment {j} polyline does not match its endpoints"
                    ));
                }
                if sg.points.iter().any(|&q| distance_to_curve(c, q) > eps) {
                    v.push(format!("arc segment {j} leaves component {id}"));
                }
                match sg.kind {
                    SegmentKind::LoopArc | SegmentKind::GhatArc => {
                        if (sg.start.x - sg.end.x).abs() > eps {
                            v.push(format!("segment {j} endpoints do not share a fiber"));
                        }
                        if sg.kind == SegmentKind::LoopArc && !c.closed {
                            v.push(format!("loop arc {j} runs on an arc"));
                        }
                    }
                    SegmentKind::HhatArc => {
                        let d = sg.end.x - sg.start.x;
                        if sg
                            .points
                            .windows(2)
                            .any(|w| (w[1].x - w[0].x) * d < -eps * eps)
                        {
                            v.push(format!("segment {j} is not monotone in p1"));
                        }
                    }
                    SegmentKind::BoundaryArc if k.distance_to_boundary(sg.start) > eps => {
                        v.push(format!("boundary arc {j} does not start on the boundary"));
                    }
                    _ => {}
                }
                note(&[id], &mut visits);
            }
        }
    }
    for (a, &id) in visits.iter().enumerate() {
        if visits[a + 1..].contains(&id) {
            v.push(format!(
                "component {id} is re-entered after the path left it"
            ));
            break;
        }
    }
    PathReport {
        violations: v,
        segment_count: segs.len(),
        visits,
    }
}
