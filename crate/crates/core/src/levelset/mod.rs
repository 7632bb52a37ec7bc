//! Level sets `Σ_z = f_{x₂}⁻¹(z) ∩ K`, total variation of `f_{x₁}` along them, and the
//! per-slice budget `φ(z)`.
//!
//! A [`LevelSampler`] evaluates the field once on the grid and then extracts any number of
//! slices cheaply; blocks of cells whose value range misses `z` are skipped.

mod curve;
mod march;
mod phi;

pub use curve::{
    find_folding_points, ghat, ghat_all, hhat, total_variation_along, CurveComponent, FoldKind,
    FoldingPoint,
};
pub use phi::{
    component_budgets, first_fx1_zero, ghat_partition_value, last_fx1_zero, phi_compact,
    phi_from_budgets, phi_general, BudgetKind, ComponentBudget, PhiBreakdown,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{Domain, Grid, Jet, ScalarField};
use crate::geom::Point;
use march::{contour, BlockRanges};

/// Which scalar is contoured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LevelSource {
    /// `f_{x₂}`, the level sets used throughout the proof.
    #[default]
    Fx2,
    /// `f` itself; used to redraw the zero-set pictures.
    Value,
}

impl LevelSource {
    fn value(self, j: &Jet) -> f64 {
        match self {
            LevelSource::Fx2 => j.gy,
            LevelSource::Value => j.v,
        }
    }

    fn grad_norm(self, j: &Jet) -> f64 {
        match self {
            LevelSource::Fx2 => j.hxy.hypot(j.hyy),
            LevelSource::Value => j.gx.hypot(j.gy),
        }
    }
}

/// One extracted slice. Component ids run over the loops first and then the arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSlice {
    pub z: f64,
    pub regular: bool,
    pub min_grad_fx2_on_curve: f64,
    pub snapped_nodes: usize,
    /// Threshold below which `f_{x₁}` counts as vanishing on an arc.
    pub eps_zero: f64,
    pub loops: Vec<CurveComponent>,
    pub arcs: Vec<CurveComponent>,
}

impl LevelSlice {
    pub fn components(&self) -> impl Iterator<Item = &CurveComponent> {
        self.loops.iter().chain(self.arcs.iter())
    }

    pub fn component(&self, id: usize) -> Option<&CurveComponent> {
        if id < self.loops.len() {
            self.loops.get(id)
        } else {
            self.arcs.get(id - self.loops.len())
        }
    }

    pub fn component_count(&self) -> usize {
        self.loops.len() + self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty() && self.arcs.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.components().map(|c| c.len()).sum()
    }

    /// The slice seen by `−f` at level `−z`: the same curves, negated samples.
    pub fn negated(&self) -> LevelSlice {
        LevelSlice {
            z: -self.z,
            loops: self.loops.iter().map(CurveComponent::negated).collect(),
            arcs: self.arcs.iter().map(CurveComponent::negated).collect(),
            ..self.clone()
        }
    }
}

/// Sum of the total variation of `f_{x₁}` over all components.
pub fn tv_of_slice(s: &LevelSlice) -> f64 {
    s.components().map(total_variation_along).sum()
}

/// Cached grid samples of a field for repeated slice extraction.
pub struct LevelSampler<'a> {
    pub field: &'a ScalarField,
    pub domain: Domain,
    pub grid: Grid,
    pub source: LevelSource,
    values: Vec<f64>,
    blocks: BlockRanges,
    /// Range of the contoured scalar over `K`.
    pub z_min: f64,
    pub z_max: f64,
    /// `max |∇f|` over grid nodes in `K`.
    pub lipschitz: f64,
    pub max_grad_source: f64,
    pub max_abs_fx1: f64,
    pub eps_reg: f64,
    pub eps_zero: f64,
    pub eps_snap: f64,
    pub eps_geom: f64,
}

impl<'a> LevelSampler<'a> {
    pub fn new(field: &'a ScalarField, domain: Domain, grid: Grid) -> LevelSampler<'a> {
        LevelSampler::with_source(field, domain, grid, LevelSource::Fx2)
    }

    pub fn with_source(
        field: &'a ScalarField,
        domain: Domain,
        grid: Grid,
        source: LevelSource,
    ) -> LevelSampler<'a> {
        let nx = grid.nx;
        struct Row {
            values: Vec<f64>,
            zmin: f64,
            zmax: f64,
            lip: f64,
            grad: f64,
            fx1: f64,
        }
        let rows: Vec<Row> = (0..grid.ny)
            .into_par_iter()
            .map(|j| {
                let mut r = Row {
                    values: Vec::with_capacity(nx),
                    zmin: f64::INFINITY,
                    zmax: f64::NEG_INFINITY,
                    lip: 0.0,
                    grad: 0.0,
                    fx1: 0.0,
                };
                for i in 0..nx {
                    let p = grid.node(i, j);
                    let jet = field.jet(p);
                    let v = source.value(&jet);
                    r.values.push(v);
                    if domain.contains(p) {
                        r.zmin = r.zmin.min(v);
                        r.zmax = r.zmax.max(v);
                        r.lip = r.lip.max(jet.gx.hypot(jet.gy));
                        r.grad = r.grad.max(source.grad_norm(&jet));
                        r.fx1 = r.fx1.max(jet.gx.abs());
                    }
                }
                r
            })
            .collect();
        let mut values = Vec::with_capacity(nx * grid.ny);
        let (mut z_min, mut z_max, mut lip, mut grad, mut fx1) =
            (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64, 0.0f64);
        for r in rows {
            values.extend(r.values);
            z_min = z_min.min(r.zmin);
            z_max = z_max.max(r.zmax);
            lip = lip.max(r.lip);
            grad = grad.max(r.grad);
            fx1 = fx1.max(r.fx1);
        }
        for p in domain.boundary_samples(4 * nx.max(grid.ny)) {
            let v = source.value(&field.jet(p));
            z_min = z_min.min(v);
            z_max = z_max.max(v);
        }
        if !z_min.is_finite() {
            z_min = 0.0;
            z_max = 0.0;
        }
        let blocks = BlockRanges::new(&values, nx, grid.ny);
        let scale = values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        LevelSampler {
            field,
            domain,
            grid,
            source,
            values,
            blocks,
            z_min,
            z_max,
            lipschitz: lip,
            max_grad_source: grad,
            max_abs_fx1: fx1,
            eps_reg: 1e-3 * grad,
            eps_zero: 1e-9 * fx1,
            eps_snap: 1e-9 * scale,
            eps_geom: 1e-9 * domain.diameter().max(1.0),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// `ε_lem(h) = 8·h·max|∇f|`.
    pub fn eps_lem(&self) -> f64 {
        8.0 * self.spacing() * self.lipschitz
    }

    /// Default fiber tolerance, two grid spacings.
    pub fn tol_x(&self) -> f64 {
        2.0 * self.spacing()
    }

    /// Uniform level grid spanning the range padded by one step on each side.
    pub fn z_grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(4);
        let d = (self.z_max - self.z_min) / (n - 3) as f64;
        (0..n).map(|k| self.z_min + (k as f64 - 1.0) * d).collect()
    }

    /// Extracts `Σ_z`.
    pub fn extract(&self, z: f64) -> LevelSlice {
        let g = &self.grid;
        let src = self.source;
        let f = self.field;
        let c = contour(g, &self.values, &self.blocks, z, self.eps_snap, |i, j| {
            src.value(&f.jet(g.cell_center(i, j))) - z
        });
        let pieces = clip_polylines(&c.polylines, &self.domain, self.eps_geom);
        let mut loops = Vec::new();
        let mut arcs = Vec::new();
        for (pts, closed) in pieces {
            if closed {
                loops.push(pts);
            } else {
                arcs.push(pts);
            }
        }
        let mut min_grad = f64::INFINITY;
        let mut build = |pts: Vec<Point>, closed: bool, id: usize| -> CurveComponent {
            let mut fx1 = Vec::with_capacity(pts.len());
            let mut sz = Vec::with_capacity(pts.len());
            for &p in &pts {
                let j = f.jet(p);
                fx1.push(j.gx);
                sz.push(j.v - z * p.y);
                min_grad = min_grad.min(src.grad_norm(&j));
            }
            CurveComponent {
                id,
                arclengths: curve::cumulative_lengths(&pts),
                vertices: pts,
                closed,
                endpoints_on_boundary: !closed,
                samples_fx1: fx1,
                samples_sz: sz,
            }
        };
        let n_loops = loops.len();
        let loops: Vec<CurveComponent> = loops
            .into_iter()
            .enumerate()
            .map(|(k, p)| build(p, true, k))
            .collect();
        let arcs: Vec<CurveComponent> = arcs
            .into_iter()
            .enumerate()
            .map(|(k, p)| build(p, false, n_loops + k))
            .collect();
        LevelSlice {
            z,
            regular: min_grad > self.eps_reg,
            min_grad_fx2_on_curve: min_grad,
            snapped_nodes: c.snapped_nodes,
            eps_zero: self.eps_zero,
            loops,
            arcs,
        }
    }
}

/// Convenience wrapper building a sampler for a single slice.
pub fn extract_level_set(f: &ScalarField, z: f64, k: &Domain, g: &Grid) -> Result<LevelSlice> {
    if g.nx < 2 || g.ny < 2 {
        return Err(crate::error::invalid("degenerate grid"));
    }
    Ok(LevelSampler::new(f, *k, *g).extract(z))
}

fn push_dedup(v: &mut Vec<Point>, p: Point, eps: f64) {
    if v.last().is_none_or(|q| q.dist(p) > eps) {
        v.push(p);
    }
}

/// Splits traced polylines at `∂K`, keeping the parts inside. Closed polylines that stay
/// inside remain loops; everything else becomes an arc whose endpoints lie on `∂K`.
fn clip_polylines(polys: &[(Vec<Point>, bool)], k: &Domain, eps: f64) -> Vec<(Vec<Point>, bool)> {
    let mut out = Vec::new();
    for (pts, closed) in polys {
        let inside: Vec<bool> = pts.iter().map(|&p| k.contains(p)).collect();
        if inside.iter().all(|&b| b) {
            let mut v = Vec::with_capacity(pts.len());
            for &p in pts {
                push_dedup(&mut v, p, eps);
            }
            if *closed {
                // keep the exact closing vertex
                if v.len() >= 2 && v[v.len() - 1] != v[0] {
                    if v[v.len() - 1].dist(v[0]) <= eps {
                        let n = v.len();
                        v[n - 1] = v[0];
                    } else {
                        v.push(v[0]);
                    }
                }
                if v.len() >= 4 {
                    out.push((v, true));
                }
            } else if v.len() >= 2 {
                out.push((v, false));
            }
            continue;
        }
        // Rotate closed polylines to start outside so every inside run is bounded by exits.
        let seq: Vec<Point> = if *closed {
            let start = inside.iter().position(|&b| !b).unwrap();
            let n = pts.len() - 1;
            (0..=n).map(|k| pts[(start + k) % n]).collect()
        } else {
            pts.clone()
        };
        let ins: Vec<bool> = seq.iter().map(|&p| k.contains(p)).collect();
        let mut cur: Vec<Point> = Vec::new();
        for idx in 0..seq.len() {
            if ins[idx] {
                if cur.is_empty() && idx > 0 {
                    let a = seq[idx];
                    let b = seq[idx - 1];
                    cur.push(k.segment_exit(a, b));
                }
                push_dedup(&mut cur, seq[idx], eps);
                let leaving = idx + 1 < seq.len() && !ins[idx + 1];
                if leaving {
                    push_dedup(&mut cur, k.segment_exit(seq[idx], seq[idx + 1]), eps);
                }
                if leaving || idx + 1 == seq.len() {
                    if cur.len() >= 2 {
                        out.push((std::mem::take(&mut cur), false));
                    } else {
                        cur.clear();
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_bump, FieldSpec};

    #[test]
    fn zero_field_slices_are_empty() {
        let f = ScalarField::new("zero", FieldSpec::Zero).unwrap();
        let k = Domain::rect(Point::new(-1.0, -1.0), Point::new(1.0, 1.0)).unwrap();
        let g = Grid::square(k, 65).unwrap();
        let s = extract_level_set(&f, 0.3, &k, &g).unwrap();
        assert!(s.is_empty());
        assert_eq!(tv_of_slice(&s), 0.0);
        assert_eq!(phi_compact(&s, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn bump_slice_has_closed_loops() {
        let f = make_bump(Point::new(0.0, 0.0), 1.0, 1.0).unwrap();
        let k = Domain::disk(Point::new(0.0, 0.0), 1.0).unwrap();
        let g = Grid::square(k, 257).unwrap();
        for z in [0.05, -0.05] {
            let s = extract_level_set(&f, z, &k, &g).unwrap();
            assert!(!s.loops.is_empty(), "z = {z}");
            assert!(s.arcs.is_empty());
            for c in &s.loops {
                assert_eq!(c.vertices[0], *c.vertices.last().unwrap());
                assert!(c.arclengths.windows(2).all(|w| w[1] > w[0]));
            }
        }
    }

    #[test]
    fn clipping_splits_at_the_boundary() {
        let k = Domain::disk(Point::new(0.0, 0.0), 1.0).unwrap();
        let line: Vec<Point> = (0..=40)
            .map(|i| Point::new(-2.0 + 0.1 * i as f64, 0.05))
            .collect();
        let pieces = clip_polylines(&[(line, false)], &k, 1e-12);
        assert_eq!(pieces.len(), 1);
        let p = &pieces[0].0;
        assert!(k.distance_to_boundary(p[0]) < 1e-12);
        assert!(k.distance_to_boundary(*p.last().unwrap()) < 1e-12);
    }
}
