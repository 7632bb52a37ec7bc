use abp_core::levelset::*;
use abp_core::{builtin, catalog, Domain, Grid, Point};
use proptest::prelude::*;

fn sampler_for(id: &str, n: usize) -> (abp_core::CatalogEntry, Grid) {
    let e = builtin(id).unwrap();
    let g = Grid::square(e.domain, n).unwrap();
    (e, g)
}

#[test]
fn bump_slices_near_zero_are_loops() {
    let (e, g) = sampler_for("bump", 257);
    let s = LevelSampler::new(&e.field, e.domain, g);
    for z in [-0.05, 0.05] {
        let sl = s.extract(z);
        assert!(!sl.loops.is_empty(), "z = {z}");
        for c in &sl.loops {
            assert_eq!(c.vertices.first(), c.vertices.last());
            // below the centre line for z > 0, since f_{x₂} = −6y(1−ρ)²
            let mid = c.vertices.iter().map(|p| p.y).sum::<f64>() / c.len() as f64;
            assert!(mid * z < 0.0);
        }
        assert!(phi_compact(&sl, s.tol_x()).unwrap() > 0.0);
    }
}

#[test]
fn curves_sit_on_the_level_and_arcs_end_on_the_boundary() {
    for e in catalog() {
        let g = Grid::square(e.domain, 257).unwrap();
        let s = LevelSampler::new(&e.field, e.domain, g);
        let h = s.spacing();
        for z in s.z_grid(24) {
            let sl = s.extract(z);
            for c in sl.components() {
                for p in &c.vertices {
                    assert!(e.domain.contains(*p) || e.domain.distance_to_boundary(*p) < 1e-9);
                    let v = e.field.jet(*p).gy;
                    assert!(
                        (v - z).abs() <= h * s.max_grad_source,
                        "{} z = {z}",
                        e.field.id
                    );
                }
                if c.is_arc() {
                    for p in [c.vertices[0], *c.vertices.last().unwrap()] {
                        assert!(e.domain.distance_to_boundary(p) < 1e-9, "{}", e.field.id);
                    }
                }
            }
        }
    }
}

#[test]
fn component_budgets_respect_their_one_dimensional_bounds() {
    for e in catalog() {
        let g = Grid::square(e.domain, 257).unwrap();
        let s = LevelSampler::new(&e.field, e.domain, g);
        let slack = s.eps_lem();
        for z in s.z_grid(40) {
            let sl = s.extract(z);
            if !sl.regular {
                continue;
            }
            for b in component_budgets(&sl, s.tol_x()) {
                assert!(b.value >= 0.0);
                assert!(
                    b.value <= 1.02 * b.bound + slack,
                    "{} z = {z} {:?}: {} > {}",
                    e.field.id,
                    b.kind,
                    b.value,
                    b.bound
                );
            }
        }
    }
}

#[test]
fn figure_field_has_arcs_of_both_kinds_somewhere() {
    let (e, g) = sampler_for("paper_figure", 257);
    let s = LevelSampler::new(&e.field, e.domain, g);
    let mut kinds = std::collections::BTreeSet::new();
    for z in s.z_grid(64) {
        for b in component_budgets(&s.extract(z), s.tol_x()) {
            kinds.insert(format!("{:?}", b.kind));
        }
    }
    assert!(
        kinds.contains("ArcVanishing") && kinds.contains("ArcNonvanishing"),
        "{kinds:?}"
    );
}

#[test]
fn slices_outside_the_range_are_empty() {
    let (e, g) = sampler_for("modulated_bump", 129);
    let s = LevelSampler::new(&e.field, e.domain, g);
    for z in [s.z_min - 1.0, s.z_max + 1.0] {
        let sl = s.extract(z);
        assert!(sl.is_empty());
        assert_eq!(phi_general(&sl, s.tol_x()).unwrap().total, 0.0);
    }
    let zero = builtin("zero").unwrap();
    let s = LevelSampler::new(
        &zero.field,
        zero.domain,
        Grid::square(zero.domain, 33).unwrap(),
    );
    assert_eq!((s.z_min, s.z_max), (0.0, 0.0));
}

#[test]
fn vanishing_budget_covers_each_point_from_a_valid_endpoint() {
    // S = cos along a vertical segment, f_{x₁} changing sign in the middle
    let pts: Vec<Point> = (0..=40)
        .map(|i| Point::new(0.0, -1.0 + 0.05 * i as f64))
        .collect();
    let f: Vec<f64> = (0..=40).map(|i| i as f64 - 15.5).collect();
    let sz: Vec<f64> = pts.iter().map(|p| (3.0 * p.y).cos()).collect();
    let c = CurveComponent::new(0, pts, false, f, sz.clone());
    assert_eq!(first_fx1_zero(&c, 0.0), Some(15.5));
    assert_eq!(last_fx1_zero(&c, 0.0), Some(15.5));
    let sl = LevelSlice {
        z: 0.0,
        regular: true,
        min_grad_fx2_on_curve: 1.0,
        snapped_nodes: 0,
        eps_zero: 0.0,
        loops: vec![],
        arcs: vec![c],
    };
    let b = component_budgets(&sl, 0.1).remove(0);
    assert_eq!(b.kind, BudgetKind::ArcVanishing);
    let from_start = sz[16..].iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sz[0];
    let from_end = sz[..=15].iter().cloned().fold(f64::NEG_INFINITY, f64::max) - sz[40];
    assert_eq!(b.value, from_start.max(from_end));
    let p = phi_general(&sl, 0.1).unwrap();
    assert_eq!((p.phi1, p.phi2, p.phi3), (0.0, 0.0, b.value));
}

#[test]
fn rectangle_and_disk_agree_on_interior_loops() {
    let f = abp_core::field::make_bump(Point::new(0.0, 0.0), 0.5, 1.0).unwrap();
    let d = Domain::disk(Point::new(0.0, 0.0), 1.0).unwrap();
    let r = Domain::rect(Point::new(-1.0, -1.0), Point::new(1.0, 1.0)).unwrap();
    let a = LevelSampler::new(&f, d, Grid::square(d, 129).unwrap()).extract(0.3);
    let b = LevelSampler::new(&f, r, Grid::square(r, 129).unwrap()).extract(0.3);
    assert_eq!(a.loops.len(), b.loops.len());
    assert!((tv_of_slice(&a) - tv_of_slice(&b)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn ghat_lands_on_the_first_earlier_crossing(
        xs in proptest::collection::vec(-1.0f64..1.0, 2..60),
    ) {
        let pts: Vec<Point> = xs.iter().enumerate().map(|(i, &x)| Point::new(x, i as f64)).collect();
        let n = pts.len();
        let c = CurveComponent::new(0, pts, false, vec![1.0; n], xs.clone());
        let g = ghat_all(&c);
        for i in 0..n {
            prop_assert!(g[i] <= i);
            prop_assert_eq!(g[i], ghat(&c, i));
            // no segment before the one holding Ĝ(i) brackets p₁(vᵢ)
            let first = (0..i).find(|&k| {
                let (a, b) = (xs[k].min(xs[k + 1]), xs[k].max(xs[k + 1]));
                a <= xs[i] && xs[i] <= b
            });
            if let Some(k) = first {
                prop_assert!(g[i] == k || g[i] == k + 1);
            }
        }
        let v = ghat_partition_value(&c);
        prop_assert!(v >= 0.0);
        let single = (0..n).map(|i| xs[i] - xs[g[i]]).fold(0.0f64, f64::max);
        prop_assert!(v >= single);
    }
}
