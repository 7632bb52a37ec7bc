use abp_core::field::{make_bump, make_paper_figure_field, FieldSpec};
use abp_core::{catalog, Point, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample_in(e: &abp_core::CatalogEntry, rng: &mut ChaCha8Rng) -> Point {
    let (lo, hi) = e.domain.bbox();
    loop {
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if e.domain.contains(p) {
            return p;
        }
    }
}

/// Five-point central difference of `u` along `e` at `p`.
fn fd(u: impl Fn(Point) -> f64, p: Point, e: Point, h: f64) -> f64 {
    let at = |t: f64| u(p + e * t);
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

#[test]
fn gradients_and_hessians_match_finite_differences() {
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for e in catalog() {
        let f = &e.field;
        let mut checked = 0;
        while checked < 100 {
            let p = sample_in(&e, &mut rng);
            if f.distance_to_support_boundary(p) <= 2.0 * h {
                continue;
            }
            checked += 1;
            let g = f.gradient(p);
            let hs = f.hessian(p);
            let ex = [Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
            let scale = 1.0 + g[0].abs().max(g[1].abs());
            let hscale = 1.0 + hs.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for a in 0..2 {
                let d = fd(|q| f.evaluate(q), p, ex[a], h);
                assert!((g[a] - d).abs() <= 1e-6 * scale, "{} at {p:?}", f.id);
                for b in 0..2 {
                    let d = fd(|q| f.gradient(q)[a], p, ex[b], h);
                    assert!((hs[a][b] - d).abs() <= 1e-6 * hscale, "{} at {p:?}", f.id);
                }
            }
            assert_eq!(hs[0][1], hs[1][0]);
        }
    }
}

#[test]
fn compact_fields_vanish_exactly_outside_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for e in catalog()
        .into_iter()
        .filter(|e| e.field.compactly_supported())
    {
        let mut seen = 0;
        while seen < 1000 {
            // the bump supports fill their disks, so sample the bounding box instead
            let (lo, hi) = e.domain.bbox();
            let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if !e.field.outside_support(p) {
                continue;
            }
            seen += 1;
            let j = e.field.jet(p);
            assert_eq!(
                [j.v, j.gx, j.gy, j.hxx, j.hxy, j.hyy],
                [0.0; 6],
                "{} at {p:?}",
                e.field.id
            );
        }
    }
}

#[test]
fn paper_figure_matches_hand_derivatives() {
    let f = make_paper_figure_field();
    assert_eq!(f.evaluate(Point::new(0.0, 0.0)), 18.0);
    for p in [
        Point::new(2.54, -3.62),
        Point::new(0.3, 1.1),
        Point::new(-1.2, -0.7),
    ] {
        let (x, y) = (p.x, p.y);
        let u = 0.6 * (0.5 * x * x * x - y * y);
        let fx = -2.0 * u.sin() * 0.9 * x * x - 2.0 * x * (y + 4.0);
        let fy = 2.4 * y * u.sin() - (x * x + 2.0 * y);
        let g = f.gradient(p);
        assert!((g[0] - fx).abs() < 1e-12 && (g[1] - fy).abs() < 1e-12);
    }
}

#[test]
fn bump_matches_radial_formula() {
    let f = make_bump(Point::new(0.5, -0.25), 2.0, 3.0).unwrap();
    let p = Point::new(1.1, 0.35);
    let d = p - Point::new(0.5, -0.25);
    let rho = d.dot(d) / 4.0;
    assert!((f.evaluate(p) - 3.0 * (1.0 - rho).powi(3)).abs() < 1e-14);
    let g = f.gradient(p);
    let k = -3.0 * 3.0 * (1.0 - rho).powi(2) * 2.0 / 4.0;
    assert!((g[0] - k * d.x).abs() < 1e-14 && (g[1] - k * d.y).abs() < 1e-14);
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = FieldSpec::Affine {
        a: f64::NAN,
        b: 0.0,
        c: 0.0,
    };
    assert!(ScalarField::new("bad", bad).is_err());
    let json = r#"{"type":"bump","center":[0,0],"radius":-1,"amplitude":1}"#;
    let spec: FieldSpec = serde_json::from_str(json).unwrap();
    assert!(ScalarField::new("bad", spec).is_err());
}

proptest! {
    #[test]
    fn scaling_and_translation_act_on_every_derivative(
        s in -3.0f64..3.0,
        ox in -1.0f64..1.0,
        oy in -1.0f64..1.0,
        px in -1.0f64..1.0,
        py in -1.0f64..1.0,
    ) {
        let f = make_paper_figure_field();
        let p = Point::new(px, py);
        let off = Point::new(ox, oy);
        let a = f.scaled(s).jet(p);
        let b = f.jet(p);
        prop_assert!((a.hxy - s * b.hxy).abs() <= 1e-12 * (1.0 + b.hxy.abs()));
        let t = f.translated(off).jet(p + off);
        let c = f.jet(p + off - off);
        prop_assert_eq!(t, c);
    }
}
