use abp_core::verify::*;
use abp_core::{builtin, Domain, Grid, Point};

fn small() -> SuiteConfig {
    SuiteConfig {
        grid: 129,
        z_count: 64,
        seed: 3,
        path_trials: 4,
        ..SuiteConfig::default()
    }
}

#[test]
fn zero_field_passes_trivially() {
    let r = run_entry(&builtin("zero").unwrap(), &small()).unwrap();
    assert!(r.passed(), "{:#?}", r.checks);
    assert!(r.slices.is_empty());
    let t = r.check("theorem_compact").unwrap();
    assert_eq!((t.lhs, t.rhs), (0.0, 0.0));
}

#[test]
fn affine_field_skips_compact_checks() {
    let r = run_entry(&builtin("affine").unwrap(), &small()).unwrap();
    assert!(!r.compact);
    assert!(r.check("step3").is_none() && r.lambda_sweep.is_none());
    assert!(r.check("theorem_general").unwrap().pass);
}

#[test]
fn report_json_round_trips() {
    let r = run_entry(&builtin("two_bumps").unwrap(), &small()).unwrap();
    let s = r.to_json();
    let back: VerificationReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back.to_json(), s);
    assert_eq!(back.checks.len(), r.checks.len());
}

#[test]
fn reports_are_deterministic() {
    let e = builtin("paper_figure").unwrap();
    let a = run_entry(&e, &small()).unwrap().to_json();
    let b = run_entry(&e, &small()).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn theorem_ratio_is_invariant_under_scaling_and_translation() {
    let e = builtin("modulated_bump").unwrap();
    let tol = Tolerances::default();
    let ratio = |f: &abp_core::ScalarField, k: &Domain| {
        let g = Grid::square(*k, 257).unwrap();
        check_theorem_compact(f, k, &g, &tol)
            .unwrap()
            .ratio
            .unwrap()
    };
    let base = ratio(&e.field, &e.domain);
    let scaled = ratio(&e.field.scaled(-7.5), &e.domain);
    let off = Point::new(3.25, -1.5);
    let moved = ratio(&e.field.translated(off), &e.domain.translated(off));
    assert!((scaled / base - 1.0).abs() < 1e-10);
    assert!((moved / base - 1.0).abs() < 1e-10, "{moved} vs {base}");
}

#[test]
fn markov_sets_shrink_with_lambda() {
    let e = builtin("bump").unwrap();
    let g = Grid::square(e.domain, 257).unwrap();
    let sw = sweep(&e.field, &e.domain, &g, 128, 8.0);
    let ls = lambda_sweep(&e.field, &e.domain, &g, &sw).unwrap();
    assert_eq!(ls.lambdas.len(), LAMBDA_COUNT);
    assert!(ls.e_measure.windows(2).all(|w| w[1] <= w[0]));
    for (l, m) in ls.lambdas.iter().zip(&ls.e_measure) {
        assert!(m * l <= ls.a);
    }
    let d = e.domain.diameter();
    assert!((ls.lambda_star - (ls.a * d).sqrt()).abs() <= 1e-12 * ls.lambda_star);
}

#[test]
fn tolerance_overrides_parse_partially() {
    let t: Tolerances = serde_json::from_str(r#"{"theorem": 0.5}"#).unwrap();
    assert_eq!(t.theorem, 0.5);
    assert_eq!(t.schur, Tolerances::default().schur);
}
