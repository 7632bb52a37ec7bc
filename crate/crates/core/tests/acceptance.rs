//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero if
//! any criterion fails.

use std::time::Instant;

use abp_core::field::{FIGURE_CENTER, FIGURE_CENTER_ALT, FIGURE_RADIUS};
use abp_core::verify::*;
use abp_core::{catalog, CatalogEntry, Domain, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn describe(c: &Check) -> String {
    format!("{} lhs={:.6e} rhs={:.6e}", c.name, c.lhs, c.rhs)
}

struct Swept {
    entry: CatalogEntry,
    grid: Grid,
    sweep: SliceSweep,
    seconds: f64,
}

fn swept(e: &CatalogEntry, n: usize, tol: &Tolerances) -> Swept {
    let t = Instant::now();
    let grid = Grid::square(e.domain, n).unwrap();
    let sweep = sweep(&e.field, &e.domain, &grid, 512, tol.slack_factor);
    Swept {
        entry: e.clone(),
        grid,
        sweep,
        seconds: t.elapsed().as_secs_f64(),
    }
}

fn coarea(fine: &[Swept], tol: &Tolerances) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for s in fine
        .iter()
        .filter(|s| supported_in(&s.entry.field, &s.entry.domain))
    {
        let t = Instant::now();
        let c = check_coarea(&s.entry.field, &s.entry.domain, &s.grid, &s.sweep, tol).unwrap();
        let secs = s.seconds + t.elapsed().as_secs_f64();
        let ok = c.pass && c.relative_error() < tol.coarea_compact && secs < 60.0;
        pass &= ok;
        notes.push(format!(
            "{} rel={:.3e} {:.1}s",
            s.entry.field.id,
            c.relative_error(),
            secs
        ));
    }
    outcome(pass, notes.join(", "))
}

fn step2(coarse: &[Swept], fine: &[Swept]) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for s in coarse.iter().chain(fine) {
        let c = check_step2(&s.entry.domain, &s.sweep);
        pass &= c.pass;
        if !c.pass {
            notes.push(format!(
                "{} at {}: {}",
                s.entry.field.id, s.grid.nx, c.notes
            ));
        }
    }
    let n: usize = coarse
        .iter()
        .chain(fine)
        .map(|s| s.sweep.regular_count())
        .sum();
    notes.insert(0, format!("{n} regular slices"));
    outcome(pass, notes.join("; "))
}

fn compact_bound(tol: &Tolerances) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for e in catalog()
        .into_iter()
        .filter(|e| supported_in(&e.field, &e.domain))
    {
        let ratio = |n: usize| {
            let g = Grid::square(e.domain, n).unwrap();
            check_theorem_compact(&e.field, &e.domain, &g, tol).unwrap()
        };
        let (a, b) = (ratio(512), ratio(1024));
        let stable = match (a.ratio, b.ratio) {
            (Some(x), Some(y)) => (y - x).abs() <= 0.1 * x.abs().max(y.abs()),
            (None, None) => true,
            _ => false,
        };
        let ok = b.pass && b.ratio.is_none_or(|r| r <= 1.0 + tol.theorem) && stable;
        pass &= ok;
        notes.push(format!("{} ratio={:?}/{:?}", e.field.id, a.ratio, b.ratio));
    }
    outcome(pass, notes.join(", "))
}

fn boundary_bound(tol: &Tolerances) -> Outcome {
    let f = abp_core::field::make_paper_figure_field();
    let mut pass = true;
    let mut notes = Vec::new();
    for c in [FIGURE_CENTER, FIGURE_CENTER_ALT] {
        let k = Domain::disk(c, FIGURE_RADIUS).unwrap();
        let g = Grid::square(k, 1024).unwrap();
        let r = check_theorem_general(&f, &k, &g, tol).unwrap();
        pass &= r.pass;
        notes.push(describe(&r));
    }
    outcome(pass, notes.join(", "))
}

fn trials(fine: &[Swept]) -> Vec<PathTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut counts = vec![0usize; fine.len()];
    for _ in 0..100 {
        counts[rng.random_range(0..fine.len())] += 1;
    }
    let mut out = Vec::new();
    for (i, s) in fine.iter().enumerate() {
        out.extend(path_trials(
            &s.entry.field,
            &s.entry.domain,
            &s.grid,
            &s.sweep,
            counts[i],
            SEED + i as u64,
        ));
    }
    out
}

fn paths(t: &[PathTrial]) -> Outcome {
    let bad: Vec<&PathTrial> = t.iter().filter(|t| !t.admissible()).collect();
    let parities = t
        .iter()
        .map(|t| t.parity)
        .collect::<std::collections::BTreeSet<_>>();
    let arcs = t.iter().filter(|t| t.cases.iter().any(|&c| c >= 4)).count();
    let mut detail = format!(
        "{} trials, {} with arc cases, {} failed",
        t.len(),
        arcs,
        bad.len()
    );
    if let Some(b) = bad.first() {
        detail += &format!(
            "; first: {} z={:.6e}: {}",
            b.field_id,
            b.z,
            b.error.clone().unwrap_or_else(|| b.violations.join("; "))
        );
    }
    outcome(
        bad.is_empty() && parities.len() == 2 && t.len() == 100,
        detail,
    )
}

fn chains(t: &[PathTrial], fine: &[Swept]) -> Outcome {
    let mut pass = true;
    let mut worst: (f64, String) = (f64::NEG_INFINITY, String::new());
    let mut n = 0;
    for tr in t {
        let Some(c) = &tr.chain else {
            pass = false;
            continue;
        };
        n += 1;
        let s = fine
            .iter()
            .find(|s| s.entry.field.id == tr.field_id)
            .unwrap();
        let slack = s.sweep.eps_lem;
        let ok = c.total_change <= c.bound + slack && c.vertical_excess <= slack;
        pass &= ok;
        let ex = c.total_change - c.bound;
        if ex > worst.0 {
            worst = (ex, format!("{} z={:.6e}", tr.field_id, tr.z));
        }
    }
    outcome(
        pass,
        format!(
            "{n} chains; largest total-minus-bound {:.6e} ({})",
            worst.0, worst.1
        ),
    )
}

fn lambda(fine: &[Swept], tol: &Tolerances) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for s in fine
        .iter()
        .filter(|s| supported_in(&s.entry.field, &s.entry.domain))
    {
        let (f, k) = (&s.entry.field, &s.entry.domain);
        let ls = lambda_sweep(f, k, &s.grid, &s.sweep).unwrap();
        let checks = lambda_checks(&ls, k, tol);
        let bad: Vec<String> = checks
            .iter()
            .filter(|c| !c.pass && c.name != "lambda_minimizer")
            .map(describe)
            .collect();
        pass &= bad.is_empty() && ls.lambdas.len() == 32;
        notes.push(if bad.is_empty() {
            format!("{} ok", f.id)
        } else {
            format!("{} {}", f.id, bad.join(" "))
        });
    }
    outcome(pass, notes.join(", "))
}

fn main() {
    let tol = Tolerances::default();
    let start = Instant::now();
    let entries = catalog();
    let fine: Vec<Swept> = entries.iter().map(|e| swept(e, 1024, &tol)).collect();
    let coarse: Vec<Swept> = entries.iter().map(|e| swept(e, 512, &tol)).collect();
    let t = trials(&fine);

    let mut results: Vec<(&str, Outcome)> = vec![
        ("co-area identity", coarea(&fine, &tol)),
        ("level budget vs total variation", step2(&coarse, &fine)),
        ("compact oscillation bound", compact_bound(&tol)),
        ("boundary oscillation bound", boundary_bound(&tol)),
        ("admissible paths", paths(&t)),
        ("chain estimate", chains(&t, &fine)),
        ("lambda sweep", lambda(&fine, &tol)),
    ];
    let schur = check_schur(100, SEED, tol.schur);
    results.push(("schur identity", outcome(schur.pass, describe(&schur))));
    let mut deriv_ok = true;
    let mut deriv = Vec::new();
    for e in &entries {
        let c = check_derivatives(&e.field, &e.domain, 100, SEED, tol.derivative);
        deriv_ok &= c.pass;
        deriv.push(format!("{} {:.3e}", e.field.id, c.lhs));
    }
    results.push(("derivative oracle", outcome(deriv_ok, deriv.join(", "))));
    let cfg = SuiteConfig {
        grid: 256,
        z_count: 128,
        seed: SEED,
        ..SuiteConfig::default()
    };
    let e = abp_core::builtin("modulated_bump").unwrap();
    let a = run_entry(&e, &cfg).unwrap().to_json();
    let b = run_entry(&e, &cfg).unwrap().to_json();
    results.push(("determinism", outcome(a == b, format!("{} bytes", a.len()))));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {:<32} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
