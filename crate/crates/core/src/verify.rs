//! Numeric checks of the co-area identity, the per-slice budget bound, the oscillation
//! estimates and the path chain, aggregated into a [`VerificationReport`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CatalogEntry, Domain, FieldSpec, Grid, ScalarField};
use crate::geom::{pairwise_sum, Point};
use crate::levelset::{component_budgets, phi_from_budgets, tv_of_slice, LevelSampler, LevelSlice};
use crate::quadrature::{
    integrate_abs_det_hessian, oscillation_boundary, oscillation_interior, schur_det_identity,
};
use crate::topology::{
    build_coloring, construct_path_boundary, construct_path_compact, validate_path, AdmissiblePath,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when `lhs ≤ rhs·(1 + tolerance) + slack`.
    Inequality,
    /// Passes when `|lhs − rhs| ≤ tolerance·max(|lhs|, |rhs|, slack)`.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<f64>,
    pub tolerance: f64,
    pub slack: f64,
    pub pass: bool,
    pub inconclusive: bool,
    pub notes: String,
}

fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    (rhs != 0.0).then(|| lhs / rhs)
}

impl Check {
    pub fn inequality(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        slack: f64,
    ) -> Check {
        Check {
            name: name.into(),
            kind: CheckKind::Inequality,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            tolerance,
            slack,
            pass: lhs <= rhs * (1.0 + tolerance) + slack,
            inconclusive: false,
            notes: String::new(),
        }
    }

    /// `eps_abs` floors the scale so that `0 = 0` passes.
    pub fn identity(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        eps_abs: f64,
    ) -> Check {
        let scale = lhs.abs().max(rhs.abs()).max(eps_abs);
        Check {
            name: name.into(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            tolerance,
            slack: eps_abs,
            pass: (lhs - rhs).abs() <= tolerance * scale,
            inconclusive: false,
            notes: String::new(),
        }
    }

    pub fn inconclusive(name: impl Into<String>, notes: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            kind: CheckKind::Inequality,
            lhs: 0.0,
            rhs: 0.0,
            ratio: None,
            tolerance: 0.0,
            slack: 0.0,
            pass: false,
            inconclusive: true,
            notes: notes.into(),
        }
    }

    /// A check that could not run because of an error.
    pub fn failed(name: impl Into<String>, err: &Error) -> Check {
        let mut c = Check::inconclusive(name, err.to_string());
        c.inconclusive = matches!(err, Error::Inconclusive(_));
        c
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Check {
        self.notes = notes.into();
        self
    }

    /// Relative error `|lhs − rhs| / max(|lhs|, |rhs|)`, zero when both vanish.
    pub fn relative_error(&self) -> f64 {
        let m = self.lhs.abs().max(self.rhs.abs());
        if m == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / m
        }
    }
}

/// Tolerances of the suite; any subset can be overridden from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub coarea_compact: f64,
    pub coarea_general: f64,
    pub step3: f64,
    pub theorem: f64,
    pub lambda: f64,
    /// `ε_lem(h) = slack_factor·h·max|∇f|`.
    pub slack_factor: f64,
    pub derivative: f64,
    pub schur: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            coarea_compact: 0.02,
            coarea_general: 0.04,
            step3: 0.02,
            theorem: 0.02,
            lambda: 0.02,
            slack_factor: 8.0,
            derivative: 1e-6,
            schur: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub grid: usize,
    pub z_count: usize,
    pub seed: u64,
    pub path_trials: usize,
    pub derivative_points: usize,
    pub schur_matrices: usize,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            grid: 1024,
            z_count: 512,
            seed: 0,
            path_trials: 10,
            derivative_points: 100,
            schur_matrices: 100,
            tolerances: Tolerances::default(),
        }
    }
}

/// Per-slice values recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub z: f64,
    pub regular: bool,
    pub loops: usize,
    pub arcs: usize,
    pub tv: f64,
    pub phi: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

/// All slices of a field on a uniform level grid.
#[derive(Debug, Clone)]
pub struct SliceSweep {
    pub zs: Vec<f64>,
    pub dz: f64,
    /// `None` for skipped levels (irregular, or `z = 0` for compactly supported fields).
    pub slices: Vec<Option<LevelSlice>>,
    pub records: Vec<SliceRecord>,
    pub eps_lem: f64,
    pub tol_x: f64,
    pub lipschitz: f64,
    /// The `f_{x₂}` range is a single value, so there are no slices to sample.
    pub degenerate: bool,
}

impl SliceSweep {
    pub fn skipped(&self) -> Vec<f64> {
        self.zs
            .iter()
            .zip(&self.slices)
            .filter(|(_, s)| s.is_none())
            .map(|(z, _)| *z)
            .collect()
    }

    pub fn regular_count(&self) -> usize {
        self.slices.iter().filter(|s| s.is_some()).count()
    }

    fn trapezoid(&self, vals: impl Iterator<Item = f64>) -> f64 {
        let n = self.zs.len();
        let terms: Vec<f64> = vals
            .enumerate()
            .map(|(k, v)| {
                if k == 0 || k + 1 == n {
                    0.5 * v * self.dz
                } else {
                    v * self.dz
                }
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// Trapezoid integral of `TV_z(f_{x₁})`, skipped levels contributing zero.
    pub fn tv_integral(&self) -> f64 {
        self.trapezoid(
            self.records
                .iter()
                .map(|r| if r.regular { r.tv } else { 0.0 }),
        )
    }

    pub fn phi_integral(&self) -> f64 {
        self.trapezoid(
            self.records
                .iter()
                .map(|r| if r.regular { r.phi } else { 0.0 }),
        )
    }
}

/// Whether `f` vanishes outside a set contained in `K`.
pub fn supported_in(f: &ScalarField, k: &Domain) -> bool {
    f.compactly_supported() && f.support_domain().is_none_or(|d| d.is_inside(k))
}

/// Extracts every level of a `z_count`-point grid over the range of `f_{x₂}` on `K`.
pub fn sweep(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    z_count: usize,
    slack_factor: f64,
) -> SliceSweep {
    let sampler = LevelSampler::new(f, *k, *g);
    let eps_lem = slack_factor * sampler.spacing() * sampler.lipschitz;
    let tol_x = sampler.tol_x();
    let range = sampler.z_max - sampler.z_min;
    let degenerate = range <= 1e-12 * sampler.z_max.abs().max(sampler.z_min.abs()).max(1e-300);
    if degenerate {
        return SliceSweep {
            zs: Vec::new(),
            dz: 0.0,
            slices: Vec::new(),
            records: Vec::new(),
            eps_lem,
            tol_x,
            lipschitz: sampler.lipschitz,
            degenerate,
        };
    }
    let zs = sampler.z_grid(z_count);
    let dz = zs[1] - zs[0];
    let skip_zero = f.compactly_supported();
    let z_eps = 1e-12 * sampler.z_max.abs().max(sampler.z_min.abs());
    let out: Vec<(Option<LevelSlice>, SliceRecord)> = zs
        .par_iter()
        .map(|&z| {
            let s = sampler.extract(z);
            let keep = s.regular && !(skip_zero && z.abs() <= z_eps);
            let mut r = SliceRecord {
                z,
                regular: keep,
                loops: s.loops.len(),
                arcs: s.arcs.len(),
                tv: 0.0,
                phi: 0.0,
                phi1: 0.0,
                phi2: 0.0,
                phi3: 0.0,
            };
            if !keep {
                return (None, r);
            }
            r.tv = tv_of_slice(&s);
            let p = phi_from_budgets(&component_budgets(&s, tol_x));
            r.phi = p.total;
            r.phi1 = p.phi1;
            r.phi2 = p.phi2;
            r.phi3 = p.phi3;
            (Some(s), r)
        })
        .collect();
    let (slices, records) = out.into_iter().unzip();
    SliceSweep {
        zs,
        dz,
        slices,
        records,
        eps_lem,
        tol_x,
        lipschitz: sampler.lipschitz,
        degenerate,
    }
}

/// Co-area identity between `∫_K |det D²f|` and `∫ TV_z(f_{x₁}) dz`.
pub fn check_coarea(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    sw: &SliceSweep,
    tol: &Tolerances,
) -> Result<Check> {
    let lhs = integrate_abs_det_hessian(f, k, g)?.value;
    let tolerance = if supported_in(f, k) {
        tol.coarea_compact
    } else {
        tol.coarea_general
    };
    if !sw.degenerate && sw.regular_count() == 0 {
        return Ok(Check::inconclusive(
            "coarea",
            "every sampled level is irregular",
        ));
    }
    let rhs = sw.tv_integral();
    Ok(
        Check::identity("coarea", lhs, rhs, tolerance, 1e-12).with_notes(format!(
            "{} levels, {} skipped",
            sw.zs.len(),
            sw.skipped().len()
        )),
    )
}

/// `φ(z) ≤ diam(K)·TV_z(f_{x₁})` on every kept slice; reports the worst excess.
pub fn check_step2(k: &Domain, sw: &SliceSweep) -> Check {
    let d = k.diameter();
    let mut worst: Option<&SliceRecord> = None;
    let mut worst_ex = f64::NEG_INFINITY;
    let mut tight = 0.0f64;
    for r in sw.records.iter().filter(|r| r.regular) {
        let ex = r.phi - d * r.tv;
        if ex > worst_ex {
            worst_ex = ex;
            worst = Some(r);
        }
        if r.tv > 0.0 {
            tight = tight.max(r.phi / (d * r.tv));
        }
    }
    let (lhs, rhs, z) = worst
        .map(|r| (r.phi, d * r.tv, r.z))
        .unwrap_or((0.0, 0.0, 0.0));
    let n = sw.regular_count();
    let fails = sw
        .records
        .iter()
        .filter(|r| r.regular && r.phi > d * r.tv + sw.eps_lem)
        .count();
    Check::inequality("step2", lhs, rhs, 0.0, sw.eps_lem).with_notes(format!(
        "{n} slices, {fails} over budget; worst excess at z = {z:.6e}; max tightness {tight:.6e}"
    ))
}

/// `(Osc_K f)² ≤ 16·diam(K)·∫φ(z) dz`.
pub fn check_step3(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    sw: &SliceSweep,
    tol: &Tolerances,
) -> Result<Check> {
    if !supported_in(f, k) {
        return Err(Error::WrongCase(
            "the level-budget estimate needs compact support in K".into(),
        ));
    }
    let osc = oscillation_interior(f, k, g)?;
    let rhs = 16.0 * k.diameter() * sw.phi_integral();
    Ok(Check::inequality("step3", osc * osc, rhs, tol.step3, 0.0))
}

pub fn check_theorem_compact(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    tol: &Tolerances,
) -> Result<Check> {
    if !supported_in(f, k) {
        return Err(Error::InvalidInput("support of f is not inside K".into()));
    }
    let osc = oscillation_interior(f, k, g)?;
    let d = k.diameter();
    let rhs = 16.0 * d * d * integrate_abs_det_hessian(f, k, g)?.value;
    Ok(Check::inequality(
        "theorem_compact",
        osc * osc,
        rhs,
        tol.theorem,
        0.0,
    ))
}

pub fn check_theorem_general(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    tol: &Tolerances,
) -> Result<Check> {
    let osc = oscillation_interior(f, k, g)?;
    let osc_b = oscillation_boundary(f, k, g)?;
    let ex = (osc - osc_b).max(0.0);
    let d = k.diameter();
    let rhs = 16.0 * d * d * integrate_abs_det_hessian(f, k, g)?.value;
    Ok(
        Check::inequality("theorem_general", ex * ex, rhs, tol.theorem, 0.0)
            .with_notes(format!("Osc_K = {osc:.6e}, Osc_dK = {osc_b:.6e}")),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweep {
    pub a: f64,
    pub lambdas: Vec<f64>,
    pub e_measure: Vec<f64>,
    /// `(a/λ)·diam(K) + λ`.
    pub osc_bound: Vec<f64>,
    pub lambda_star: f64,
    pub osc: f64,
}

pub const LAMBDA_COUNT: usize = 32;

/// Markov sets `E_λ = {z : φ(z) ≥ λ}` on the level grid and the optimized oscillation bound.
pub fn lambda_sweep(f: &ScalarField, k: &Domain, g: &Grid, sw: &SliceSweep) -> Result<LambdaSweep> {
    if !supported_in(f, k) {
        return Err(Error::WrongCase(
            "the level-budget estimate needs compact support in K".into(),
        ));
    }
    let d = k.diameter();
    let a = 1.01 * sw.phi_integral();
    let lambda_star = (a * d).sqrt();
    let centre = if lambda_star > 0.0 { lambda_star } else { 1.0 };
    let lambdas: Vec<f64> = (0..LAMBDA_COUNT)
        .map(|i| centre * 10f64.powf(-1.5 + 3.0 * i as f64 / (LAMBDA_COUNT - 1) as f64))
        .collect();
    let e_measure = lambdas
        .iter()
        .map(|&l| {
            sw.records
                .iter()
                .filter(|r| r.regular && r.phi >= l)
                .count() as f64
                * sw.dz
        })
        .collect();
    let osc_bound = lambdas.iter().map(|&l| a / l * d + l).collect();
    Ok(LambdaSweep {
        a,
        lambdas,
        e_measure,
        osc_bound,
        lambda_star,
        osc: oscillation_interior(f, k, g)?,
    })
}

/// Markov bound, minimizer location and the resulting oscillation bound.
pub fn lambda_checks(ls: &LambdaSweep, k: &Domain, tol: &Tolerances) -> Vec<Check> {
    let d = k.diameter();
    let (mut lhs, mut rhs) = (0.0, ls.a);
    let mut worst = f64::NEG_INFINITY;
    for (&l, &e) in ls.lambdas.iter().zip(&ls.e_measure) {
        let bound = ls.a / l;
        if e - bound > worst {
            worst = e - bound;
            lhs = e * l;
            rhs = ls.a;
        }
    }
    let markov = Check::inequality("lambda_markov", lhs, rhs, 0.0, 0.0).with_notes(format!(
        "|E_λ|·λ against a over {} values",
        ls.lambdas.len()
    ));
    let closed = (ls.a * d).sqrt();
    let star = Check::identity("lambda_star", ls.lambda_star, closed, 1e-12, 1e-300);
    let mut argmin = 0;
    for i in 0..ls.osc_bound.len() {
        if ls.osc_bound[i] < ls.osc_bound[argmin] {
            argmin = i;
        }
    }
    let step = if ls.lambdas.len() > 1 {
        (ls.lambdas[1] / ls.lambdas[0]).ln()
    } else {
        0.0
    };
    let offset = if ls.lambda_star > 0.0 {
        (ls.lambdas[argmin] / ls.lambda_star).ln().abs()
    } else {
        0.0
    };
    let min_bound = ls.a / ls.lambda_star.max(f64::MIN_POSITIVE) * d + ls.lambda_star;
    let minimizer =
        Check::inequality("lambda_minimizer", offset, step, 0.0, 1e-12).with_notes(format!(
            "bound at λ* = {:.6e}, best on grid = {:.6e}",
            if ls.lambda_star > 0.0 { min_bound } else { 0.0 },
            ls.osc_bound[argmin]
        ));
    let osc = Check::inequality(
        "lambda_osc",
        ls.osc,
        4.0 * (ls.a * d).sqrt(),
        tol.lambda,
        0.0,
    );
    vec![markov, star, minimizer, osc]
}

/// Outcome of the chain estimate along one path, for the effective field `σ·f` at level
/// `σ·z₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    /// Largest `g(end) − g(start) − z·p₂(end − start)` over vertical segments.
    pub vertical_excess: f64,
    /// Largest per-component change of `S_z` minus that component's budget.
    pub component_excess: f64,
    /// `g(x*) − g(q)`.
    pub total_change: f64,
    /// `φ(z) + z·p₂(x* − q)`.
    pub signed_bound: f64,
    /// `φ(z) + |z|·diam(K)`.
    pub bound: f64,
    pub phi: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Sums `f`-changes along `path` and checks vertical segments, per-component jumps and the
/// total against their bounds. `sign` is −1 when the path was built for `−f` on the negated
/// slice `s`.
pub fn check_path_chain(
    f: &ScalarField,
    k: &Domain,
    s: &LevelSlice,
    sign: f64,
    path: &AdmissiblePath,
    tol_x: f64,
    slack: f64,
) -> ChainResult {
    let z = s.z;
    let g = |p: Point| sign * f.evaluate(p);
    let budgets = component_budgets(s, tol_x);
    let phi = phi_from_budgets(&budgets).total;
    let mut vertical_excess = f64::NEG_INFINITY;
    let mut spent = vec![0.0; budgets.len()];
    for sg in &path.segments {
        let df = g(sg.end) - g(sg.start);
        let dy = sg.end.y - sg.start.y;
        if sg.kind.is_vertical() {
            vertical_excess = vertical_excess.max(df - z * dy);
        } else if let Some(id) = sg.component_id {
            spent[id] += df - z * dy;
        }
    }
    let mut component_excess = f64::NEG_INFINITY;
    for (id, b) in budgets.iter().enumerate() {
        if path.segments.iter().any(|sg| sg.component_id == Some(id)) {
            component_excess = component_excess.max(spent[id] - b.value);
        }
    }
    if component_excess == f64::NEG_INFINITY {
        component_excess = 0.0;
    }
    let (q, x) = (path.start_point, path.end_point);
    let total_change = g(x) - g(q);
    let signed_bound = phi + z * (x.y - q.y);
    let bound = phi + z.abs() * k.diameter();
    let pass = vertical_excess <= slack
        && component_excess <= slack
        && total_change <= signed_bound + slack
        && total_change <= bound + slack;
    ChainResult {
        vertical_excess,
        component_excess,
        total_change,
        signed_bound,
        bound,
        phi,
        slack,
        pass,
    }
}

/// One randomized path construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrial {
    pub field_id: String,
    pub z: f64,
    pub x_star: Point,
    pub parity: u8,
    /// The path was built for `−f` at `−z` because the requested parity is the other one.
    pub negated: bool,
    pub components: usize,
    pub segments: usize,
    pub cases: Vec<u8>,
    pub retries: usize,
    pub violations: Vec<String>,
    pub chain: Option<ChainResult>,
    pub error: Option<String>,
}

impl PathTrial {
    pub fn admissible(&self) -> bool {
        self.error.is_none() && self.violations.is_empty()
    }
}

/// The slice, field sign and parity actually handed to the path construction. The coloring
/// whose `−1` set is `{f_{x₂} < z}` has parity 1 exactly when `f_{x₂}(x*) < z`; the other
/// parity is the same construction for `−f` at `−z`.
pub fn effective_slice(
    f: &ScalarField,
    s: &LevelSlice,
    x_star: Point,
    parity: u8,
) -> (LevelSlice, f64) {
    let consistent = u8::from(f.jet(x_star).gy < s.z);
    if parity == consistent {
        (s.clone(), 1.0)
    } else {
        (s.negated(), -1.0)
    }
}

/// Builds, validates and chain-checks a path for `x*` on slice `s`.
#[allow(clippy::too_many_arguments)]
pub fn run_path(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    s: &LevelSlice,
    x_star: Point,
    parity: u8,
    tol_x: f64,
    slack: f64,
) -> Result<(AdmissiblePath, PathTrial)> {
    let (eff, sign) = effective_slice(f, s, x_star, parity);
    let col = build_coloring(&eff, k, g, x_star, parity)?;
    let path = if eff.arcs.is_empty() {
        construct_path_compact(&eff, &col, x_star, k)?
    } else {
        let fv: Vec<Vec<f64>> = eff.components().map(|c| c.samples_fx1.clone()).collect();
        construct_path_boundary(&eff, &col, &fv, x_star, k)?
    };
    let report = validate_path(&path, &eff, &col, k);
    let chain = check_path_chain(f, k, &eff, sign, &path, tol_x, slack);
    let trial = PathTrial {
        field_id: f.id.clone(),
        z: s.z,
        x_star,
        parity,
        negated: sign < 0.0,
        components: s.component_count(),
        segments: path.segments.len(),
        cases: path.cases.clone(),
        retries: path.retries,
        violations: report.violations,
        chain: Some(chain),
        error: None,
    };
    Ok((path, trial))
}

fn empty_slice(z: f64) -> LevelSlice {
    LevelSlice {
        z,
        regular: true,
        min_grad_fx2_on_curve: f64::INFINITY,
        snapped_nodes: 0,
        eps_zero: 0.0,
        loops: Vec::new(),
        arcs: Vec::new(),
    }
}

/// `n` seeded path trials on slices of one sweep, alternating parities. Slices with
/// components are preferred when there are any.
pub fn path_trials(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    sw: &SliceSweep,
    n: usize,
    seed: u64,
) -> Vec<PathTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonempty: Vec<&LevelSlice> = sw
        .slices
        .iter()
        .flatten()
        .filter(|s| !s.is_empty())
        .collect();
    let any: Vec<&LevelSlice> = sw.slices.iter().flatten().collect();
    let empty = empty_slice(0.0);
    (0..n)
        .map(|t| {
            let pool = if nonempty.is_empty() { &any } else { &nonempty };
            let s = if pool.is_empty() {
                &empty
            } else {
                pool[rng.random_range(0..pool.len())]
            };
            path_trial(f, k, g, s, (t % 2) as u8, sw, &mut rng)
        })
        .collect()
}

fn path_trial(
    f: &ScalarField,
    k: &Domain,
    g: &Grid,
    s: &LevelSlice,
    parity: u8,
    sw: &SliceSweep,
    rng: &mut ChaCha8Rng,
) -> PathTrial {
    let mut trial = PathTrial {
        field_id: f.id.clone(),
        z: s.z,
        x_star: Point::default(),
        parity,
        negated: false,
        components: s.component_count(),
        segments: 0,
        cases: Vec::new(),
        retries: 0,
        violations: Vec::new(),
        chain: None,
        error: None,
    };
    // resample until the base point is inside K and in a cell clear of Σ
    let (lo, hi) = k.bbox();
    for _ in 0..1000 {
        let x = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if !k.contains(x) {
            continue;
        }
        trial.x_star = x;
        match run_path(f, k, g, s, x, parity, sw.tol_x, sw.eps_lem) {
            Ok((_, t)) => return t,
            Err(Error::InvalidBasePoint(_)) => continue,
            Err(e) => {
                trial.error = Some(e.to_string());
                return trial;
            }
        }
    }
    trial.error = Some("no base point found clear of the level set".into());
    trial
}

/// Admissibility, segment-count and chain checks over a batch of trials.
pub fn path_checks(trials: &[PathTrial], slack: f64) -> Vec<Check> {
    let n = trials.len();
    let bad: Vec<&PathTrial> = trials.iter().filter(|t| !t.admissible()).collect();
    let mut adm = Check::inequality("path_admissible", bad.len() as f64, 0.0, 0.0, 0.0);
    adm.notes = match bad.first() {
        Some(t) => format!(
            "{} of {n} trials failed; first: z = {:.6e}, x* = ({:.6e}, {:.6e}): {}",
            bad.len(),
            t.z,
            t.x_star.x,
            t.x_star.y,
            t.error.clone().unwrap_or_else(|| t.violations.join("; "))
        ),
        None => format!("{n} trials"),
    };
    let (mut seg_l, mut seg_r) = (0.0, 0.0);
    let mut seg_ex = f64::NEG_INFINITY;
    for t in trials.iter().filter(|t| t.error.is_none()) {
        let cap = (4 * t.components + 2) as f64;
        if t.segments as f64 - cap > seg_ex {
            seg_ex = t.segments as f64 - cap;
            seg_l = t.segments as f64;
            seg_r = cap;
        }
    }
    let segs = Check::inequality("path_segments", seg_l, seg_r, 0.0, 0.0);
    let chains: Vec<&ChainResult> = trials.iter().filter_map(|t| t.chain.as_ref()).collect();
    let worst = |key: &dyn Fn(&ChainResult) -> (f64, f64)| {
        chains
            .iter()
            .map(|c| key(c))
            .fold((0.0, 0.0, f64::NEG_INFINITY), |acc, (l, r)| {
                if l - r > acc.2 {
                    (l, r, l - r)
                } else {
                    acc
                }
            })
    };
    let v = worst(&|c| (c.vertical_excess, 0.0));
    let b = worst(&|c| (c.component_excess, 0.0));
    let t = worst(&|c| (c.total_change, c.signed_bound.min(c.bound)));
    let chain_fail = chains.iter().filter(|c| !c.pass).count();
    vec![
        adm,
        segs,
        Check::inequality("vertical_segments", v.0, v.1, 0.0, slack),
        Check::inequality("path_component_budgets", b.0, b.1, 0.0, slack),
        Check::inequality("chain_estimate", t.0, t.1, 0.0, slack)
            .with_notes(format!("{} chains, {chain_fail} over bound", chains.len())),
    ]
}

/// Central-difference step of the derivative check.
pub const FD_STEP: f64 = 1e-4;

/// Largest relative deviation of the analytic gradient and Hessian from central differences
/// at `n` seeded points of `K`. Points within `2h` of a support boundary, where the third
/// derivative jumps, are not sampled. Errors are relative to the larger of the local norm
/// and 1e-3 of the largest norm over the sample.
pub fn check_derivatives(f: &ScalarField, k: &Domain, n: usize, seed: u64, tol: f64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let h = FD_STEP;
    let (lo, hi) = k.bbox();
    let mut pts = Vec::with_capacity(n);
    let mut tries = 0;
    while pts.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if k.contains(p) && f.distance_to_support_boundary(p) > 2.0 * h {
            pts.push(p);
        }
    }
    let errs: Vec<(f64, f64, f64, f64)> = pts
        .iter()
        .map(|&p| {
            let ex = Point::new(1.0, 0.0);
            let ey = Point::new(0.0, 1.0);
            let gfd = [
                central(|q| f.evaluate(q), p, ex, h),
                central(|q| f.evaluate(q), p, ey, h),
            ];
            let hfd = [
                central(|q| f.gradient(q)[0], p, ex, h),
                0.5 * (central(|q| f.gradient(q)[1], p, ex, h)
                    + central(|q| f.gradient(q)[0], p, ey, h)),
                central(|q| f.gradient(q)[1], p, ey, h),
            ];
            let ga = f.gradient(p);
            let ha = f.hessian(p);
            let ha = [ha[0][0], ha[0][1], ha[1][1]];
            let gn = ga[0].hypot(ga[1]);
            let hn = (ha[0] * ha[0] + 2.0 * ha[1] * ha[1] + ha[2] * ha[2]).sqrt();
            let ge = (ga[0] - gfd[0]).hypot(ga[1] - gfd[1]);
            let he = ((ha[0] - hfd[0]).powi(2)
                + 2.0 * (ha[1] - hfd[1]).powi(2)
                + (ha[2] - hfd[2]).powi(2))
            .sqrt();
            (ge, gn, he, hn)
        })
        .collect();
    let gmax = errs.iter().fold(0.0f64, |m, e| m.max(e.1));
    let hmax = errs.iter().fold(0.0f64, |m, e| m.max(e.3));
    let rel = |e: f64, v: f64, m: f64| {
        let s = v.max(1e-3 * m);
        if s == 0.0 {
            if e == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            e / s
        }
    };
    let worst = errs
        .iter()
        .map(|&(ge, gn, he, hn)| rel(ge, gn, gmax).max(rel(he, hn, hmax)))
        .fold(0.0f64, f64::max);
    Check::inequality("derivatives", worst, tol, 0.0, 0.0)
        .with_notes(format!("{} points", pts.len()))
}

/// Fourth-order central difference of `u` along `e`; it reaches `2h` from `p`.
fn central(u: impl Fn(Point) -> f64, p: Point, e: Point, h: f64) -> f64 {
    let at = |t: f64| u(p + e * t);
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

/// Random symmetric 3×3 matrices with entries in `[−1, 1]` and corner pivot `|c| ≥ 0.1`.
pub fn random_schur_matrices(n: usize, seed: u64) -> Vec<[[f64; 3]; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c4u64);
    (0..n)
        .map(|_| {
            let mut m = [[0.0; 3]; 3];
            for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
                let v = rng.random_range(-1.0..1.0);
                m[i][j] = v;
                m[j][i] = v;
            }
            let c: f64 = rng.random_range(0.1..1.0);
            m[2][2] = if rng.random_bool(0.5) { c } else { -c };
            m
        })
        .collect()
}

pub fn check_schur(n: usize, seed: u64, tol: f64) -> Check {
    let mut worst = 0.0f64;
    for m in random_schur_matrices(n, seed) {
        match schur_det_identity(&m) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return Check::failed("schur", &e),
        }
    }
    Check::inequality("schur", worst, tol, 0.0, 0.0).with_notes(format!("{n} matrices"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub field_id: String,
    pub field: FieldSpec,
    pub domain: Domain,
    pub grid: [usize; 2],
    pub z_samples: usize,
    pub seed: u64,
    pub compact: bool,
    pub checks: Vec<Check>,
    pub skipped_slices: Vec<f64>,
    pub slices: Vec<SliceRecord>,
    pub lambda_sweep: Option<LambdaSweep>,
    pub paths: Vec<PathTrial>,
}

impl VerificationReport {
    /// All checks pass, ignoring inconclusive ones.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.inconclusive)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// JSON with every number rounded to 6 significant digits.
    pub fn to_json(&self) -> String {
        to_json_rounded(self)
    }
}

/// Rounds to 6 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn round_value(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n
                    .as_f64()
                    .map(round_sig)
                    .and_then(serde_json::Number::from_f64)
                {
                    *n = r;
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_value),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON of any serializable value with floats rounded to 6 significant digits.
pub fn to_json_rounded<T: Serialize>(x: &T) -> String {
    let mut v = serde_json::to_value(x).expect("report serializes");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes")
}

fn push(checks: &mut Vec<Check>, name: &str, r: Result<Check>) {
    checks.push(r.unwrap_or_else(|e| Check::failed(name, &e)));
}

/// Runs every check that applies to `f` on `K`.
pub fn run_suite(f: &ScalarField, k: &Domain, cfg: &SuiteConfig) -> Result<VerificationReport> {
    k.validate()?;
    let g = Grid::square(*k, cfg.grid)?;
    let tol = &cfg.tolerances;
    let sw = sweep(f, k, &g, cfg.z_count, tol.slack_factor);
    let compact = supported_in(f, k);
    let mut checks = vec![check_derivatives(
        f,
        k,
        cfg.derivative_points,
        cfg.seed,
        tol.derivative,
    )];
    push(&mut checks, "coarea", check_coarea(f, k, &g, &sw, tol));
    checks.push(check_step2(k, &sw));
    let mut lambda = None;
    if compact {
        push(&mut checks, "step3", check_step3(f, k, &g, &sw, tol));
        push(
            &mut checks,
            "theorem_compact",
            check_theorem_compact(f, k, &g, tol),
        );
        match lambda_sweep(f, k, &g, &sw) {
            Ok(ls) => {
                checks.extend(lambda_checks(&ls, k, tol));
                lambda = Some(ls);
            }
            Err(e) => checks.push(Check::failed("lambda", &e)),
        }
    }
    push(
        &mut checks,
        "theorem_general",
        check_theorem_general(f, k, &g, tol),
    );
    let paths = path_trials(f, k, &g, &sw, cfg.path_trials, cfg.seed);
    checks.extend(path_checks(&paths, sw.eps_lem));
    checks.push(check_schur(cfg.schur_matrices, cfg.seed, tol.schur));
    Ok(VerificationReport {
        field_id: f.id.clone(),
        field: f.spec.clone(),
        domain: *k,
        grid: [g.nx, g.ny],
        z_samples: sw.zs.len(),
        seed: cfg.seed,
        compact,
        checks,
        skipped_slices: sw.skipped(),
        slices: sw.records.clone(),
        lambda_sweep: lambda,
        paths,
    })
}

/// [`run_suite`] on a catalog entry's default domain.
pub fn run_entry(e: &CatalogEntry, cfg: &SuiteConfig) -> Result<VerificationReport> {
    run_suite(&e.field, &e.domain, cfg)
}
