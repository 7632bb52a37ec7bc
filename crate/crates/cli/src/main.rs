mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abp_core::levelset::{LevelSampler, LevelSlice, LevelSource};
use abp_core::topology::{
    build_coloring, construct_path_boundary, construct_path_compact, validate_path, AdmissiblePath,
    Coloring,
};
use abp_core::verify::{
    check_coarea, effective_slice, run_path, run_suite, sweep, to_json_rounded, ChainResult,
    SuiteConfig, Tolerances,
};
use abp_core::{builtin, catalog, Domain, Error, FieldSpec, Grid, Point, ScalarField};
use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use svg::{fmt6, Canvas};

#[derive(Parser)]
#[command(
    name = "abp",
    version,
    about = "Numerical checks of the planar ABP inequality"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full verification suite and write report.json.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        path_trials: usize,
    },
    /// Draw one level set with its coloring as slice_<z>.svg.
    Levelset {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        slice: SliceArgs,
    },
    /// Construct, validate and draw an admissible path as path_<z>.svg and path_<z>.json.
    Path {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        slice: SliceArgs,
    },
    /// Write per-level total variation and budget to coarea.csv.
    Coarea {
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in fields.
    Catalog,
}

#[derive(Args)]
struct Common {
    /// Built-in field id, or a JSON file holding a field spec.
    #[arg(long)]
    field: String,
    /// `disk:cx,cy,r`, `rect:x0,y0,x1,y1`, or a JSON domain (inline or as a file).
    #[arg(long)]
    domain: Option<String>,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    #[arg(long, default_value_t = 512)]
    zcount: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Partial tolerance table as JSON, inline or as a file.
    #[arg(long)]
    tol_overrides: Option<String>,
}

#[derive(Args)]
struct SliceArgs {
    #[arg(long, allow_negative_numbers = true)]
    z: f64,
    /// Base point `x,y`; drawn at random from the seed when absent.
    #[arg(long, allow_negative_numbers = true)]
    xstar: Option<String>,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    parity: u8,
    /// Scalar whose level set is drawn.
    #[arg(long, value_enum, default_value_t = Source::Fx2)]
    level_source: Source,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Fx2,
    Value,
}

impl From<Source> for LevelSource {
    fn from(s: Source) -> LevelSource {
        match s {
            Source::Fx2 => LevelSource::Fx2,
            Source::Value => LevelSource::Value,
        }
    }
}

/// Bad arguments or malformed input files map to status 2, everything else to 1.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Verify {
            common,
            path_trials,
        } => cmd_verify(&common, path_trials),
        Cmd::Levelset { common, slice } => cmd_levelset(&common, &slice),
        Cmd::Path { common, slice } => cmd_path(&common, &slice),
        Cmd::Coarea { common } => cmd_coarea(&common),
        Cmd::Catalog => cmd_catalog(),
    };
    match r {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn inline_or_file(s: &str) -> Result<String, Failure> {
    let t = s.trim_start();
    if t.starts_with('{') {
        Ok(s.to_string())
    } else {
        fs::read_to_string(s)
            .with_context(|| format!("cannot read {s}"))
            .map_err(usage)
    }
}

fn load_field(arg: &str) -> Result<(ScalarField, Option<Domain>), Failure> {
    if let Some(e) = builtin(arg) {
        return Ok((e.field, Some(e.domain)));
    }
    if !Path::new(arg).exists() {
        return Err(usage(anyhow!(
            "`{arg}` is neither a built-in field nor a file (see `abp catalog`)"
        )));
    }
    let text = inline_or_file(arg)?;
    let field = match serde_json::from_str::<ScalarField>(&text) {
        Ok(f) => f,
        Err(_) => {
            let spec: FieldSpec = serde_json::from_str(&text)
                .with_context(|| format!("malformed field file {arg}"))
                .map_err(usage)?;
            let id = Path::new(arg)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "field".into());
            ScalarField { id, spec }
        }
    };
    let field = ScalarField::new(field.id, field.spec)
        .with_context(|| format!("invalid field in {arg}"))
        .map_err(usage)?;
    Ok((field, None))
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("cannot parse numbers in `{s}`"))
        .map_err(usage)?;
    if v.len() != n {
        return Err(usage(anyhow!("expected {n} numbers in `{s}`")));
    }
    Ok(v)
}

fn parse_domain(s: &str) -> Result<Domain, Failure> {
    let d = if let Some(rest) = s.strip_prefix("disk:") {
        let v = numbers(rest, 3)?;
        Domain::Disk {
            center: Point::new(v[0], v[1]),
            radius: v[2],
        }
    } else if let Some(rest) = s.strip_prefix("rect:") {
        let v = numbers(rest, 4)?;
        Domain::Rect {
            lo: Point::new(v[0], v[1]),
            hi: Point::new(v[2], v[3]),
        }
    } else {
        serde_json::from_str(&inline_or_file(s)?)
            .with_context(|| format!("malformed domain `{s}`"))
            .map_err(usage)?
    };
    d.validate().map_err(usage)?;
    Ok(d)
}

fn parse_point(s: &str) -> Result<Point, Failure> {
    let v = numbers(s, 2)?;
    Ok(Point::new(v[0], v[1]))
}

fn parse_tolerances(arg: Option<&str>) -> Result<Tolerances, Failure> {
    let Some(arg) = arg else {
        return Ok(Tolerances::default());
    };
    let text = inline_or_file(arg)?;
    let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)
        .context("malformed tolerance overrides")
        .map_err(usage)?;
    let known = serde_json::to_value(Tolerances::default()).expect("tolerances serialize");
    if let Some(k) = map.keys().find(|k| known.get(k.as_str()).is_none()) {
        return Err(usage(anyhow!("unknown tolerance `{k}`")));
    }
    serde_json::from_value(serde_json::Value::Object(map))
        .context("malformed tolerance overrides")
        .map_err(usage)
}

struct Setup {
    field: ScalarField,
    domain: Domain,
    grid: Grid,
    tolerances: Tolerances,
}

fn setup(c: &Common) -> Result<Setup, Failure> {
    let (field, default) = load_field(&c.field)?;
    let domain = match (&c.domain, default) {
        (Some(s), _) => parse_domain(s)?,
        (None, Some(d)) => d,
        (None, None) => field.support_domain().ok_or_else(|| {
            usage(anyhow!(
                "field `{}` has no default domain; pass --domain",
                field.id
            ))
        })?,
    };
    if c.grid < 8 {
        return Err(usage(anyhow!("--grid must be at least 8")));
    }
    if c.zcount < 4 {
        return Err(usage(anyhow!("--zcount must be at least 4")));
    }
    let grid = Grid::square(domain, c.grid).map_err(usage)?;
    let tolerances = parse_tolerances(c.tol_overrides.as_deref())?;
    fs::create_dir_all(&c.out).with_context(|| format!("cannot create {}", c.out.display()))?;
    Ok(Setup {
        field,
        domain,
        grid,
        tolerances,
    })
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_verify(c: &Common, path_trials: usize) -> Outcome {
    let s = setup(c)?;
    let cfg = SuiteConfig {
        grid: c.grid,
        z_count: c.zcount,
        seed: c.seed,
        path_trials,
        tolerances: s.tolerances,
        ..SuiteConfig::default()
    };
    let report = run_suite(&s.field, &s.domain, &cfg).map_err(|e| usage(anyhow!(e)))?;
    for ch in &report.checks {
        let status = if ch.inconclusive {
            "SKIP"
        } else if ch.pass {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{status} {:<24} lhs={} rhs={}{}",
            ch.name,
            fmt6(ch.lhs),
            fmt6(ch.rhs),
            if ch.notes.is_empty() {
                String::new()
            } else {
                format!("  {}", ch.notes)
            }
        );
    }
    write(&c.out.join("report.json"), &report.to_json())?;
    Ok(report.passed())
}

/// The requested slice, or the nearest regular one on the `--zcount` level grid.
fn pick_slice(
    sampler: &LevelSampler,
    z: f64,
    zcount: usize,
    notes: &mut Vec<String>,
) -> LevelSlice {
    let s = sampler.extract(z);
    if s.regular {
        return s;
    }
    let mut zs = sampler.z_grid(zcount);
    zs.sort_by(|a, b| (a - z).abs().total_cmp(&(b - z).abs()));
    for w in zs {
        let t = sampler.extract(w);
        if t.regular {
            notes.push(format!(
                "z = {} is not regular; using z = {}",
                fmt6(z),
                fmt6(w)
            ));
            return t;
        }
    }
    notes.push(format!("no regular level near z = {}", fmt6(z)));
    s
}

fn random_point(k: &Domain, rng: &mut ChaCha8Rng) -> Point {
    let (lo, hi) = k.bbox();
    loop {
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if k.contains(p) {
            return p;
        }
    }
}

/// `x*` from the flag, or the first seeded point whose cell is clear of the level set.
fn base_point(
    a: &SliceArgs,
    k: &Domain,
    g: &Grid,
    s: &LevelSlice,
    seed: u64,
) -> Result<(Point, Coloring), Failure> {
    if let Some(x) = &a.xstar {
        let x = parse_point(x)?;
        if !k.contains(x) {
            return Err(usage(anyhow!("x* = {x:?} lies outside K")));
        }
        let col = build_coloring(s, k, g, x, a.parity).map_err(usage)?;
        return Ok((x, col));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let x = random_point(k, &mut rng);
        if let Ok(col) = build_coloring(s, k, g, x, a.parity) {
            return Ok((x, col));
        }
    }
    Err(Failure::Run(anyhow!(
        "no base point clear of the level set"
    )))
}

fn title(f: &ScalarField, s: &LevelSlice, a: &SliceArgs) -> String {
    format!(
        "{}  {} = {}  loops {}  arcs {}  parity {}",
        f.id,
        match a.level_source {
            Source::Fx2 => "f_x2",
            Source::Value => "f",
        },
        fmt6(s.z),
        s.loops.len(),
        s.arcs.len(),
        a.parity
    )
}

fn cmd_levelset(c: &Common, a: &SliceArgs) -> Outcome {
    let st = setup(c)?;
    let sampler = LevelSampler::with_source(&st.field, st.domain, st.grid, a.level_source.into());
    let mut notes = Vec::new();
    let s = pick_slice(&sampler, a.z, c.zcount, &mut notes);
    if s.is_empty() {
        notes.push("empty level set".into());
    }
    let mut canvas = Canvas::new(&st.domain);
    match base_point(a, &st.domain, &st.grid, &s, c.seed) {
        Ok((x, col)) => {
            canvas.shade(&st.domain, &col);
            canvas.boundary(&st.domain);
            canvas.slice(&s);
            canvas.point(x, "x*");
        }
        Err(Failure::Run(e)) => {
            notes.push(format!("no coloring: {e}"));
            canvas.boundary(&st.domain);
            canvas.slice(&s);
        }
        Err(e) => return Err(e),
    }
    canvas.title(&title(&st.field, &s, a));
    for n in &notes {
        eprintln!("warning: {n}");
    }
    if !notes.is_empty() {
        canvas.note(&notes.join("; "));
    }
    write(
        &c.out.join(format!("slice_{}.svg", fmt6(s.z))),
        &canvas.finish(),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct PathOutput {
    field_id: String,
    level_source: LevelSource,
    z: f64,
    x_star: Point,
    parity: u8,
    negated: bool,
    path: Option<AdmissiblePath>,
    violations: Vec<String>,
    chain: Option<ChainResult>,
    error: Option<String>,
    notes: Vec<String>,
}

fn cmd_path(c: &Common, a: &SliceArgs) -> Outcome {
    let st = setup(c)?;
    let (f, k, g) = (&st.field, &st.domain, &st.grid);
    let sampler = LevelSampler::with_source(f, *k, *g, a.level_source.into());
    let mut notes = Vec::new();
    let s = pick_slice(&sampler, a.z, c.zcount, &mut notes);
    let slack = st.tolerances.slack_factor * sampler.spacing() * sampler.lipschitz;
    let (x, _) = base_point(a, k, g, &s, c.seed)?;
    // the picture and the path use the slice the construction actually runs on
    let (eff, sign) = match a.level_source {
        Source::Fx2 => effective_slice(f, &s, x, a.parity),
        Source::Value => (s.clone(), 1.0),
    };
    let col = build_coloring(&eff, k, g, x, a.parity).map_err(usage)?;
    let mut out = PathOutput {
        field_id: f.id.clone(),
        level_source: a.level_source.into(),
        z: s.z,
        x_star: x,
        parity: a.parity,
        negated: sign < 0.0,
        path: None,
        violations: Vec::new(),
        chain: None,
        error: None,
        notes: notes.clone(),
    };
    let built: Result<AdmissiblePath, Error> = match a.level_source {
        Source::Fx2 => run_path(f, k, g, &s, x, a.parity, sampler.tol_x(), slack).map(|(p, t)| {
            out.violations = t.violations;
            out.chain = t.chain;
            p
        }),
        Source::Value => {
            let r = if eff.arcs.is_empty() {
                construct_path_compact(&eff, &col, x, k)
            } else {
                let fv: Vec<Vec<f64>> = eff.components().map(|c| c.samples_fx1.clone()).collect();
                construct_path_boundary(&eff, &col, &fv, x, k)
            };
            r.inspect(|p| out.violations = validate_path(p, &eff, &col, k).violations)
        }
    };
    let mut canvas = Canvas::new(k);
    canvas.shade(k, &col);
    canvas.boundary(k);
    canvas.slice(&eff);
    match built {
        Ok(p) => {
            canvas.path(&p);
            println!(
                "{} segments, cases {:?}, {} violations{}",
                p.segments.len(),
                p.cases,
                out.violations.len(),
                out.chain
                    .as_ref()
                    .map(|ch| format!(
                        ", f-change {} <= {}",
                        fmt6(ch.total_change),
                        fmt6(ch.bound + ch.slack)
                    ))
                    .unwrap_or_default()
            );
            out.path = Some(p);
        }
        Err(e) => {
            eprintln!("path construction failed: {e}");
            canvas.point(x, "x*");
            notes.push(format!("no path: {e}"));
            out.error = Some(e.to_string());
        }
    }
    for v in &out.violations {
        eprintln!("violation: {v}");
    }
    canvas.title(&title(f, &s, a));
    if !notes.is_empty() {
        canvas.note(&notes.join("; "));
    }
    let tag = fmt6(s.z);
    write(&c.out.join(format!("path_{tag}.svg")), &canvas.finish())?;
    write(
        &c.out.join(format!("path_{tag}.json")),
        &to_json_rounded(&out),
    )?;
    let ok = out.error.is_none()
        && out.violations.is_empty()
        && out.chain.as_ref().is_none_or(|ch| ch.pass);
    Ok(ok)
}

#[derive(Serialize)]
struct CoareaTotals {
    field_id: String,
    integral_abs_det_hessian: f64,
    integral_tv: f64,
    integral_phi: f64,
    relative_error: f64,
    pass: bool,
}

fn cmd_coarea(c: &Common) -> Outcome {
    let st = setup(c)?;
    let (f, k, g) = (&st.field, &st.domain, &st.grid);
    let sw = sweep(f, k, g, c.zcount, st.tolerances.slack_factor);
    let check = check_coarea(f, k, g, &sw, &st.tolerances).map_err(|e| anyhow!(e))?;
    let mut csv = String::from("z,regular,tv,phi\n");
    if sw.degenerate {
        let zs = LevelSampler::new(f, *k, *g).z_grid(c.zcount);
        for z in zs {
            csv += &format!("{},0,0,0\n", fmt6(z));
        }
    } else {
        for r in &sw.records {
            csv += &format!(
                "{},{},{},{}\n",
                fmt6(r.z),
                u8::from(r.regular),
                fmt6(r.tv),
                fmt6(r.phi)
            );
        }
    }
    write(&c.out.join("coarea.csv"), &csv)?;
    let totals = CoareaTotals {
        field_id: f.id.clone(),
        integral_abs_det_hessian: check.lhs,
        integral_tv: sw.tv_integral(),
        integral_phi: sw.phi_integral(),
        relative_error: check.relative_error(),
        pass: check.pass || check.inconclusive,
    };
    println!(
        "int |det D2f| = {}  int TV dz = {}  int phi dz = {}  relative error {}  {}",
        fmt6(totals.integral_abs_det_hessian),
        fmt6(totals.integral_tv),
        fmt6(totals.integral_phi),
        fmt6(totals.relative_error),
        if totals.pass { "PASS" } else { "FAIL" }
    );
    write(&c.out.join("coarea.json"), &to_json_rounded(&totals))?;
    Ok(totals.pass)
}

fn cmd_catalog() -> Outcome {
    for e in catalog() {
        println!(
            "{:<16} {:<8} {}",
            e.field.id,
            if e.field.compactly_supported() {
                "compact"
            } else {
                "general"
            },
            serde_json::to_string(&e.domain).map_err(|e| anyhow!(e))?
        );
    }
    Ok(true)
}
