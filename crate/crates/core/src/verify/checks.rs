//! Named theorem checks. Each check is exhaustive over small instances,
//! object-level on catalog spaces, or seeded-random where it says so.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::catalog::{compression_space, dim_compression, named_space, vee_construct, CatalogName};
use crate::decomp::equiv_sub_compression;
use crate::equiv::{are_equivalent, EquivTarget, Equivalence, DEFAULT_SEARCH_BUDGET};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::linalg::Echelon;
use crate::matrix::{Matrix, Vector};
use crate::rangecompat::{map_census, qrc_linear_census, MapCensus};
use crate::space::{Covector, MatSpace};

use super::census::{all_spaces, census, rank_survivors, split_bucket, split_order, CensusSpec, SpaceKind};
use super::report::{CensusReport, ReportFormat, SCHEMA_VERSION};
use super::rng::{trial_rng, DEFAULT_SEED};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Trials per configuration for randomized checks.
    pub trials: Option<u64>,
    pub seed: u64,
    /// Also run the instances that are far beyond desk scale.
    pub huge: bool,
    pub workers: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { trials: None, seed: DEFAULT_SEED, huge: false, workers: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub name: String,
    pub statement: String,
    pub passed: bool,
    pub cases: Vec<CaseResult>,
    /// Instances not run, with the reason.
    pub skipped: Vec<String>,
    /// First failing instance, when there is one.
    pub counterexample: Option<Value>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub wall_time_ms: u64,
}

pub fn emit_check(report: &CheckReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("serializable") + "\n",
        ReportFormat::Text => {
            let mut s = String::new();
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            writeln!(s, "check {}: {verdict}", report.name).unwrap();
            writeln!(s, "  {}", report.statement).unwrap();
            for c in &report.cases {
                writeln!(s, "  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.label, c.detail).unwrap();
            }
            for k in &report.skipped {
                writeln!(s, "  [skip] {k}").unwrap();
            }
            if let Some(seed) = report.seed {
                writeln!(s, "  seed {seed:#x}, {} trials per configuration", report.trials.unwrap_or(0)).unwrap();
            }
            if let Some(c) = &report.counterexample {
                writeln!(s, "  counterexample: {c}").unwrap();
            }
            writeln!(s, "  time {} ms", report.wall_time_ms).unwrap();
            s
        }
    }
}

#[derive(Default)]
struct Ctx {
    cases: Vec<CaseResult>,
    skipped: Vec<String>,
    counterexample: Option<Value>,
    seed: Option<u64>,
    trials: Option<u64>,
}

impl Ctx {
    fn case(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.cases.push(CaseResult { label: label.into(), passed, detail: detail.into() });
    }

    fn witness(&mut self, v: Value) {
        if self.counterexample.is_none() {
            self.counterexample = Some(v);
        }
    }
}

type CheckFn = fn(&mut Ctx, &CheckOptions) -> Result<()>;

/// Registered checks: name, statement, implementation.
const REGISTRY: &[(&str, &str, CheckFn)] = &[
    ("flanders-bound", "an affine space of n x p matrices (n >= p) with upper-rank <= r has dimension <= nr", flanders_bound),
    (
        "u2-class",
        "at dimension nr a rank-r affine space is a full compression space, or U2 over F_2 at (2,2,1)",
        u2_class,
    ),
    (
        "alb-critical",
        "a rank-r linear space of dimension >= nr-(n-p+r)+1 lies in R(r,0), R(r-1,1), R(1,r-1) or R(0,r), or is J3 over F_2",
        alb_critical,
    ),
    (
        "first-class",
        "a rank-r affine space of dimension > nr-(n-p+r)+1 lies in R(0,r), or in R(r,0) when n = p",
        first_class,
    ),
    (
        "refined-u3",
        "over #K > 2 a rank-r affine space of dimension >= nr-(n-p+r) is r-decomposable or is U3 over F_3",
        refined_u3,
    ),
    ("second-u4", "U4 over F_3 has upper-rank 3, dimension 8 = nr-2(n-p+r)+2 and is not 3-decomposable", second_u4),
    ("2ndkey", "if dim S_H >= r = urk for every hyperplane H (and r < p or n = p), the space is equivalent to R(r,0)", second_key),
    (
        "3rdkey-trichotomy",
        "for 0 < r = urk < min(n,p): some dim S_H <= (r-1)/2, or some dim S^D <= (r-1)/2, or r is even and the space is R(r/2,r/2)",
        third_key,
    ),
    ("extraction", "if rk(M + tN) <= r for all t and #K > q = rk N, deleting N's rows and columns leaves rank <= r-q", extraction),
    ("rc-local", "on an affine space of codimension <= n-2 every range-compatible affine map is local", rc_local),
    (
        "rc-plane",
        "quasi-range-compatible maps are local or of the form phi(MX)+MX' (codim <= n-1 and #K > 2; linear, codim <= 2n-4-eps)",
        rc_plane,
    ),
    (
        "rank1-class",
        "a rank-1 affine space has a common kernel, a common image, or is U2-like over F_2",
        rank1_class,
    ),
    ("convexity", "s -> dim R(s, r-s) is strictly convex", convexity),
    (
        "bound-arithmetic",
        "dim R(2,r-2) = nr-2(n-p+r)+4, and dim U4 = nr-2(n-p+r)+2+eps at (4,4,3) over F_3",
        bound_arithmetic,
    ),
    (
        "transpose-witnesses",
        "DJ U3^T J = U3 and K U4^T KD = U4, and the equivalence search finds both",
        transpose_witnesses,
    ),
    ("dsp-j3", "every rank-2 linear subspace of dimension 5 of Mat_3(F_2) is 2-decomposable or equivalent to J3", dsp_j3),
];

pub fn check_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _, _)| *n)
}

pub fn check_statement(name: &str) -> Option<&'static str> {
    REGISTRY.iter().find(|(n, _, _)| *n == name).map(|(_, s, _)| *s)
}

pub fn run_check(name: &str, opts: &CheckOptions) -> Result<CheckReport> {
    let &(name, statement, run) =
        REGISTRY.iter().find(|(n, _, _)| *n == name).ok_or_else(|| Error::UnknownCheck(name.to_string()))?;
    let start = Instant::now();
    let mut ctx = Ctx::default();
    run(&mut ctx, opts)?;
    let passed = !ctx.cases.is_empty() && ctx.cases.iter().all(|c| c.passed);
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        statement: statement.to_string(),
        passed,
        cases: ctx.cases,
        skipped: ctx.skipped,
        counterexample: ctx.counterexample,
        seed: ctx.seed,
        trials: ctx.trials,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

// ---------------------------------------------------------------- helpers

fn fq(q: u32) -> FieldSpec {
    FieldSpec::new(q).expect("supported field")
}

fn space_json(s: &MatSpace) -> Value {
    serde_json::to_value(s).expect("serializable")
}

fn urk(s: &MatSpace) -> Result<usize> {
    s.upper_rank(Budget::UNLIMITED)
}

/// Catalog spaces and constructions used by the object-level checks.
fn catalog_spaces() -> Result<Vec<(String, MatSpace)>> {
    let (f2, f3) = (fq(2), fq(3));
    let named = |c: CatalogName, f: FieldSpec, size: Option<usize>| named_space(c, f, size).map(|e| e.space);
    let mut out = vec![
        ("U2 over F_2".to_string(), named(CatalogName::U2, f2, None)?),
        ("U3 over F_3".to_string(), named(CatalogName::U3, f3, None)?),
        ("U4 over F_3".to_string(), named(CatalogName::U4, f3, None)?),
        ("J3 over F_2".to_string(), named(CatalogName::J3, f2, None)?),
        ("A3 over F_2".to_string(), named(CatalogName::Alt, f2, Some(3))?),
        ("A3 over F_3".to_string(), named(CatalogName::Alt, f3, Some(3))?),
        ("A4 over F_3".to_string(), named(CatalogName::Alt, f3, Some(4))?),
        ("A5 over F_2".to_string(), named(CatalogName::Alt, f2, Some(5))?),
        ("T3 over F_2".to_string(), named(CatalogName::Triang, f2, Some(3))?),
        ("T3 over F_3".to_string(), named(CatalogName::Triang, f3, Some(3))?),
    ];
    let u2 = named(CatalogName::U2, f2, None)?;
    out.push(("U2 v Mat_1 over F_2".into(), vee_construct(&u2, 3, 3)?));
    out.push(("U2 v Mat_{2,1} over F_2".into(), vee_construct(&u2, 4, 3)?));
    for f in [f2, f3] {
        let a3 = named(CatalogName::Alt, f, Some(3))?;
        out.push((format!("A3 v Mat_1 over {f}"), vee_construct(&a3, 4, 4)?));
    }
    let j3 = named(CatalogName::J3, f2, None)?;
    out.push(("J3 v Mat_1 over F_2".into(), vee_construct(&j3, 4, 4)?));
    let u3 = named(CatalogName::U3, f3, None)?;
    out.push(("U3 v Mat_1 over F_3".into(), vee_construct(&u3, 4, 4)?));
    Ok(out)
}

/// Runs a census and records a case: passes when every survivor is certified,
/// nonzero buckets are all allowed and every required bucket is nonzero.
fn census_case(
    ctx: &mut Ctx,
    spec: CensusSpec,
    allowed: &dyn Fn(&str) -> bool,
    required: &[&str],
) -> Result<CensusReport> {
    let rep = census(&spec)?;
    let bad: Vec<String> =
        rep.nonzero_classes().filter(|(k, _)| !allowed(k)).map(|(k, c)| format!("{k}={c}")).collect();
    let missing: Vec<&str> =
        required.iter().copied().filter(|k| rep.classes.get(*k).copied().unwrap_or(0) == 0).collect();
    let ok = rep.passed() && bad.is_empty() && missing.is_empty();
    let buckets: Vec<String> = rep.nonzero_classes().map(|(k, c)| format!("{k}={c}")).collect();
    let mut detail = format!("{} spaces, {} survivors [{}]", rep.total, rep.passing, buckets.join(", "));
    if rep.unclassified > 0 {
        write!(detail, ", UNCLASSIFIED={}", rep.unclassified).unwrap();
    }
    if !bad.is_empty() {
        write!(detail, ", disallowed {}", bad.join(" ")).unwrap();
    }
    if !missing.is_empty() {
        write!(detail, ", expected nonzero {}", missing.join(" ")).unwrap();
    }
    let c = &rep.config;
    ctx.case(format!("census F_{} {}x{} r={} dim {} {}", c.q, c.n, c.p, c.r, c.dim, c.kind), ok, detail);
    if !ok {
        match rep.counterexamples.first() {
            Some(s) => ctx.witness(space_json(s)),
            None => ctx.witness(serde_json::to_value(&rep).expect("serializable")),
        }
    }
    Ok(rep)
}

fn spec(q: u32, n: usize, p: usize, r: usize, dim: usize, kind: SpaceKind, opts: &CheckOptions) -> CensusSpec {
    let s = CensusSpec::new(fq(q), n, p, r, dim, kind).with_workers(opts.workers);
    if opts.huge {
        s.with_budget(Budget::UNLIMITED)
    } else {
        s
    }
}

fn is_split(k: &str) -> bool {
    k.starts_with("sub-R(")
}

/// First split `(σ, r-σ)` admitting a verified witness.
fn decomposition(s: &MatSpace, r: usize) -> Result<Option<(usize, usize)>> {
    for (a, b) in split_order(r) {
        if a + b > s.n().min(s.p()) {
            continue;
        }
        if let Some(w) = equiv_sub_compression(s, a, b)? {
            if !w.verify(s) {
                return Err(Error::Verification(format!("decomposition witness ({a},{b})")));
            }
            return Ok(Some((a, b)));
        }
    }
    Ok(None)
}

/// `Yes` with a verified witness.
fn equivalent(a: &MatSpace, b: &MatSpace) -> Result<bool> {
    match are_equivalent(a, b, DEFAULT_SEARCH_BUDGET)? {
        Equivalence::Yes(w) => Ok(w.verify(a, b)),
        Equivalence::No(_) => Ok(false),
        Equivalence::Inconclusive { explored } => {
            Err(Error::Verification(format!("equivalence search inconclusive after {explored} nodes")))
        }
    }
}

fn min_kernel_stabilizer(s: &MatSpace) -> Result<(usize, Covector)> {
    let mut best: Option<(usize, Covector)> = None;
    for h in Covector::all(s.field(), s.p()) {
        let d = s.stabilizer_kernel(&h)?.dim();
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, h));
        }
    }
    best.ok_or_else(|| Error::ParamOutOfRange("no hyperplanes in F^0".into()))
}

fn min_image_stabilizer(s: &MatSpace) -> Result<(usize, Covector)> {
    let mut best: Option<(usize, Covector)> = None;
    for d in Covector::all(s.field(), s.n()) {
        let k = s.stabilizer_image(&d)?.dim();
        if best.as_ref().is_none_or(|(b, _)| k < *b) {
            best = Some((k, d));
        }
    }
    best.ok_or_else(|| Error::ParamOutOfRange("no lines in F^0".into()))
}

/// Every affine subspace of `Mat_{n,p}` of every dimension.
fn every_affine_space(f: FieldSpec, n: usize, p: usize) -> Result<Vec<MatSpace>> {
    let mut out = Vec::new();
    for d in 0..=n * p {
        out.extend(all_spaces(f, n, p, d, SpaceKind::Affine, Budget::UNLIMITED)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------- checks

fn flanders_bound(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    for (q, n, p, r, d) in [(2, 2, 2, 1, 3), (3, 2, 2, 1, 3), (2, 3, 2, 1, 4), (3, 3, 2, 1, 4), (2, 3, 3, 2, 7)] {
        let s = spec(q, n, p, r, d, SpaceKind::Affine, opts);
        let surv = rank_survivors(&s)?;
        ctx.case(
            format!("census F_{q} {n}x{p} r={r} dim {d} affine"),
            surv.is_empty(),
            format!("{} spaces, {} with upper-rank <= {r}", s.total(), surv.len()),
        );
        if let Some(x) = surv.first() {
            ctx.witness(space_json(x));
        }
    }
    for (label, s) in catalog_spaces()? {
        let r = urk(&s)?;
        let bound = s.n().max(s.p()) * r;
        let ok = s.dim() <= bound;
        ctx.case(label, ok, format!("dim {} <= {bound} (urk {r})", s.dim()));
        if !ok {
            ctx.witness(space_json(&s));
        }
    }
    Ok(())
}

fn u2_class(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    let f2 = fq(2);
    let u2 = named_space(CatalogName::U2, f2, None)?.space;
    let no_split = decomposition(&u2, 1)?.is_none();
    ctx.case(
        "U2 over F_2",
        !u2.is_linear() && u2.dim() == 2 && urk(&u2)? == 1 && no_split,
        format!("affine, dim {}, urk {}, 1-decomposable: {}", u2.dim(), urk(&u2)?, !no_split),
    );
    let square = |k: &str| k == "sub-R(0,1)" || k == "sub-R(1,0)";
    census_case(ctx, spec(2, 2, 2, 1, 2, SpaceKind::Affine, opts), &|k| square(k) || k == "U2", &["U2"])?;
    census_case(ctx, spec(3, 2, 2, 1, 2, SpaceKind::Affine, opts), &square, &[])?;
    census_case(ctx, spec(2, 3, 2, 1, 3, SpaceKind::Affine, opts), &|k| k == "sub-R(0,1)", &["sub-R(0,1)"])?;
    Ok(())
}

/// Bound of the critical-dimension statements, in the orientation `n >= p`.
fn alb_bound(n: usize, p: usize, r: usize) -> usize {
    let (n, p) = (n.max(p), n.min(p));
    (n * r + 1).saturating_sub(n - p + r)
}

fn alb_verdict(ctx: &mut Ctx, label: String, s: &MatSpace, r: usize, j3: &EquivTarget) -> Result<()> {
    let allowed = [(r, 0), (r - 1, 1), (1, r - 1), (0, r)];
    let mut found = None;
    for (a, b) in allowed {
        if let Some(w) = equiv_sub_compression(s, a, b)? {
            if w.verify(s) {
                found = Some((a, b));
                break;
            }
        }
    }
    let exceptional = found.is_none()
        && s.shape() == (3, 3)
        && r == 2
        && s.field().is_binary()
        && matches!(j3.compare(s, DEFAULT_SEARCH_BUDGET)?, Equivalence::Yes(ref w) if w.verify(j3.space(), s));
    let ok = found.is_some() || exceptional;
    let detail = match found {
        Some((a, b)) => format!("dim {}, in {}", s.dim(), split_bucket(a, b)),
        None if exceptional => format!("dim {}, equivalent to J3", s.dim()),
        None => format!("dim {}, no admissible outcome", s.dim()),
    };
    ctx.case(label, ok, detail);
    if !ok {
        ctx.witness(space_json(s));
    }
    Ok(())
}

fn hyperplanes(s: &MatSpace) -> Vec<MatSpace> {
    let f = s.field();
    Covector::all(f, s.dim())
        .into_iter()
        .map(|c| {
            let gens: Vec<Matrix> = c
                .kernel_basis()
                .iter()
                .map(|k| {
                    let mut m = Matrix::zeros(f, s.n(), s.p());
                    for (&x, b) in k.iter().zip(s.basis()) {
                        m.add_scaled_assign(x, b);
                    }
                    m
                })
                .collect();
            MatSpace::linear(f, s.n(), s.p(), &gens).expect("same shape")
        })
        .collect()
}

fn alb_critical(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let j3 = EquivTarget::new(&named_space(CatalogName::J3, fq(2), None)?.space);
    for q in [2, 3] {
        let f = fq(q);
        for n in 1..=4 {
            for p in 1..=n {
                for r in 1..p {
                    let bound = alb_bound(n, p, r);
                    for s in 0..=r {
                        let t = r - s;
                        let c = compression_space(f, n, p, s, t)?;
                        if c.dim() < bound {
                            continue;
                        }
                        alb_verdict(ctx, format!("R({s},{t}) in Mat_{{{n},{p}}}({f})"), &c, r, &j3)?;
                        if n <= 3 && c.dim() > bound {
                            let mut ok = 0usize;
                            let mut sub = Ctx::default();
                            for h in hyperplanes(&c) {
                                alb_verdict(&mut sub, String::new(), &h, r, &j3)?;
                            }
                            let fails: Vec<&CaseResult> = sub.cases.iter().filter(|c| !c.passed).collect();
                            ok += sub.cases.len() - fails.len();
                            ctx.case(
                                format!("hyperplanes of R({s},{t}) in Mat_{{{n},{p}}}({f})"),
                                fails.is_empty(),
                                format!("{ok} of {} admissible", sub.cases.len()),
                            );
                            if let Some(w) = sub.counterexample {
                                ctx.witness(w);
                            }
                        }
                    }
                }
            }
        }
    }
    for (label, s) in catalog_spaces()? {
        let r = urk(&s)?;
        let (n, p) = s.shape();
        if !s.is_linear() || r == 0 || r >= n.min(p) {
            ctx.skipped.push(format!("{label}: affine or urk = min(n,p)"));
            continue;
        }
        if s.dim() < alb_bound(n, p, r) {
            ctx.skipped.push(format!("{label}: dim {} below {}", s.dim(), alb_bound(n, p, r)));
            continue;
        }
        alb_verdict(ctx, label, &s, r, &j3)?;
    }
    Ok(())
}

fn first_class(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    let mut runs =
        vec![(2, 2, 2, 1, 3), (2, 3, 2, 1, 3), (2, 2, 3, 1, 4), (2, 3, 3, 2, 6), (3, 2, 2, 1, 3), (3, 3, 2, 1, 3)];
    if opts.huge {
        runs.push((3, 3, 3, 2, 6));
    } else {
        ctx.skipped.push("census F_3 3x3 r=2 dim 6 affine (needs --huge)".into());
    }
    for (q, n, p, r, d) in runs {
        let left = split_bucket(0, r);
        let right = split_bucket(r, 0);
        let allowed = |k: &str| k == left || (n == p && k == right);
        census_case(ctx, spec(q, n, p, r, d, SpaceKind::Affine, opts), &allowed, &[])?;
    }
    Ok(())
}

fn refined_u3(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    let f3 = fq(3);
    let u3 = named_space(CatalogName::U3, f3, None)?.space;
    let r = urk(&u3)?;
    let (n, p) = (3, 3);
    let bound = n * 2 - (n - p + 2);
    let split = decomposition(&u3, 2)?;
    ctx.case(
        "U3 over F_3",
        r == 2 && u3.dim() == 4 && u3.dim() >= bound && split.is_none() && !u3.is_linear(),
        format!("urk {r}, dim {} (bound {bound}), 2-decomposable: {}", u3.dim(), split.is_some()),
    );
    let iu = u3.translation_space().contains(&Matrix::identity(f3, 3))?;
    ctx.case("U3 translation space", iu, "contains the identity");
    let mut runs = vec![
        (3, 2, 2, 1, 1, SpaceKind::Affine),
        (3, 2, 2, 1, 2, SpaceKind::Affine),
        (5, 2, 2, 1, 1, SpaceKind::Affine),
        (5, 2, 2, 1, 2, SpaceKind::Affine),
        (7, 2, 2, 1, 1, SpaceKind::Affine),
        (3, 3, 2, 1, 1, SpaceKind::Affine),
        (3, 3, 2, 1, 2, SpaceKind::Affine),
    ];
    if opts.huge {
        runs.push((3, 3, 3, 2, 4, SpaceKind::Linear));
        runs.push((3, 3, 3, 2, 4, SpaceKind::Affine));
    } else {
        ctx.skipped.push("census F_3 3x3 r=2 dim 4 (needs --huge)".into());
    }
    for (q, n, p, r, d, kind) in runs {
        census_case(ctx, spec(q, n, p, r, d, kind, opts), &|k| is_split(k) || k == "U3", &[])?;
    }
    Ok(())
}

fn second_u4(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let f3 = fq(3);
    let u4 = named_space(CatalogName::U4, f3, None)?.space;
    let r = urk(&u4)?;
    ctx.case("U4 upper-rank", r == 3, format!("urk {r}"));
    ctx.case("U4 dimension", u4.dim() == 8 && u4.is_linear(), format!("linear, dim {}", u4.dim()));
    let mut witnesses = Vec::new();
    for (s, t) in split_order(3) {
        if equiv_sub_compression(&u4, s, t)?.is_some() {
            witnesses.push(split_bucket(s, t));
        }
    }
    ctx.case(
        "U4 not 3-decomposable",
        witnesses.is_empty(),
        if witnesses.is_empty() { "no witness for any split".to_string() } else { witnesses.join(", ") },
    );
    let (n, p) = (4, 4);
    let bound = n * r + 2 + f3.epsilon() - 2 * (n - p + r);
    ctx.case("U4 critical dimension", bound == u4.dim(), format!("nr-2(n-p+r)+2+eps = {bound}"));
    Ok(())
}

fn second_key(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    for q in [2, 3] {
        let f = fq(q);
        for n in 1..=4 {
            for p in 1..=4 {
                if n * p > 12 {
                    continue;
                }
                for r in 0..=n.min(p) {
                    let c = compression_space(f, n, p, r, 0)?;
                    let mut ok = true;
                    for h in Covector::all(f, p) {
                        ok &= c.stabilizer_kernel(&h)?.dim() >= r;
                    }
                    ctx.case(format!("R({r},0) in Mat_{{{n},{p}}}({f})"), ok, "dim S_H >= r for every H");
                }
            }
        }
    }
    for (label, s) in catalog_spaces()? {
        let r = urk(&s)?;
        let target = compression_space(s.field(), s.n(), s.p(), r, 0)?;
        if equivalent(&target, &s)? {
            ctx.case(label, true, format!("equivalent to R({r},0)"));
            continue;
        }
        let (d, h) = min_kernel_stabilizer(&s)?;
        ctx.case(label.clone(), d < r, format!("urk {r}, dim S_H = {d} at H = ker {:?}", h.entries()));
        if d >= r {
            ctx.witness(space_json(&s));
        }
    }
    for (q, n, p) in [(2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3)] {
        let f = fq(q);
        let spaces = every_affine_space(f, n, p)?;
        let total = spaces.len();
        let targets: Vec<EquivTarget> =
            (0..=n.min(p)).map(|r| EquivTarget::new(&compression_space(f, n, p, r, 0).expect("in range"))).collect();
        let results: Vec<Result<Option<(bool, MatSpace)>>> = spaces
            .into_par_iter()
            .map(|s| {
                let r = urk(&s)?;
                let (d, _) = min_kernel_stabilizer(&s)?;
                // at r = p < n every space has rank <= r, and e.g. Mat_{n,p} itself
                // meets the hypothesis without being R(p,0)
                if d < r || (r == p && p < n) {
                    return Ok(None);
                }
                let ok = matches!(targets[r].compare(&s, DEFAULT_SEARCH_BUDGET)?,
                    Equivalence::Yes(ref w) if w.verify(targets[r].space(), &s));
                Ok(Some((ok, s)))
            })
            .collect();
        let mut hyp = 0;
        let mut bad = None;
        for res in results {
            if let Some((ok, s)) = res? {
                hyp += 1;
                if !ok && bad.is_none() {
                    bad = Some(s);
                }
            }
        }
        ctx.case(
            format!("every affine subspace of Mat_{{{n},{p}}}({f}) with urk < p or p = n"),
            bad.is_none(),
            format!("{total} spaces, {hyp} satisfy the hypothesis, all equivalent to R(r,0): {}", bad.is_none()),
        );
        if let Some(s) = bad {
            ctx.witness(space_json(&s));
        }
    }
    Ok(())
}

/// Which outcomes of the trichotomy hold, as a short tag; empty if none.
fn trichotomy(s: &MatSpace, r: usize) -> Result<String> {
    let (h, _) = min_kernel_stabilizer(s)?;
    let (d, _) = min_image_stabilizer(s)?;
    let mut tag = String::new();
    if 2 * h < r {
        tag.push('a');
    }
    if 2 * d < r {
        tag.push('b');
    }
    if tag.is_empty() && r.is_multiple_of(2) {
        let c = compression_space(s.field(), s.n(), s.p(), r / 2, r / 2)?;
        if equivalent(&c, s)? {
            tag.push('c');
        }
    }
    Ok(tag)
}

fn third_key(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let mut instances = catalog_spaces()?;
    for q in [2, 3] {
        let f = fq(q);
        for n in 2..=4 {
            for p in 2..=4 {
                for s in 0..=n {
                    for t in 0..=p {
                        if s + t > 0 && s + t < n.min(p) {
                            instances.push((
                                format!("R({s},{t}) in Mat_{{{n},{p}}}({f})"),
                                compression_space(f, n, p, s, t)?,
                            ));
                        }
                    }
                }
            }
        }
    }
    for (label, s) in instances {
        let r = urk(&s)?;
        if r == 0 || r >= s.n().min(s.p()) {
            ctx.skipped.push(format!("{label}: urk {r} not below min(n,p)"));
            continue;
        }
        let tag = trichotomy(&s, r)?;
        ctx.case(label, !tag.is_empty(), format!("urk {r}, outcomes [{tag}]"));
        if tag.is_empty() {
            ctx.witness(space_json(&s));
        }
    }
    for (q, n, p) in [(2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3), (2, 3, 3)] {
        let f = fq(q);
        // in Mat_3(F_2) only the rank-1 spaces, which is where r < min(n,p) bites
        let spaces = if (n, p) == (3, 3) {
            let mut v = Vec::new();
            for d in 0..=3 {
                v.extend(rank_survivors(&CensusSpec::new(f, n, p, 1, d, SpaceKind::Affine))?);
            }
            v
        } else {
            every_affine_space(f, n, p)?
        };
        let results: Vec<Result<Option<(String, MatSpace)>>> = spaces
            .into_par_iter()
            .map(|s| {
                let r = urk(&s)?;
                if r == 0 || r >= n.min(p) {
                    return Ok(None);
                }
                Ok(Some((trichotomy(&s, r)?, s)))
            })
            .collect();
        let (mut count, mut a, mut b, mut c) = (0, 0, 0, 0);
        let mut bad = None;
        for res in results {
            if let Some((tag, s)) = res? {
                count += 1;
                a += usize::from(tag.contains('a'));
                b += usize::from(tag.contains('b'));
                c += usize::from(tag.contains('c'));
                if tag.is_empty() && bad.is_none() {
                    bad = Some(s);
                }
            }
        }
        let label = if (n, p) == (3, 3) { "rank-1 affine subspaces" } else { "every affine subspace" };
        ctx.case(
            format!("{label} of Mat_{{{n},{p}}}({f})"),
            bad.is_none(),
            format!("{count} with 0 < urk < min(n,p): (a) {a}, (b) {b}, (c) {c}"),
        );
        if let Some(s) = bad {
            ctx.witness(space_json(&s));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- extraction

fn random_vec(f: FieldSpec, len: usize, rng: &mut impl Rng) -> Vector {
    (0..len).map(|_| rng.random_range(0..f.q())).collect()
}

/// Extends `e` by random vectors up to dimension `target`, returning the added vectors.
fn extend_random(e: &mut Echelon, target: usize, rng: &mut impl Rng) -> Vec<Vector> {
    let mut added = Vec::new();
    while e.dim() < target {
        let v = random_vec(e.field(), e.width(), rng);
        if e.insert(&v) {
            added.push(v);
        }
    }
    added
}

fn random_invertible(f: FieldSpec, k: usize, rng: &mut impl Rng) -> Matrix {
    let mut e = Echelon::new(f, k);
    let cols = extend_random(&mut e, k, rng);
    Matrix::from_columns(f, k, &cols)
}

struct ExtractionInstance {
    m: Matrix,
    n: Matrix,
    rows: Vec<usize>,
    cols: Vec<usize>,
    r: usize,
}

/// Random `(M, N)` with `N` of rank `k` supported on rows `I` and columns `J`,
/// and `M + tN` mapping a codimension-`t` subspace `G` into an `s`-dimensional
/// `H` for every `t`, so that every `M + tN` has rank at most `s + t = r`.
fn extraction_instance(f: FieldSpec, n: usize, p: usize, k: usize, rng: &mut impl Rng) -> ExtractionInstance {
    let r = rng.random_range(k..=n.min(p));
    let mut rows = sample(rng, n, k).into_vec();
    let mut cols = sample(rng, p, k).into_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    let block = random_invertible(f, k, rng);
    let mut nm = Matrix::zeros(f, n, p);
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            nm.set(i, j, block.get(a, b));
        }
    }
    let t = rng.random_range(0..=r);
    let s = r - t;
    let ker = nm.kernel_basis();
    let lo = (p - t).saturating_sub(s);
    let hi = (p - t).min(p - k);
    let j = rng.random_range(lo..=hi);
    let mut g = Echelon::new(f, p);
    let mut gvecs = Vec::new();
    while g.dim() < j {
        let c = random_vec(f, ker.len(), rng);
        let v: Vector =
            (0..p).map(|x| ker.iter().zip(&c).fold(0, |acc, (kv, &ci)| f.mul_add(ci, kv[x], acc))).collect();
        if g.insert(&v) {
            gvecs.push(v);
        }
    }
    gvecs.extend(extend_random(&mut g, p - t, rng));
    let mut qcols = gvecs.clone();
    qcols.extend(extend_random(&mut g, p, rng));
    let qb = Matrix::from_columns(f, p, &qcols);
    let mut h = Echelon::new(f, n);
    let mut hvecs = Vec::new();
    for x in &gvecs {
        let y = nm.mul_vec(x);
        if h.insert(&y) {
            hvecs.push(y);
        }
    }
    hvecs.extend(extend_random(&mut h, s, rng));
    hvecs.extend(extend_random(&mut h, n, rng));
    let pb = Matrix::from_columns(f, n, &hvecs);
    let b = Matrix::from_fn(f, n, p, |i, jj| if i >= s && jj < p - t { 0 } else { rng.random_range(0..f.q()) });
    let m = pb.mul_unchecked(&b).mul_unchecked(&qb.inverse().expect("basis"));
    ExtractionInstance { m, n: nm, rows, cols, r }
}

fn extraction(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    let trials = opts.trials.unwrap_or(10_000);
    ctx.seed = Some(opts.seed);
    ctx.trials = Some(trials);
    let mut configs = Vec::new();
    for q in [3u32, 5] {
        for n in 1..=5 {
            for p in 1..=5 {
                for k in 0..=n.min(p) {
                    if (k as u32) < q {
                        configs.push((q, n, p, k));
                    }
                }
            }
        }
    }
    let seed = opts.seed;
    // (violations, hypothesis failures, first counterexample)
    let results: Vec<(u64, u64, Option<Value>)> = configs
        .par_iter()
        .enumerate()
        .map(|(ci, &(q, n, p, k))| {
            let f = fq(q);
            let mut violations = 0;
            let mut broken = 0;
            let mut first = None;
            for i in 0..trials {
                let mut rng = trial_rng(seed, ci as u64, i);
                let inst = extraction_instance(f, n, p, k, &mut rng);
                let hyp = f.elements().all(|t| inst.m.add(&inst.n.scale(t)).expect("same shape").rank() <= inst.r);
                if !hyp {
                    broken += 1;
                    continue;
                }
                let d = inst.m.delete(&inst.rows, &inst.cols);
                if d.rank() + k > inst.r {
                    violations += 1;
                    if first.is_none() {
                        first = Some(json!({
                            "q": q, "trial": i, "r": inst.r, "rows": inst.rows, "cols": inst.cols,
                            "M": inst.m.to_string(), "N": inst.n.to_string(),
                        }));
                    }
                }
            }
            (violations, broken, first)
        })
        .collect();
    for (&(q, n, p, k), (v, broken, first)) in configs.iter().zip(results) {
        ctx.case(
            format!("F_{q} {n}x{p} q'={k}"),
            v == 0 && broken == 0,
            format!("{trials} trials, {v} violations, {broken} instances off hypothesis"),
        );
        if let Some(w) = first {
            ctx.witness(w);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- range-compatible maps

fn map_case(ctx: &mut Ctx, label: String, mc: &MapCensus, ok: bool) {
    ctx.case(
        label,
        ok,
        format!(
            "{} maps, RC {}, local {}, RC non-local {}, qRC {} (local {}, plane {}, neither {})",
            mc.maps,
            mc.range_compatible,
            mc.local_maps,
            mc.rc_not_local,
            mc.quasi_range_compatible,
            mc.qrc_local,
            mc.qrc_plane,
            mc.qrc_neither
        ),
    );
    if !ok {
        if let Some(m) = mc.counterexamples.first() {
            ctx.witness(serde_json::to_value(m).expect("serializable"));
        }
    }
}

/// Affine subspaces of `Mat_{n,p}` with codimension at most `c`.
fn low_codim(f: FieldSpec, n: usize, p: usize, c: usize, kind: SpaceKind) -> Result<Vec<MatSpace>> {
    let m = n * p;
    let mut out = Vec::new();
    for d in m.saturating_sub(c)..=m {
        out.extend(all_spaces(f, n, p, d, kind, Budget::UNLIMITED)?);
    }
    Ok(out)
}

/// Runs `map_census` over a family of domains and records one aggregated case.
fn map_family(
    ctx: &mut Ctx,
    label: String,
    domains: Vec<MatSpace>,
    classify: bool,
    ok: impl Fn(&MapCensus) -> bool + Sync,
) -> Result<()> {
    let count = domains.len();
    let results: Vec<Result<MapCensus>> =
        domains.par_iter().map(|d| map_census(d, false, classify, Budget::UNLIMITED)).collect();
    let mut total = MapCensus::default();
    let mut bad: Option<MapCensus> = None;
    for r in results {
        let r = r?;
        if !ok(&r) && bad.is_none() {
            bad = Some(r.clone());
        }
        total.maps += r.maps;
        total.range_compatible += r.range_compatible;
        total.local_maps += r.local_maps;
        total.rc_not_local += r.rc_not_local;
        total.quasi_range_compatible += r.quasi_range_compatible;
        total.qrc_local += r.qrc_local;
        total.qrc_plane += r.qrc_plane;
        total.qrc_neither += r.qrc_neither;
    }
    if let Some(b) = &bad {
        total.counterexamples = b.counterexamples.clone();
    }
    map_case(ctx, format!("{label} ({count} domains)"), &total, bad.is_none());
    Ok(())
}

fn rc_local(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let rc_ok = |m: &MapCensus| m.rc_not_local == 0 && m.range_compatible == m.local_maps;
    for (q, n, p) in [(2, 2, 1), (2, 3, 1), (3, 3, 1), (2, 3, 2), (2, 4, 1), (2, 2, 2), (3, 2, 2), (2, 2, 3)] {
        let f = fq(q);
        let c = n - 2;
        let domains = low_codim(f, n, p, c, SpaceKind::Affine)?;
        map_family(ctx, format!("affine codim <= {c} in Mat_{{{n},{p}}}({f})"), domains, false, rc_ok)?;
    }
    Ok(())
}

fn rc_plane(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    let qrc_ok = |m: &MapCensus| m.qrc_neither == 0;
    let mut rc2 = vec![(3, 2, 1), (5, 2, 1), (3, 2, 2), (3, 3, 1)];
    if opts.huge {
        rc2.push((5, 2, 2));
    } else {
        ctx.skipped.push("affine codim <= 1 in Mat_2(F_5) (needs --huge)".into());
    }
    for (q, n, p) in rc2 {
        let f = fq(q);
        let c = n - 1;
        let domains = low_codim(f, n, p, c, SpaceKind::Affine)?;
        map_family(ctx, format!("affine codim <= {c} in Mat_{{{n},{p}}}({f})"), domains, true, qrc_ok)?;
    }
    for (q, n, p) in [(3, 3usize, 2), (3, 3, 1), (2, 4, 1), (3, 2, 2)] {
        let f = fq(q);
        let c = (2 * n).saturating_sub(4 + f.epsilon());
        let domains = low_codim(f, n, p, c, SpaceKind::Linear)?;
        let count = domains.len();
        let results: Vec<Result<MapCensus>> =
            domains.par_iter().map(|d| qrc_linear_census(d, Budget::UNLIMITED)).collect();
        let mut total = MapCensus::default();
        let mut bad = None;
        for r in results {
            let r = r?;
            if !qrc_ok(&r) && bad.is_none() {
                bad = Some(r.clone());
            }
            total.maps += r.maps;
            total.range_compatible += r.range_compatible;
            total.quasi_range_compatible += r.quasi_range_compatible;
            total.qrc_local += r.qrc_local;
            total.qrc_plane += r.qrc_plane;
            total.qrc_neither += r.qrc_neither;
        }
        if let Some(b) = &bad {
            total.counterexamples = b.counterexamples.clone();
        }
        map_case(
            ctx,
            format!("linear maps, linear codim <= {c} in Mat_{{{n},{p}}}({f}) ({count} domains)"),
            &total,
            bad.is_none(),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- rank one

fn kernel(m: &Matrix) -> Echelon {
    let b = m.kernel_basis();
    Echelon::from_vectors(m.field(), m.cols(), b.iter().map(|v| v.as_slice()))
}

fn image(m: &Matrix) -> Echelon {
    let cols: Vec<Vector> = (0..m.cols()).map(|j| m.column(j)).collect();
    Echelon::from_vectors(m.field(), m.rows(), cols.iter().map(|v| v.as_slice()))
}

fn all_equal(items: &[Echelon]) -> bool {
    items.windows(2).all(|w| w[0].rows() == w[1].rows())
}

/// Affine subspaces of the zero-padded `U2` in `Mat_{n,p}(F_2)`.
fn u2_pieces(n: usize, p: usize) -> Result<Vec<EquivTarget>> {
    let u2 = named_space(CatalogName::U2, fq(2), None)?.space.pad_to(n, p)?;
    let elems: Vec<Matrix> = u2.elements(Budget::UNLIMITED)?.collect();
    let mut pieces = vec![u2.clone()];
    for (i, a) in elems.iter().enumerate() {
        for b in &elems[i + 1..] {
            pieces.push(MatSpace::affine(a, &[b.sub(a)?])?);
        }
    }
    Ok(pieces.iter().map(EquivTarget::new).collect())
}

fn rank1_class(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    for (q, n, p) in [(2, 2, 2), (3, 2, 2), (2, 2, 3), (3, 2, 3)] {
        let f = fq(q);
        let pieces = if q == 2 { u2_pieces(n, p)? } else { Vec::new() };
        let mut spaces = Vec::new();
        for d in 0..=n * p {
            spaces
                .extend(rank_survivors(&CensusSpec::new(f, n, p, 1, d, SpaceKind::Affine).with_workers(opts.workers))?);
        }
        let results: Vec<Result<(u8, MatSpace)>> = spaces
            .into_par_iter()
            .map(|s| {
                let nz: Vec<Matrix> = s.elements(Budget::UNLIMITED)?.filter(|m| !m.is_zero()).collect();
                if all_equal(&nz.iter().map(kernel).collect::<Vec<_>>()) {
                    return Ok((0, s));
                }
                if all_equal(&nz.iter().map(image).collect::<Vec<_>>()) {
                    return Ok((1, s));
                }
                for t in &pieces {
                    if let Equivalence::Yes(w) = t.compare(&s, DEFAULT_SEARCH_BUDGET)? {
                        if w.verify(t.space(), &s) {
                            return Ok((2, s));
                        }
                    }
                }
                Ok((3, s))
            })
            .collect();
        let mut counts = [0usize; 4];
        let mut bad = None;
        for r in results {
            let (k, s) = r?;
            counts[k as usize] += 1;
            if k == 3 && bad.is_none() {
                bad = Some(s);
            }
        }
        let total: usize = counts.iter().sum();
        ctx.case(
            format!("rank-1 affine subspaces of Mat_{{{n},{p}}}({f})"),
            bad.is_none(),
            format!(
                "{total} spaces: common kernel {}, common image {}, U2-like {}, other {}",
                counts[0], counts[1], counts[2], counts[3]
            ),
        );
        if let Some(s) = bad {
            ctx.witness(space_json(&s));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- arithmetic and witnesses

fn convexity(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let mut checked = 0;
    let mut bad = None;
    for p in 2..=8 {
        for n in p..=8 {
            for r in 2..=p {
                let d: Vec<i64> = (0..=r).map(|s| dim_compression(n, p, s, r - s) as i64).collect();
                for w in d.windows(3) {
                    checked += 1;
                    if w[0] + w[2] - 2 * w[1] <= 0 && bad.is_none() {
                        bad = Some((n, p, r));
                    }
                }
            }
        }
    }
    ctx.case("2 <= r <= p <= n <= 8", bad.is_none(), format!("{checked} second differences, all positive"));
    if let Some((n, p, r)) = bad {
        ctx.witness(json!({"n": n, "p": p, "r": r}));
    }
    Ok(())
}

fn bound_arithmetic(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let mut checked = 0;
    let mut bad = None;
    for n in 2..=10 {
        for p in 2..=n {
            for r in 2..=p {
                checked += 1;
                if dim_compression(n, p, 2, r - 2) + 2 * (n - p + r) != n * r + 4 && bad.is_none() {
                    bad = Some((n, p, r));
                }
            }
        }
    }
    ctx.case("dim R(2,r-2), 2 <= r <= p <= n <= 10", bad.is_none(), format!("{checked} triples"));
    if let Some((n, p, r)) = bad {
        ctx.witness(json!({"n": n, "p": p, "r": r}));
    }
    let f3 = fq(3);
    let u4 = named_space(CatalogName::U4, f3, None)?.space;
    let (n, p, r) = (4usize, 4usize, 3usize);
    let bound = n * r + 2 + f3.epsilon() - 2 * (n - p + r);
    ctx.case("dim U4 at (4,4,3) over F_3", u4.dim() == bound && f3.epsilon() == 0, format!("{} = {bound}", u4.dim()));
    ctx.case("eps", fq(2).epsilon() == 2 && [3, 5, 7].iter().all(|&q| fq(q).epsilon() == 0), "2 over F_2, else 0");
    Ok(())
}

fn antidiagonal(f: FieldSpec, k: usize) -> Matrix {
    Matrix::from_fn(f, k, k, |i, j| u8::from(i + j == k - 1))
}

fn transpose_witnesses(ctx: &mut Ctx, _opts: &CheckOptions) -> Result<()> {
    let f3 = fq(3);
    let m1 = f3.neg(1);
    let u3 = named_space(CatalogName::U3, f3, None)?.space;
    let j = antidiagonal(f3, 3);
    let d = Matrix::diagonal(f3, &[m1, m1, m1]);
    let lhs = u3.transpose().apply_equivalence(&d.mul(&j)?, &j)?;
    ctx.case("DJ U3^T J = U3", lhs == u3, "canonical forms agree");
    let u4 = named_space(CatalogName::U4, f3, None)?.space;
    let k = antidiagonal(f3, 4);
    let d4 = Matrix::diagonal(f3, &[m1, 1, m1, 1]);
    let lhs = u4.transpose().apply_equivalence(&k, &k.mul(&d4)?)?;
    ctx.case("K U4^T KD = U4", lhs == u4, "canonical forms agree");
    for (name, s) in [("U3", &u3), ("U4", &u4)] {
        let t = s.transpose();
        let start = Instant::now();
        let res = are_equivalent(s, &t, DEFAULT_SEARCH_BUDGET)?;
        let ok = matches!(&res, Equivalence::Yes(w) if w.verify(s, &t));
        ctx.case(
            format!("search {name} vs {name}^T"),
            ok,
            format!(
                "{} in {} ms",
                if ok { "witness found and verified" } else { "no witness" },
                start.elapsed().as_millis()
            ),
        );
    }
    Ok(())
}

fn dsp_j3(ctx: &mut Ctx, opts: &CheckOptions) -> Result<()> {
    census_case(ctx, spec(2, 3, 3, 2, 5, SpaceKind::Linear, opts), &|k| is_split(k) || k == "J3", &["J3"])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CheckOptions {
        CheckOptions { trials: Some(200), ..CheckOptions::default() }
    }

    #[test]
    fn unknown_check() {
        assert!(matches!(run_check("nope", &quick()), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn cheap_checks_pass() {
        for name in ["convexity", "bound-arithmetic", "second-u4", "u2-class", "transpose-witnesses"] {
            let r = run_check(name, &quick()).unwrap();
            assert!(r.passed, "{}", emit_check(&r, ReportFormat::Text));
        }
    }

    #[test]
    fn extraction_instances_meet_hypothesis() {
        let f = fq(5);
        for i in 0..300 {
            let mut rng = trial_rng(7, 0, i);
            let inst = extraction_instance(f, 4, 5, 2, &mut rng);
            assert_eq!(inst.n.rank(), 2);
            for t in f.elements() {
                assert!(inst.m.add(&inst.n.scale(t)).unwrap().rank() <= inst.r);
            }
        }
    }

    #[test]
    fn extraction_is_reproducible() {
        let a = run_check("extraction", &CheckOptions { trials: Some(20), ..CheckOptions::default() }).unwrap();
        let b =
            run_check("extraction", &CheckOptions { trials: Some(20), workers: 2, ..CheckOptions::default() }).unwrap();
        assert!(a.passed);
        assert_eq!(a.cases, b.cases);
    }

    #[test]
    fn report_json_round_trip() {
        let r = run_check("convexity", &quick()).unwrap();
        let back: CheckReport = serde_json::from_str(&emit_check(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn u2_pieces_cover_u2() {
        assert_eq!(u2_pieces(2, 2).unwrap().len(), 7);
    }
}
