//! Exhaustive enumeration of bounded-rank spaces and classification of the survivors.
//!
//! Linear spans are walked stratum by stratum (pivot pattern of the RREF basis
//! of the vectorized space). For the affine kind each span is combined with every
//! translate supported off its pivot columns; those are exactly the reduced
//! basepoints, so every affine space is produced once and no dedup pass is needed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{pow_sat, Budget};
use crate::catalog::{named_space, vee_construct, CatalogName};
use crate::decomp::equiv_sub_compression;
use crate::equiv::{EquivTarget, Equivalence, DEFAULT_SEARCH_BUDGET};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::gf2::{gray_flip, PackedRank};
use crate::grassmann::{gaussian_binomial, strata, Stratum};
use crate::matrix::{rank_in_place, Matrix, Vector};
use crate::space::MatSpace;

use super::report::{CensusConfig, CensusReport, SCHEMA_VERSION};

/// Bucket name for survivors that fit no registered outcome.
pub const UNCLASSIFIED: &str = "UNCLASSIFIED";

/// Counterexamples kept in a report.
const MAX_COUNTEREXAMPLES: usize = 16;

/// Rank tables are built when `q^(np)` is at most this.
const TABLE_LIMIT: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Linear,
    Affine,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::Linear => "linear",
            SpaceKind::Affine => "affine",
        })
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(SpaceKind::Linear),
            "affine" => Ok(SpaceKind::Affine),
            _ => Err(Error::ParamOutOfRange(format!("kind must be linear or affine, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusSpec {
    pub field: FieldSpec,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub dim: usize,
    pub kind: SpaceKind,
    pub workers: usize,
    /// Maximal number of spaces to enumerate.
    pub budget: Budget,
}

impl CensusSpec {
    /// One worker and the default budget for the field.
    pub fn new(field: FieldSpec, n: usize, p: usize, r: usize, dim: usize, kind: SpaceKind) -> Self {
        CensusSpec { field, n, p, r, dim, kind, workers: 1, budget: Budget::for_field(field) }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    /// `[np, dim]_q`, times `q^(np - dim)` translates for the affine kind.
    pub fn total(&self) -> u128 {
        let m = self.n * self.p;
        if self.dim > m {
            return 0;
        }
        let spans = gaussian_binomial(m, self.dim, self.field.q() as u64);
        match self.kind {
            SpaceKind::Linear => spans,
            SpaceKind::Affine => spans.saturating_mul(pow_sat(self.field.size() as u128, m - self.dim)),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.r > self.n.min(self.p) {
            return Err(Error::ParamOutOfRange(format!("r = {} exceeds min(n,p) = {}", self.r, self.n.min(self.p))));
        }
        if self.n * self.p > 64 {
            return Err(Error::ParamOutOfRange(format!("{}x{} is too large to census", self.n, self.p)));
        }
        self.budget.check(self.total())
    }

    fn config(&self) -> CensusConfig {
        CensusConfig {
            q: self.field.q(),
            n: self.n,
            p: self.p,
            r: self.r,
            dim: self.dim,
            kind: self.kind,
            workers: self.workers,
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::ParamOutOfRange(format!("cannot start {workers} workers: {e}")))
}

/// A survivor before canonicalization: RREF span rows plus reduced basepoint.
struct RawSpace {
    rows: Vec<Vector>,
    base: Vector,
}

impl RawSpace {
    fn build(&self, spec: &CensusSpec) -> MatSpace {
        let f = spec.field;
        let to_m = |v: &Vector| Matrix::from_vec(f, spec.n, spec.p, v.clone()).expect("length np");
        let gens: Vec<Matrix> = self.rows.iter().map(to_m).collect();
        MatSpace::new(f, spec.n, spec.p, &to_m(&self.base), &gens, spec.kind == SpaceKind::Linear)
            .expect("shapes agree")
    }
}

fn off_pivots(m: usize, pivots: &[usize]) -> Vec<usize> {
    (0..m).filter(|j| !pivots.contains(j)).collect()
}

/// Survivors of one stratum over `F_2`, with packed masks and Gray-code scans.
fn scan_binary(spec: &CensusSpec, st: &Stratum, oracle: &PackedRank) -> Vec<RawSpace> {
    let m = spec.n * spec.p;
    let r = spec.r;
    let d = st.pivots().len();
    let free = off_pivots(m, st.pivots());
    let reps = match spec.kind {
        SpaceKind::Linear => 1u64,
        SpaceKind::Affine => 1u64 << free.len(),
    };
    let mut elems = vec![0u64; 1 << d];
    let mut out = Vec::new();
    st.for_each(|rows| {
        let masks: Vec<u64> =
            rows.iter().map(|v| v.iter().enumerate().fold(0u64, |acc, (k, &x)| acc | (u64::from(x) << k))).collect();
        let mut cur = 0u64;
        elems[0] = 0;
        for k in 1..elems.len() as u64 {
            cur ^= masks[gray_flip(k)];
            elems[k as usize] = cur;
        }
        let mut rep = 0u64;
        for k in 0..reps {
            if k > 0 {
                rep ^= 1 << free[gray_flip(k)];
            }
            if elems.iter().all(|&e| oracle.rank(rep ^ e) <= r) {
                let base = (0..m).map(|i| ((rep >> i) & 1) as Elem).collect();
                out.push(RawSpace { rows: rows.to_vec(), base });
            }
        }
        true
    });
    out
}

/// Rank of every `n x p` matrix, indexed by base-`q` digits of its entries.
fn rank_table(f: FieldSpec, n: usize, p: usize) -> Option<Vec<u8>> {
    let q = f.size();
    let m = n * p;
    let size = q.checked_pow(m as u32).filter(|&s| s <= TABLE_LIMIT)?;
    let mut buf = vec![0; m];
    Some(
        (0..size)
            .map(|mut code| {
                for x in buf.iter_mut() {
                    *x = (code % q) as Elem;
                    code /= q;
                }
                rank_in_place(f, &mut buf, n, p) as u8
            })
            .collect(),
    )
}

/// Advances `digits` as a base-`q` odometer; false after the last value.
fn odometer(digits: &mut [Elem], q: Elem) -> bool {
    for x in digits.iter_mut() {
        *x += 1;
        if *x < q {
            return true;
        }
        *x = 0;
    }
    false
}

/// Survivors of one stratum over an odd prime field.
fn scan_generic(spec: &CensusSpec, st: &Stratum, table: Option<&[u8]>) -> Vec<RawSpace> {
    let f = spec.field;
    let q = f.q();
    let qs = f.size();
    let (n, p, r) = (spec.n, spec.p, spec.r);
    let m = n * p;
    let d = st.pivots().len();
    let free = off_pivots(m, st.pivots());
    let count = qs.pow(d as u32);
    let mut elems: Vec<Elem> = vec![0; count * m];
    let mut buf: Vec<Elem> = vec![0; m];
    let mut out = Vec::new();
    st.for_each(|rows| {
        let mut coeffs = vec![0; d];
        for e in 0..count {
            let slot = &mut elems[e * m..(e + 1) * m];
            slot.fill(0);
            for (c, row) in coeffs.iter().zip(rows) {
                if *c != 0 {
                    for (s, &x) in slot.iter_mut().zip(row) {
                        *s = f.mul_add(*c, x, *s);
                    }
                }
            }
            odometer(&mut coeffs, q);
        }
        let mut rep: Vec<Elem> = vec![0; m];
        let mut digits = vec![0; if spec.kind == SpaceKind::Affine { free.len() } else { 0 }];
        loop {
            let ok = elems.chunks_exact(m).all(|e| match table {
                Some(t) => {
                    let code = e.iter().zip(&rep).rev().fold(0usize, |acc, (&a, &b)| acc * qs + f.add(a, b) as usize);
                    t[code] as usize <= r
                }
                None => {
                    for ((s, &a), &b) in buf.iter_mut().zip(e).zip(&rep) {
                        *s = f.add(a, b);
                    }
                    rank_in_place(f, &mut buf, n, p) <= r
                }
            });
            if ok {
                out.push(RawSpace { rows: rows.to_vec(), base: rep.clone() });
            }
            if !odometer(&mut digits, q) {
                break;
            }
            for (&pos, &x) in free.iter().zip(&digits) {
                rep[pos] = x;
            }
        }
        true
    });
    out
}

/// Every space described by `spec` with upper-rank at most `r`, in enumeration
/// order (deterministic for any worker count).
pub fn rank_survivors(spec: &CensusSpec) -> Result<Vec<MatSpace>> {
    spec.validate()?;
    let m = spec.n * spec.p;
    if spec.dim > m {
        return Ok(Vec::new());
    }
    let strata = strata(spec.field, m, spec.dim);
    let raw: Vec<Vec<RawSpace>> = pool(spec.workers)?.install(|| {
        if spec.field.is_binary() {
            let oracle = PackedRank::new(spec.n, spec.p);
            strata.par_iter().map(|st| scan_binary(spec, st, &oracle)).collect()
        } else {
            let table = rank_table(spec.field, spec.n, spec.p);
            strata.par_iter().map(|st| scan_generic(spec, st, table.as_deref())).collect()
        }
    });
    Ok(raw.into_iter().flatten().map(|s| s.build(spec)).collect())
}

/// Every space of the given kind and dimension, without a rank filter.
pub fn all_spaces(
    field: FieldSpec,
    n: usize,
    p: usize,
    dim: usize,
    kind: SpaceKind,
    budget: Budget,
) -> Result<Vec<MatSpace>> {
    let r = n.min(p);
    rank_survivors(&CensusSpec { field, n, p, r, dim, kind, workers: 1, budget })
}

/// Splits `(σ, r-σ)` with the extreme ones first.
pub fn split_order(r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..=r / 2 {
        for s in [k, r - k] {
            if !out.contains(&(s, r - s)) {
                out.push((s, r - s));
            }
        }
    }
    out
}

pub fn split_bucket(s: usize, t: usize) -> String {
    format!("sub-R({s},{t})")
}

/// Non-decomposable spaces registered for `(n, p, r, q)`, by bucket name.
pub fn registered_exceptions(field: FieldSpec, n: usize, p: usize, r: usize) -> Vec<(String, MatSpace)> {
    let named = |c: CatalogName, size: Option<usize>| named_space(c, field, size).expect("registered").space;
    let mut out = Vec::new();
    match (n, p, r, field.q()) {
        (2, 2, 1, 2) => out.push(("U2".to_string(), named(CatalogName::U2, None))),
        (3, 3, 2, q) => {
            if q == 2 {
                out.push(("J3".to_string(), named(CatalogName::J3, None)));
                let u2 = named(CatalogName::U2, None);
                out.push(("U2vMat".to_string(), vee_construct(&u2, 3, 3).expect("3x3")));
            }
            if q == 3 {
                out.push(("U3".to_string(), named(CatalogName::U3, None)));
            }
            out.push(("A3".to_string(), named(CatalogName::Alt, Some(3))));
        }
        (4, 4, 3, 3) => out.push(("U4".to_string(), named(CatalogName::U4, None))),
        _ => {}
    }
    out
}

/// Outcome of classifying one survivor; the bucket is backed by a checked certificate.
enum Outcome {
    Bucket(String),
    Unclassified(MatSpace),
}

fn classify(space: MatSpace, r: usize, exceptions: &[(String, EquivTarget)]) -> Result<Outcome> {
    for (s, t) in split_order(r) {
        if let Some(w) = equiv_sub_compression(&space, s, t)? {
            if !w.verify(&space) {
                return Err(Error::Verification(format!("decomposition witness for ({s},{t})")));
            }
            return Ok(Outcome::Bucket(split_bucket(s, t)));
        }
    }
    for (name, target) in exceptions {
        if let Equivalence::Yes(w) = target.compare(&space, DEFAULT_SEARCH_BUDGET)? {
            if !w.verify(target.space(), &space) {
                return Err(Error::Verification(format!("equivalence witness for {name}")));
            }
            return Ok(Outcome::Bucket(name.clone()));
        }
    }
    Ok(Outcome::Unclassified(space))
}

/// Enumerates every space described by `spec`, keeps those with upper-rank at most
/// `r`, and buckets them: first `sub-R(σ,τ)` in [`split_order`], then the
/// registered exceptional spaces, else [`UNCLASSIFIED`].
pub fn census(spec: &CensusSpec) -> Result<CensusReport> {
    let start = Instant::now();
    let survivors = rank_survivors(spec)?;
    let exceptions: Vec<(String, EquivTarget)> = registered_exceptions(spec.field, spec.n, spec.p, spec.r)
        .into_iter()
        .filter(|(_, s)| s.dim() == spec.dim && s.is_linear() == (spec.kind == SpaceKind::Linear))
        .map(|(name, s)| (name, EquivTarget::new(&s)))
        .collect();
    let outcomes: Vec<Result<Outcome>> =
        pool(spec.workers)?.install(|| survivors.into_par_iter().map(|s| classify(s, spec.r, &exceptions)).collect());

    let mut classes: BTreeMap<String, u64> =
        split_order(spec.r).into_iter().map(|(s, t)| (split_bucket(s, t), 0)).collect();
    for (name, _) in &exceptions {
        classes.insert(name.clone(), 0);
    }
    let mut report = CensusReport {
        schema_version: SCHEMA_VERSION,
        config: spec.config(),
        total: spec.total() as u64,
        passing: 0,
        classes: BTreeMap::new(),
        unclassified: 0,
        certified: 0,
        counterexamples: Vec::new(),
        wall_time_ms: 0,
    };
    for o in outcomes {
        report.passing += 1;
        match o? {
            Outcome::Bucket(b) => {
                *classes.entry(b).or_default() += 1;
                report.certified += 1;
            }
            Outcome::Unclassified(s) => {
                report.unclassified += 1;
                if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    report.counterexamples.push(s);
                }
            }
        }
    }
    report.classes = classes;
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}
