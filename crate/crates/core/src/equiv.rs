//! Deciding whether two matrix spaces are equivalent, `A = P B Q`.
//!
//! Invariants are compared first. If they agree, the columns of `Q` are
//! chosen one at a time, each prefix `B Q_k` required to match the first `k`
//! columns of `A` in dimension, linearity and rank distribution. Once `Q` is
//! complete, `P` is found by a linear solve followed by a search for an
//! invertible solution. Roots of the search (the first column of `Q`) are
//! spread over the rayon pool; the lowest root with a witness wins.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{pow_sat, Budget};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::linalg::{self, Echelon};
use crate::matrix::{Matrix, Vector};
use crate::space::{Covector, MatSpace};

/// Default limit on search nodes (column choices plus candidate `P`s).
pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000_000;

/// Rank distributions are only used for pruning below this many elements.
const COUNT_CAP: u128 = 1 << 16;

/// Candidate `P` enumerated per complete `Q` before giving up on that `Q`.
const LEAF_CAP: u128 = 1 << 20;
const LEAF_SAMPLES: u64 = 1 << 14;
const SAMPLE_SEED: u64 = 0x1EAF;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    /// `counts[k]` = elements of rank `k`.
    pub counts: Vec<u64>,
    /// Same for the translation space, for affine spaces.
    pub translation_counts: Option<Vec<u64>>,
    /// `dim S_H` over all hyperplanes `H` of `F^p`, sorted.
    pub kernel_dims: Vec<usize>,
    /// `dim S^D` over all lines `D` of `F^n`, sorted.
    pub image_dims: Vec<usize>,
}

/// Stabilizer dimensions only; needs no enumeration.
fn stabilizer_dims(s: &MatSpace) -> (Vec<usize>, Vec<usize>) {
    let f = s.field();
    let mut kd: Vec<usize> =
        Covector::all(f, s.p()).iter().map(|h| s.stabilizer_kernel(h).expect("shape").dim()).collect();
    let mut id: Vec<usize> =
        Covector::all(f, s.n()).iter().map(|d| s.stabilizer_image(d).expect("shape").dim()).collect();
    kd.sort_unstable();
    id.sort_unstable();
    (kd, id)
}

pub fn rank_profile(s: &MatSpace, budget: Budget) -> Result<RankProfile> {
    let counts = s.rank_counts(budget)?;
    let translation_counts = if s.is_linear() { None } else { Some(s.translation_space().rank_counts(budget)?) };
    let (kernel_dims, image_dims) = stabilizer_dims(s);
    Ok(RankProfile { counts, translation_counts, kernel_dims, image_dims })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub pmat: Matrix,
    pub qmat: Matrix,
}

impl EquivalenceWitness {
    /// `apply_equivalence(b, P, Q) = a`.
    pub fn verify(&self, a: &MatSpace, b: &MatSpace) -> bool {
        b.apply_equivalence(&self.pmat, &self.qmat).is_ok_and(|s| &s == a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distinction {
    Dimension,
    Linearity,
    RankCounts,
    TranslationRankCounts,
    KernelStabilizers,
    ImageStabilizers,
    ExhaustiveSearch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equivalence {
    Yes(EquivalenceWitness),
    No(Distinction),
    Inconclusive { explored: u64 },
}

impl Equivalence {
    pub fn is_yes(&self) -> bool {
        matches!(self, Equivalence::Yes(_))
    }
}

struct Prefix {
    dim: usize,
    linear: bool,
    counts: Option<Vec<u64>>,
}

fn prefix_info(s: &MatSpace) -> Prefix {
    let counts = (s.cardinality() <= COUNT_CAP).then(|| s.rank_counts(Budget::UNLIMITED).expect("under cap"));
    Prefix { dim: s.dim(), linear: s.is_linear(), counts }
}

fn first_columns(f: FieldSpec, p: usize, k: usize) -> Matrix {
    Matrix::from_fn(f, p, k, |i, j| u8::from(i == j))
}

/// A space prepared for repeated equivalence tests against others.
pub struct EquivTarget {
    space: MatSpace,
    /// Working copy, transposed when `n < p` so that `Q` is the smaller side.
    work: MatSpace,
    transposed: bool,
    span: Echelon,
    prefixes: Vec<Prefix>,
    counts: Option<Vec<u64>>,
    translation_counts: Option<Vec<u64>>,
    kernel_dims: Vec<usize>,
    image_dims: Vec<usize>,
}

impl EquivTarget {
    pub fn new(a: &MatSpace) -> Self {
        let transposed = a.n() < a.p();
        let work = if transposed { a.transpose() } else { a.clone() };
        let f = a.field();
        let p = work.p();
        let prefixes =
            (1..=p).map(|k| prefix_info(&work.right_multiply(&first_columns(f, p, k)).expect("shape"))).collect();
        let small = a.cardinality() <= Budget::for_field(f).limit;
        let counts = small.then(|| a.rank_counts(Budget::UNLIMITED).expect("under budget"));
        let translation_counts = (small && !a.is_linear())
            .then(|| a.translation_space().rank_counts(Budget::UNLIMITED).expect("under budget"));
        let (kernel_dims, image_dims) = stabilizer_dims(a);
        EquivTarget {
            span: work.span(),
            space: a.clone(),
            work,
            transposed,
            prefixes,
            counts,
            translation_counts,
            kernel_dims,
            image_dims,
        }
    }

    pub fn space(&self) -> &MatSpace {
        &self.space
    }

    /// Decides whether `b` is equivalent to the target; a `Yes` witness
    /// satisfies `apply_equivalence(b, P, Q) = target`.
    pub fn compare(&self, b: &MatSpace, search_budget: u64) -> Result<Equivalence> {
        let a = &self.space;
        if a.field() != b.field() || a.shape() != b.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} over {} vs {}x{} over {}",
                a.n(),
                a.p(),
                a.field(),
                b.n(),
                b.p(),
                b.field()
            )));
        }
        if a.dim() != b.dim() {
            return Ok(Equivalence::No(Distinction::Dimension));
        }
        if a.is_linear() != b.is_linear() {
            return Ok(Equivalence::No(Distinction::Linearity));
        }
        if let Some(c) = &self.counts {
            if &b.rank_counts(Budget::UNLIMITED)? != c {
                return Ok(Equivalence::No(Distinction::RankCounts));
            }
        }
        if let Some(c) = &self.translation_counts {
            if &b.translation_space().rank_counts(Budget::UNLIMITED)? != c {
                return Ok(Equivalence::No(Distinction::TranslationRankCounts));
            }
        }
        let (kd, id) = stabilizer_dims(b);
        if kd != self.kernel_dims {
            return Ok(Equivalence::No(Distinction::KernelStabilizers));
        }
        if id != self.image_dims {
            return Ok(Equivalence::No(Distinction::ImageStabilizers));
        }
        let bw = if self.transposed { b.transpose() } else { b.clone() };
        let search = Search::new(self, &bw, search_budget);
        let found = search.run();
        let explored = search.nodes.load(Ordering::Relaxed);
        match found {
            Some((pw, qw)) => {
                // a_w = pw b_w qw; undo the transpose if needed.
                let (pmat, qmat) = if self.transposed { (qw.transpose(), pw.transpose()) } else { (pw, qw) };
                let w = EquivalenceWitness { pmat, qmat };
                if !w.verify(a, b) {
                    return Err(Error::Verification("equivalence witness failed to verify".into()));
                }
                Ok(Equivalence::Yes(w))
            }
            None if search.exhausted.load(Ordering::Relaxed) => Ok(Equivalence::Inconclusive { explored }),
            None => Ok(Equivalence::No(Distinction::ExhaustiveSearch)),
        }
    }
}

/// Decides `a ≅ b`. A `Yes` witness satisfies `apply_equivalence(b, P, Q) = a`.
pub fn are_equivalent(a: &MatSpace, b: &MatSpace, search_budget: u64) -> Result<Equivalence> {
    EquivTarget::new(a).compare(b, search_budget)
}

struct Search<'a> {
    target: &'a EquivTarget,
    b: &'a MatSpace,
    limit: u64,
    nodes: AtomicU64,
    exhausted: AtomicBool,
}

impl<'a> Search<'a> {
    fn new(target: &'a EquivTarget, b: &'a MatSpace, limit: u64) -> Self {
        Search { target, b, limit, nodes: AtomicU64::new(0), exhausted: AtomicBool::new(false) }
    }

    fn charge(&self, k: u64) -> bool {
        let used = self.nodes.fetch_add(k, Ordering::Relaxed) + k;
        if used > self.limit {
            self.exhausted.store(true, Ordering::Relaxed);
            false
        } else {
            true
        }
    }

    fn run(&self) -> Option<(Matrix, Matrix)> {
        let f = self.b.field();
        let (n, p) = self.b.shape();
        if p == 0 || n == 0 {
            return (self.b == &self.target.work).then(|| (Matrix::identity(f, n), Matrix::identity(f, p)));
        }
        let candidates = nonzero_vectors(f, p);
        candidates.par_iter().find_map_first(|x| {
            let mut cols = vec![x.clone()];
            let mut span = Echelon::new(f, p);
            span.insert(x);
            self.descend(&mut cols, &mut span, &candidates)
        })
    }

    fn descend(&self, cols: &mut Vec<Vector>, span: &mut Echelon, candidates: &[Vector]) -> Option<(Matrix, Matrix)> {
        if self.exhausted.load(Ordering::Relaxed) || !self.charge(1) {
            return None;
        }
        let f = self.b.field();
        let p = self.b.p();
        let k = cols.len();
        let qk = Matrix::from_columns(f, p, cols);
        let bk = self.b.right_multiply(&qk).expect("shape");
        let want = &self.target.prefixes[k - 1];
        if bk.dim() != want.dim || bk.is_linear() != want.linear {
            return None;
        }
        if let Some(c) = &want.counts {
            if &bk.rank_counts(Budget::UNLIMITED).expect("under cap") != c {
                return None;
            }
        }
        if k == p {
            return self.solve_left(&bk).map(|pm| (pm, qk));
        }
        for x in candidates {
            if span.contains(x) {
                continue;
            }
            let mut next = span.clone();
            next.insert(x);
            cols.push(x.clone());
            let hit = self.descend(cols, &mut next, candidates);
            cols.pop();
            if hit.is_some() {
                return hit;
            }
        }
        None
    }

    /// An invertible `P` with `P bq = target`, if the linear system allows one.
    fn solve_left(&self, bq: &MatSpace) -> Option<Matrix> {
        let a = &self.target.work;
        let f = a.field();
        let (n, p) = a.shape();
        let np = n * p;
        let mats: Vec<&Matrix> = std::iter::once(bq.base()).chain(bq.basis()).collect();
        let rows = mats.len() * np;
        let mut coeff = Matrix::zeros(f, rows, n * n);
        let mut rhs = vec![0; rows];
        rhs[..np].copy_from_slice(a.base().data());
        let mut x = vec![0; np];
        for (t, m) in mats.iter().enumerate() {
            for u in 0..n {
                for v in 0..n {
                    x.iter_mut().for_each(|e| *e = 0);
                    x[u * p..(u + 1) * p].copy_from_slice(m.row(v));
                    self.target.span.reduce(&mut x);
                    for (i, &e) in x.iter().enumerate() {
                        if e != 0 {
                            coeff.set(t * np + i, u * n + v, e);
                        }
                    }
                }
            }
        }
        let x0 = linalg::solve(&coeff, &rhs)?;
        let kernel = coeff.kernel_basis();
        let total = pow_sat(f.size() as u128, kernel.len());
        if total > LEAF_CAP {
            return self.sample_left(&x0, &kernel);
        }
        let mut digits: Vec<Elem> = vec![0; kernel.len()];
        let mut cur = x0;
        let mut step: u64 = 0;
        loop {
            step += 1;
            if step.is_multiple_of(4096) && !self.charge(4096) {
                return None;
            }
            let pm = Matrix::from_vec(f, n, n, cur.clone()).expect("canonical");
            if pm.is_invertible() {
                return Some(pm);
            }
            let mut i = 0;
            loop {
                if i == kernel.len() {
                    return None;
                }
                for (c, &kv) in cur.iter_mut().zip(&kernel[i]) {
                    *c = f.add(*c, kv);
                }
                digits[i] += 1;
                if digits[i] == f.q() {
                    digits[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }
}

impl Search<'_> {
    /// Too many candidates to list: try random points of `x0 + span(kernel)`.
    /// A miss leaves the search inconclusive rather than negative.
    fn sample_left(&self, x0: &[Elem], kernel: &[Vector]) -> Option<Matrix> {
        let f = self.target.work.field();
        let n = self.target.work.n();
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        for round in 0..LEAF_SAMPLES {
            if round % 4096 == 0 && !self.charge(4096) {
                return None;
            }
            let mut cur = x0.to_vec();
            for k in kernel {
                let c: Elem = rng.random_range(0..f.q());
                for (e, &kv) in cur.iter_mut().zip(k) {
                    *e = f.mul_add(c, kv, *e);
                }
            }
            let pm = Matrix::from_vec(f, n, n, cur).expect("canonical");
            if pm.is_invertible() {
                return Some(pm);
            }
        }
        self.exhausted.store(true, Ordering::Relaxed);
        None
    }
}

fn nonzero_vectors(f: FieldSpec, m: usize) -> Vec<Vector> {
    let mut out = Vec::new();
    for x in linalg::projective_points(f, m) {
        for c in 1..f.q() {
            out.push(x.iter().map(|&v| f.mul(c, v)).collect());
        }
    }
    out
}

/// A generating set of `GL_n(F_q)`: a transposition, an `n`-cycle,
/// a transvection and a scaling of the first coordinate.
pub fn gl_generators(f: FieldSpec, n: usize) -> Vec<Matrix> {
    if n == 0 {
        return Vec::new();
    }
    let mut gens = Vec::new();
    if n >= 2 {
        gens.push(Matrix::from_fn(f, n, n, |i, j| {
            let pi = match i {
                0 => 1,
                1 => 0,
                _ => i,
            };
            u8::from(pi == j)
        }));
        if n >= 3 {
            gens.push(Matrix::from_fn(f, n, n, |i, j| u8::from((i + 1) % n == j)));
        }
        let mut t = Matrix::identity(f, n);
        t.set(0, 1, 1);
        gens.push(t);
    }
    if f.q() > 2 {
        let mut d = Matrix::identity(f, n);
        d.set(0, 0, f.primitive_root());
        gens.push(d);
    }
    gens
}

/// Splits `spaces` into orbits under `(P, Q) ↦ P S Q`, returning the first
/// (in input order) member of each orbit together with the orbit size.
///
/// The input must be closed under the action, e.g. all subspaces of a
/// given dimension.
pub fn orbit_representatives(spaces: impl IntoIterator<Item = MatSpace>) -> Vec<(MatSpace, usize)> {
    let mut seen: HashSet<MatSpace> = HashSet::new();
    let mut reps = Vec::new();
    for s in spaces {
        if seen.contains(&s) {
            continue;
        }
        let f = s.field();
        let (n, p) = s.shape();
        let left: Vec<Matrix> = gl_generators(f, n);
        let right: Vec<Matrix> = gl_generators(f, p);
        let mut size = 0;
        let mut queue = VecDeque::from([s.clone()]);
        seen.insert(s.clone());
        while let Some(cur) = queue.pop_front() {
            size += 1;
            let moves = left
                .iter()
                .map(|g| cur.left_multiply(g).expect("shape"))
                .chain(right.iter().map(|g| cur.right_multiply(g).expect("shape")));
            for next in moves {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        reps.push((s, size));
    }
    reps
}
