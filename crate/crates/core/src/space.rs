//! Affine subspaces `A + V` of `Mat_{n,p}(F_q)` in canonical form.
//!
//! The translation space `V` is stored as the reduced row-echelon basis of
//! its row-major vectorization; the basepoint is reduced modulo `V`. Two
//! descriptions of the same affine set therefore compare equal.
//!
//! Operations that are only meaningful for linear spaces (`S_H`, `S^D`,
//! deletion kernels) act on the translation space of an affine input.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::budget::{pow_sat, Budget};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::gf2::{self, PackedRank};
use crate::linalg::{self, Echelon};
use crate::matrix::{rank_in_place, Matrix, Vector};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MatSpaceDoc", into = "MatSpaceDoc")]
pub struct MatSpace {
    field: FieldSpec,
    n: usize,
    p: usize,
    base: Matrix,
    basis: Vec<Matrix>,
    pivots: Vec<usize>,
}

/// A nonzero vector scaled so that its first nonzero entry is 1.
///
/// Read as a covector it names the hyperplane `ker(h)`; read as a vector it
/// names the line it spans.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Covector {
    field: FieldSpec,
    entries: Vector,
}

impl Covector {
    pub fn new(field: FieldSpec, entries: &[Elem]) -> Result<Self> {
        let entries =
            linalg::normalize(field, entries).ok_or_else(|| Error::ParamOutOfRange("zero covector".into()))?;
        Ok(Covector { field, entries })
    }

    /// All covectors of length `m`, in canonical order.
    pub fn all(field: FieldSpec, m: usize) -> Vec<Covector> {
        linalg::projective_points(field, m).into_iter().map(|entries| Covector { field, entries }).collect()
    }

    /// The `i`-th coordinate form (zero-based).
    pub fn coordinate(field: FieldSpec, m: usize, i: usize) -> Self {
        let mut entries = vec![0; m];
        entries[i] = 1;
        Covector { field, entries }
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Basis of the hyperplane `ker(self)`.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        linalg::hyperplane_basis(self.field, &self.entries)
    }
}

impl MatSpace {
    /// Canonical form of `base + span(generators)`.
    pub fn new(
        field: FieldSpec,
        n: usize,
        p: usize,
        base: &Matrix,
        generators: &[Matrix],
        linear: bool,
    ) -> Result<Self> {
        for m in std::iter::once(base).chain(generators) {
            if m.field() != field {
                return Err(Error::FieldMismatch { left: field.q(), right: m.field().q() });
            }
            if m.shape() != (n, p) {
                return Err(Error::ShapeMismatch(format!("expected {n}x{p}, got {}x{}", m.rows(), m.cols())));
            }
        }
        if linear && !base.is_zero() {
            return Err(Error::ShapeMismatch("a linear space must have a zero base".into()));
        }
        let span = Echelon::from_vectors(field, n * p, generators.iter().map(|g| g.data()));
        let mut b = base.data().to_vec();
        span.reduce(&mut b);
        Ok(Self::from_parts(field, n, p, span, b))
    }

    pub fn linear(field: FieldSpec, n: usize, p: usize, generators: &[Matrix]) -> Result<Self> {
        Self::new(field, n, p, &Matrix::zeros(field, n, p), generators, true)
    }

    pub fn affine(base: &Matrix, generators: &[Matrix]) -> Result<Self> {
        Self::new(base.field(), base.rows(), base.cols(), base, generators, false)
    }

    pub fn zero(field: FieldSpec, n: usize, p: usize) -> Self {
        Self::from_parts(field, n, p, Echelon::new(field, n * p), vec![0; n * p])
    }

    pub fn full(field: FieldSpec, n: usize, p: usize) -> Self {
        Self::from_parts(field, n, p, Echelon::full(field, n * p), vec![0; n * p])
    }

    /// Trusted constructor: `span` is canonical and `base` already reduced.
    pub(crate) fn from_parts(field: FieldSpec, n: usize, p: usize, span: Echelon, base: Vector) -> Self {
        debug_assert_eq!(span.width(), n * p);
        let pivots = span.pivots().to_vec();
        let basis =
            span.into_rows().into_iter().map(|r| Matrix::from_vec(field, n, p, r).expect("canonical rows")).collect();
        let base = Matrix::from_vec(field, n, p, base).expect("canonical base");
        MatSpace { field, n, p, base, basis, pivots }
    }

    pub(crate) fn span(&self) -> Echelon {
        Echelon::from_vectors(self.field, self.n * self.p, self.basis.iter().map(|b| b.data()))
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.n * self.p - self.dim()
    }

    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// Vectorized coordinates carrying the leading 1 of each basis matrix.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_linear(&self) -> bool {
        self.base.is_zero()
    }

    pub fn translation_space(&self) -> MatSpace {
        MatSpace { base: Matrix::zeros(self.field, self.n, self.p), ..self.clone() }
    }

    /// Number of elements, saturating.
    pub fn cardinality(&self) -> u128 {
        pow_sat(self.field.size() as u128, self.dim())
    }

    fn check_shape(&self, m: &Matrix) -> Result<()> {
        if m.shape() != self.shape() || m.field() != self.field {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} over {} vs space in Mat_{}x{}",
                m.rows(),
                m.cols(),
                m.field(),
                self.n,
                self.p
            )));
        }
        Ok(())
    }

    pub fn contains(&self, m: &Matrix) -> Result<bool> {
        Ok(self.coordinates(m)?.is_some())
    }

    /// Coefficients `c` with `m = base + sum c_i basis_i`.
    pub fn coordinates(&self, m: &Matrix) -> Result<Option<Vector>> {
        self.check_shape(m)?;
        let mut v = m.sub(&self.base)?.into_data();
        let coords: Vector = self.pivots.iter().map(|&pc| v[pc]).collect();
        for (c, b) in coords.iter().zip(&self.basis) {
            let neg = self.field.neg(*c);
            for (x, &y) in v.iter_mut().zip(b.data()) {
                *x = self.field.mul_add(neg, y, *x);
            }
        }
        Ok(v.iter().all(|&x| x == 0).then_some(coords))
    }

    /// `base + sum coeffs_i basis_i`.
    pub fn element(&self, coeffs: &[Elem]) -> Matrix {
        let mut m = self.base.clone();
        for (&c, b) in coeffs.iter().zip(&self.basis) {
            m.add_scaled_assign(c, b);
        }
        m
    }

    /// Streams every element once. Over `F_2` consecutive elements differ by
    /// one basis matrix (reflected Gray code); otherwise odometer order.
    pub fn elements(&self, budget: Budget) -> Result<Elements<'_>> {
        budget.check(self.cardinality())?;
        Ok(Elements {
            space: self,
            current: self.base.clone(),
            digits: vec![0; self.dim()],
            step: 0,
            total: self.cardinality() as u64,
        })
    }

    /// Calls `visit` with the rank of every element until it breaks.
    pub fn scan_ranks(&self, budget: Budget, mut visit: impl FnMut(usize) -> ControlFlow<()>) -> Result<()> {
        budget.check(self.cardinality())?;
        let (n, p) = self.shape();
        if n == 0 || p == 0 {
            let _ = visit(0);
            return Ok(());
        }
        let d = self.dim();
        if self.field.is_binary() && n * p <= 64 {
            let pack =
                |m: &Matrix| -> u64 { m.data().iter().enumerate().fold(0u64, |acc, (i, &v)| acc | ((v as u64) << i)) };
            let oracle = PackedRank::new(n, p);
            let gens: Vec<u64> = self.basis.iter().map(pack).collect();
            let mut cur = pack(&self.base);
            if visit(oracle.rank(cur)).is_break() {
                return Ok(());
            }
            for k in 1..1u64 << d {
                cur ^= gens[gf2::gray_flip(k)];
                if visit(oracle.rank(cur)).is_break() {
                    break;
                }
            }
            return Ok(());
        }
        let f = self.field;
        let q = f.q();
        let mut cur = self.base.data().to_vec();
        let mut scratch = vec![0u8; n * p];
        let mut digits = vec![0u8; d];
        loop {
            scratch.copy_from_slice(&cur);
            if visit(rank_in_place(f, &mut scratch, n, p)).is_break() {
                return Ok(());
            }
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(());
                }
                for (x, &y) in cur.iter_mut().zip(self.basis[i].data()) {
                    *x = f.add(*x, y);
                }
                digits[i] += 1;
                if digits[i] == q {
                    digits[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    /// Maximal rank over the elements.
    pub fn upper_rank(&self, budget: Budget) -> Result<usize> {
        let cap = self.n.min(self.p);
        let mut best = 0;
        self.scan_ranks(budget, |r| {
            best = best.max(r);
            if best == cap {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(best)
    }

    /// Whether every element has rank at most `r`; stops at the first violation.
    pub fn rank_at_most(&self, r: usize, budget: Budget) -> Result<bool> {
        if r >= self.n.min(self.p) {
            return Ok(true);
        }
        let mut ok = true;
        self.scan_ranks(budget, |rk| {
            if rk > r {
                ok = false;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(ok)
    }

    /// `counts[k]` = number of elements of rank `k`.
    pub fn rank_counts(&self, budget: Budget) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.n.min(self.p) + 1];
        self.scan_ranks(budget, |r| {
            counts[r] += 1;
            ControlFlow::Continue(())
        })?;
        Ok(counts)
    }

    /// Linear subspace of the translation space cut out by `f(M) = 0`
    /// for a linear `f`, solved in basis coordinates.
    pub fn translation_kernel_of(&self, f: impl Fn(&Matrix) -> Vector) -> MatSpace {
        let images: Vec<Vector> = self.basis.iter().map(&f).collect();
        let width = images.first().map_or(0, |v| v.len());
        let deps = if width == 0 {
            linalg::Echelon::full(self.field, self.dim()).into_rows()
        } else {
            linalg::dependencies(self.field, width, &images)
        };
        let gens: Vec<Matrix> = deps
            .iter()
            .map(|c| {
                let mut m = Matrix::zeros(self.field, self.n, self.p);
                for (&ci, b) in c.iter().zip(&self.basis) {
                    m.add_scaled_assign(ci, b);
                }
                m
            })
            .collect();
        MatSpace::linear(self.field, self.n, self.p, &gens).expect("shapes agree")
    }

    /// `S_H = {M in V : H ⊂ Ker M}` for `H = ker(h)`, on the translation space.
    pub fn stabilizer_kernel(&self, h: &Covector) -> Result<MatSpace> {
        if h.len() != self.p || h.field() != self.field {
            return Err(Error::ShapeMismatch(format!("covector of length {} for p = {}", h.len(), self.p)));
        }
        let hb = h.kernel_basis();
        Ok(self.translation_kernel_of(|m| hb.iter().flat_map(|v| m.mul_vec(v)).collect()))
    }

    /// `S^D = {M in V : im M ⊂ D}` for the line `D = span(d)`, on the translation space.
    pub fn stabilizer_image(&self, d: &Covector) -> Result<MatSpace> {
        if d.len() != self.n || d.field() != self.field {
            return Err(Error::ShapeMismatch(format!("line in F^{} for n = {}", d.len(), self.n)));
        }
        let ann = linalg::Echelon::from_vectors(self.field, self.n, [d.entries()]).annihilator();
        Ok(self.translation_kernel_of(|m| ann.iter().flat_map(|u| m.left_mul_vec(u)).collect()))
    }

    /// Image of the space under deleting the given rows and columns.
    pub fn delete_rows_cols(&self, rows: &[usize], cols: &[usize]) -> Result<MatSpace> {
        if let Some(&i) = rows.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange(format!("row {i} in {} rows", self.n)));
        }
        if let Some(&j) = cols.iter().find(|&&j| j >= self.p) {
            return Err(Error::IndexOutOfRange(format!("column {j} in {} columns", self.p)));
        }
        let base = self.base.delete(rows, cols);
        let gens: Vec<Matrix> = self.basis.iter().map(|b| b.delete(rows, cols)).collect();
        MatSpace::new(self.field, base.rows(), base.cols(), &base, &gens, false)
    }

    /// Translation matrices killed by the deletion map.
    pub fn deletion_kernel(&self, rows: &[usize], cols: &[usize]) -> MatSpace {
        self.translation_kernel_of(|m| m.delete(rows, cols).into_data())
    }

    /// `{A M : M in S}` for a `k x n` matrix `A`.
    pub fn left_multiply(&self, a: &Matrix) -> Result<MatSpace> {
        if a.cols() != self.n || a.field() != self.field {
            return Err(Error::DimensionMismatch(format!("{}x{} times Mat_{}x{}", a.rows(), a.cols(), self.n, self.p)));
        }
        let base = a.mul_unchecked(&self.base);
        let gens: Vec<Matrix> = self.basis.iter().map(|b| a.mul_unchecked(b)).collect();
        MatSpace::new(self.field, a.rows(), self.p, &base, &gens, false)
    }

    /// `{M B : M in S}` for a `p x k` matrix `B`.
    pub fn right_multiply(&self, b: &Matrix) -> Result<MatSpace> {
        if b.rows() != self.p || b.field() != self.field {
            return Err(Error::DimensionMismatch(format!("Mat_{}x{} times {}x{}", self.n, self.p, b.rows(), b.cols())));
        }
        let base = self.base.mul_unchecked(b);
        let gens: Vec<Matrix> = self.basis.iter().map(|m| m.mul_unchecked(b)).collect();
        MatSpace::new(self.field, self.n, b.cols(), &base, &gens, false)
    }

    /// Canonical form of `P S Q`.
    pub fn apply_equivalence(&self, pmat: &Matrix, qmat: &Matrix) -> Result<MatSpace> {
        if pmat.shape() != (self.n, self.n) || qmat.shape() != (self.p, self.p) {
            return Err(Error::DimensionMismatch("P must be n x n and Q p x p".into()));
        }
        if !pmat.is_invertible() || !qmat.is_invertible() {
            return Err(Error::NotInvertible);
        }
        let map = |m: &Matrix| pmat.mul_unchecked(m).mul_unchecked(qmat);
        let base = map(&self.base);
        let gens: Vec<Matrix> = self.basis.iter().map(map).collect();
        MatSpace::new(self.field, self.n, self.p, &base, &gens, false)
    }

    pub fn transpose(&self) -> MatSpace {
        let base = self.base.transpose();
        let gens: Vec<Matrix> = self.basis.iter().map(|b| b.transpose()).collect();
        MatSpace::new(self.field, self.p, self.n, &base, &gens, false).expect("shapes agree")
    }

    /// Embeds into `Mat_{n2,p2}` as the upper-left block, padding with zeros.
    pub fn pad_to(&self, n2: usize, p2: usize) -> Result<MatSpace> {
        if n2 < self.n || p2 < self.p {
            return Err(Error::ParamOutOfRange(format!("cannot pad {}x{} to {n2}x{p2}", self.n, self.p)));
        }
        let pad = |m: &Matrix| {
            Matrix::from_fn(self.field, n2, p2, |i, j| if i < self.n && j < self.p { m.get(i, j) } else { 0 })
        };
        let base = pad(&self.base);
        let gens: Vec<Matrix> = self.basis.iter().map(pad).collect();
        MatSpace::new(self.field, n2, p2, &base, &gens, false)
    }

    /// Span of `{M x : M in S}` (including the basepoint image).
    pub fn image_of_vector(&self, x: &[Elem]) -> Echelon {
        let mut e = Echelon::new(self.field, self.n);
        e.insert(&self.base.mul_vec(x));
        for b in &self.basis {
            e.insert(&b.mul_vec(x));
        }
        e
    }

    /// Span of `{M g : M in S, g in G}`.
    pub fn image_of_subspace(&self, g: &[Vector]) -> Echelon {
        let mut e = Echelon::new(self.field, self.n);
        for x in g {
            e.insert(&self.base.mul_vec(x));
            for b in &self.basis {
                e.insert(&b.mul_vec(x));
            }
        }
        e
    }
}

/// JSON layout of a [`MatSpace`]: matrices as lists of rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatSpaceDoc {
    pub format: String,
    pub version: u32,
    pub q: u32,
    pub n: usize,
    pub p: usize,
    pub kind: String,
    pub dim: usize,
    pub base: Vec<Vec<u32>>,
    pub gens: Vec<Vec<Vec<u32>>>,
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<u32>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&x| x as u32).collect()).collect()
}

fn rows_matrix(field: FieldSpec, n: usize, p: usize, rows: &[Vec<u32>]) -> Result<Matrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != p) {
        return Err(Error::ShapeMismatch(format!("expected {n} rows of {p} entries")));
    }
    let data = rows.iter().flatten().map(|&x| field.elem(x)).collect::<Result<Vec<_>>>()?;
    Matrix::from_vec(field, n, p, data)
}

impl From<MatSpace> for MatSpaceDoc {
    fn from(s: MatSpace) -> Self {
        MatSpaceDoc {
            format: "matspace".into(),
            version: 1,
            q: s.field.q() as u32,
            n: s.n,
            p: s.p,
            kind: if s.is_linear() { "linear" } else { "affine" }.into(),
            dim: s.dim(),
            base: matrix_rows(&s.base),
            gens: s.basis.iter().map(matrix_rows).collect(),
        }
    }
}

impl TryFrom<MatSpaceDoc> for MatSpace {
    type Error = Error;

    fn try_from(d: MatSpaceDoc) -> Result<Self> {
        if d.format != "matspace" || d.version != 1 {
            return Err(Error::Parse { line: 0, msg: format!("unsupported document {} {}", d.format, d.version) });
        }
        let field = FieldSpec::new(d.q)?;
        let linear = match d.kind.as_str() {
            "linear" => true,
            "affine" => false,
            k => return Err(Error::Parse { line: 0, msg: format!("unknown kind `{k}`") }),
        };
        let base = rows_matrix(field, d.n, d.p, &d.base)?;
        let gens = d.gens.iter().map(|g| rows_matrix(field, d.n, d.p, g)).collect::<Result<Vec<_>>>()?;
        let s = MatSpace::new(field, d.n, d.p, &base, &gens, linear)?;
        if s.dim() != d.dim {
            return Err(Error::Parse {
                line: 0,
                msg: format!("declared dim {} but generators span {}", d.dim, s.dim()),
            });
        }
        Ok(s)
    }
}

impl std::fmt::Debug for MatSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatSpace")
            .field("field", &self.field)
            .field("shape", &(self.n, self.p))
            .field("dim", &self.dim())
            .field("base", &self.base)
            .field("basis", &self.basis)
            .finish()
    }
}

/// Iterator over the elements of a [`MatSpace`].
pub struct Elements<'a> {
    space: &'a MatSpace,
    current: Matrix,
    digits: Vec<Elem>,
    step: u64,
    total: u64,
}

impl Iterator for Elements<'_> {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        if self.step >= self.total {
            return None;
        }
        if self.step > 0 {
            let f = self.space.field;
            if f.is_binary() {
                let i = gf2::gray_flip(self.step);
                self.current.add_scaled_assign(1, &self.space.basis[i]);
            } else {
                let mut i = 0;
                loop {
                    self.current.add_scaled_assign(1, &self.space.basis[i]);
                    self.digits[i] += 1;
                    if self.digits[i] == f.q() {
                        self.digits[i] = 0;
                        i += 1;
                    } else {
                        break;
                    }
                }
            }
        }
        self.step += 1;
        Some(self.current.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.step) as usize;
        (left, Some(left))
    }
}
