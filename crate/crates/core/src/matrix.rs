//! Dense matrices over a prime field.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::gf2;

/// A column (or row) vector of field elements.
pub type Vector = Vec<Elem>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

/// Reduced row-echelon form together with the row operations producing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrefResult {
    pub rref: Matrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    /// Invertible, with `transform * input == rref`.
    pub transform: Matrix,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// The elementary matrix `E_{i,j}` (zero-based indices).
    pub fn unit(field: FieldSpec, rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        m.data[i * cols + j] = 1;
        m
    }

    pub fn diagonal(field: FieldSpec, diag: &[Elem]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(field, n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = field.reduce(d as i64);
        }
        m
    }

    /// Builds from row-major data, rejecting entries outside `0..q`.
    pub fn from_vec(field: FieldSpec, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(&v) = data.iter().find(|&&v| v >= field.q()) {
            return Err(Error::NonCanonicalEntry { value: v as u32, q: field.q() });
        }
        Ok(Matrix { field, rows, cols, data })
    }

    /// Builds from signed integer rows, reducing every entry modulo `q`.
    pub fn from_ints(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n * p);
        for r in rows {
            assert_eq!(r.len(), p, "ragged rows");
            data.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Matrix { field, rows: n, cols: p, data }
    }

    pub fn from_fn(field: FieldSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(field.reduce(f(i, j) as i64));
            }
        }
        Matrix { field, rows, cols, data }
    }

    /// Matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(field: FieldSpec, rows: usize, columns: &[Vector]) -> Self {
        Self::from_fn(field, rows, columns.len(), |i, j| columns[j][i])
    }

    /// Matrix whose rows are the given vectors of length `cols`.
    pub fn from_row_vectors(field: FieldSpec, cols: usize, rows: &[Vector]) -> Self {
        Self::from_fn(field, rows.len(), cols, |i, j| rows[i][j])
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        debug_assert!(v < self.field.q());
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Row-major entries; this is also the vectorization used for spaces.
    #[inline]
    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Elem> {
        self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_same(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { left: self.field.q(), right: other.field.q() });
        }
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same(other)?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { data, field: self.field, rows: self.rows, cols: self.cols })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same(other)?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Matrix { data, field: self.field, rows: self.rows, cols: self.cols })
    }

    /// `self += c * other`, shapes assumed equal.
    pub(crate) fn add_scaled_assign(&mut self, c: Elem, other: &Matrix) {
        debug_assert_eq!(self.shape(), other.shape());
        if c == 0 {
            return;
        }
        let f = self.field;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.mul_add(c, b, *a);
        }
    }

    pub fn scale(&self, c: Elem) -> Matrix {
        let f = self.field;
        Matrix {
            data: self.data.iter().map(|&a| f.mul(c, a)).collect(),
            field: self.field,
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { left: self.field.q(), right: other.field.q() });
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Matrix) -> Matrix {
        let f = self.field;
        let q = f.q() as u32;
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut data = vec![0u8; n * p];
        let mut acc = vec![0u32; p];
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..m {
                let a = self.data[i * m + k] as u32;
                if a == 0 {
                    continue;
                }
                let orow = &other.data[k * p..(k + 1) * p];
                for (s, &b) in acc.iter_mut().zip(orow) {
                    *s += a * b as u32;
                }
            }
            for (d, s) in data[i * p..(i + 1) * p].iter_mut().zip(&acc) {
                *d = (s % q) as u8;
            }
        }
        Matrix { field: f, rows: n, cols: p, data }
    }

    /// `self * v` for a column vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &[Elem]) -> Vector {
        debug_assert_eq!(v.len(), self.cols);
        let q = self.field.q() as u32;
        (0..self.rows)
            .map(|i| {
                let s: u32 = self.row(i).iter().zip(v).map(|(&a, &b)| a as u32 * b as u32).sum();
                (s % q) as u8
            })
            .collect()
    }

    /// `v^T * self` for a row vector `v` of length `rows`.
    pub fn left_mul_vec(&self, v: &[Elem]) -> Vector {
        debug_assert_eq!(v.len(), self.rows);
        let q = self.field.q() as u32;
        (0..self.cols)
            .map(|j| {
                let s: u32 = (0..self.rows).map(|i| v[i] as u32 * self.get(i, j) as u32).sum();
                (s % q) as u8
            })
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Submatrix after deleting the given rows and columns.
    pub fn delete(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !cols.contains(j)).collect();
        Matrix::from_fn(self.field, keep_r.len(), keep_c.len(), |i, j| self.get(keep_r[i], keep_c[j]))
    }

    /// Rank; bit-packed XOR elimination over `F_2`.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        if self.field.is_binary() {
            let words = self.cols.div_ceil(64);
            let mut packed = vec![0u64; words * self.rows];
            for i in 0..self.rows {
                for (j, &v) in self.row(i).iter().enumerate() {
                    if v != 0 {
                        packed[i * words + j / 64] |= 1 << (j % 64);
                    }
                }
            }
            if words == 1 {
                return gf2::rank_rows(&mut packed);
            }
            return gf2::rank_wide(&mut packed, words);
        }
        let mut scratch = self.data.clone();
        rank_in_place(self.field, &mut scratch, self.rows, self.cols)
    }

    pub fn rref_and_rank(&self) -> RrefResult {
        let f = self.field;
        let (n, p) = self.shape();
        let mut a = self.clone();
        let mut t = Matrix::identity(f, n);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..p {
            if r == n {
                break;
            }
            let Some(pr) = (r..n).find(|&i| a.get(i, c) != 0) else {
                continue;
            };
            a.swap_rows(r, pr);
            t.swap_rows(r, pr);
            let inv = f.inv_nonzero(a.get(r, c));
            a.scale_row(r, inv);
            t.scale_row(r, inv);
            for i in 0..n {
                if i != r {
                    let factor = a.get(i, c);
                    if factor != 0 {
                        let neg = f.neg(factor);
                        a.add_row_multiple(i, r, neg);
                        t.add_row_multiple(i, r, neg);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        RrefResult { rref: a, rank: r, pivot_cols: pivots, transform: t }
    }

    /// Basis of the right kernel `{v : self * v = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let f = self.field;
        let res = self.rref_and_rank();
        let p = self.cols;
        let mut basis = Vec::with_capacity(p - res.rank);
        for free in (0..p).filter(|c| !res.pivot_cols.contains(c)) {
            let mut v = vec![0u8; p];
            v[free] = 1;
            for (i, &pc) in res.pivot_cols.iter().enumerate() {
                v[pc] = f.neg(res.rref.get(i, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Basis of the left kernel `{u : u^T * self = 0}`.
    pub fn left_kernel_basis(&self) -> Vec<Vector> {
        self.transpose().kernel_basis()
    }

    /// Whether `v` lies in the column space.
    pub fn column_space_contains(&self, v: &[Elem]) -> bool {
        debug_assert_eq!(v.len(), self.rows);
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, v[i]);
        }
        aug.rank() == self.rank()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_invertible() {
            return Err(Error::NotInvertible);
        }
        Ok(self.rref_and_rank().transform)
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let p = self.cols;
        for j in 0..p {
            self.data.swap(a * p + j, b * p + j);
        }
    }

    fn scale_row(&mut self, r: usize, c: Elem) {
        let f = self.field;
        for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *v = f.mul(c, *v);
        }
    }

    /// row[dst] += c * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, c: Elem) {
        let f = self.field;
        let p = self.cols;
        for j in 0..p {
            let s = self.data[src * p + j];
            if s != 0 {
                let d = &mut self.data[dst * p + j];
                *d = f.mul_add(c, s, *d);
            }
        }
    }

    /// Parses the whitespace-separated text format, one row per line.
    pub fn parse_rows(field: FieldSpec, rows: usize, cols: usize, lines: &[&str]) -> Result<Matrix> {
        if lines.len() != rows {
            return Err(Error::ShapeMismatch(format!("expected {rows} rows, got {}", lines.len())));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (i, line) in lines.iter().enumerate() {
            let entries = parse_vector(field, line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            if entries.len() != cols {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {cols} entries, got {}", entries.len()),
                });
            }
            data.extend(entries);
        }
        Ok(Matrix { field, rows, cols, data })
    }
}

/// Parses one line of space-separated decimal entries as field elements.
pub fn parse_vector(field: FieldSpec, line: &str) -> Result<Vector> {
    line.split_whitespace()
        .map(|tok| {
            let v: u32 = tok.parse().map_err(|_| Error::Parse { line: 0, msg: format!("not an integer: {tok:?}") })?;
            field.elem(v)
        })
        .collect()
}

pub fn format_vector(v: &[Elem]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Rank by Gaussian elimination on a row-major scratch buffer.
pub(crate) fn rank_in_place(f: FieldSpec, a: &mut [Elem], n: usize, p: usize) -> usize {
    let mut r = 0;
    for c in 0..p {
        if r == n {
            break;
        }
        let Some(pr) = (r..n).find(|&i| a[i * p + c] != 0) else {
            continue;
        };
        if pr != r {
            for j in c..p {
                a.swap(r * p + j, pr * p + j);
            }
        }
        let inv = f.inv_nonzero(a[r * p + c]);
        for i in r + 1..n {
            let x = a[i * p + c];
            if x == 0 {
                continue;
            }
            let factor = f.neg(f.mul(x, inv));
            for j in c..p {
                let s = a[r * p + j];
                if s != 0 {
                    a[i * p + j] = f.mul_add(factor, s, a[i * p + j]);
                }
            }
        }
        r += 1;
    }
    r
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{}", format_vector(self.row(i)))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<{:?}>{}x{}[", self.field, self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", format_vector(self.row(i)))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    /// Rank via the largest nonvanishing minor, by cofactor expansion.
    fn minor_rank(m: &Matrix) -> usize {
        fn det(f: FieldSpec, a: &[Vec<Elem>]) -> Elem {
            let k = a.len();
            if k == 0 {
                return 1;
            }
            let mut total = 0u8;
            for j in 0..k {
                let sub: Vec<Vec<Elem>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let term = f.mul(a[0][j], det(f, &sub));
                total = if j % 2 == 0 { f.add(total, term) } else { f.sub(total, term) };
            }
            total
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = subsets(n - 1, k);
            for mut s in subsets(n - 1, k - 1) {
                s.push(n - 1);
                out.push(s);
            }
            out
        }
        let fs = m.field();
        for k in (1..=m.rows().min(m.cols())).rev() {
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let a: Vec<Vec<Elem>> = rs.iter().map(|&i| cs.iter().map(|&j| m.get(i, j)).collect()).collect();
                    if det(fs, &a) != 0 {
                        return k;
                    }
                }
            }
        }
        0
    }

    fn all_matrices(field: FieldSpec, n: usize, p: usize) -> impl Iterator<Item = Matrix> {
        let q = field.q() as u64;
        let total = q.pow((n * p) as u32);
        (0..total).map(move |mut code| {
            let mut data = vec![0u8; n * p];
            for d in data.iter_mut() {
                *d = (code % q) as u8;
                code /= q;
            }
            Matrix::from_vec(field, n, p, data).unwrap()
        })
    }

    #[test]
    fn spot_ranks() {
        assert_eq!(Matrix::identity(f(2), 3).rank(), 3);
        assert_eq!(Matrix::zeros(f(3), 2, 3).rank(), 0);
        let m = Matrix::from_ints(f(5), &[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(minor_rank(&m), 1);
        assert_eq!(Matrix::zeros(f(2), 0, 3).rank(), 0);
        assert_eq!(Matrix::zeros(f(2), 3, 0).rank(), 0);
    }

    #[test]
    fn rank_matches_minor_oracle_up_to_3x3() {
        for q in [2, 3] {
            for n in 1..=3 {
                for p in 1..=3 {
                    if q == 3 && n * p > 6 {
                        continue;
                    }
                    for m in all_matrices(f(q), n, p) {
                        let r = m.rank();
                        assert_eq!(r, minor_rank(&m), "{m:?}");
                        assert_eq!(r, m.rref_and_rank().rank);
                        assert_eq!(r, m.transpose().rank());
                    }
                }
            }
        }
        // 3x3 over F_3 is 19683 matrices; sample a structured slice exhaustively by rank agreement.
        for m in all_matrices(f(3), 3, 3).step_by(7) {
            assert_eq!(m.rank(), minor_rank(&m));
        }
    }

    #[test]
    fn rref_transform_invariant() {
        for m in all_matrices(f(3), 2, 3) {
            let res = m.rref_and_rank();
            assert_eq!(res.transform.mul(&m).unwrap(), res.rref);
            assert!(res.transform.is_invertible());
            assert_eq!(res.rank, res.pivot_cols.len());
            let nonzero_rows = (0..res.rref.rows()).filter(|&i| res.rref.row(i).iter().any(|&v| v != 0)).count();
            assert_eq!(nonzero_rows, res.rank);
        }
    }

    #[test]
    fn kernels() {
        assert!(Matrix::identity(f(2), 2).kernel_basis().is_empty());
        let z = Matrix::zeros(f(2), 2, 2).kernel_basis();
        assert_eq!(z.len(), 2);
        assert_eq!(Matrix::from_row_vectors(f(2), 2, &z).rank(), 2);
        // E_{1,1} over F_3: kernel is spanned by e_2; check against enumeration of F_3^2.
        let e11 = Matrix::unit(f(3), 2, 2, 0, 0);
        let k = e11.kernel_basis();
        assert_eq!(k.len(), 1);
        let brute: Vec<Vector> = (0..9u8)
            .map(|c| vec![c % 3, c / 3])
            .filter(|v| v.iter().any(|&x| x != 0) && e11.mul_vec(v).iter().all(|&x| x == 0))
            .collect();
        assert_eq!(brute.len(), 2);
        assert!(brute.iter().all(|v| v[0] == 0));
        assert_eq!(k[0][0], 0);
        for m in all_matrices(f(3), 2, 3) {
            let kb = m.kernel_basis();
            assert_eq!(kb.len(), 3 - m.rank());
            for v in &kb {
                assert!(m.mul_vec(v).iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn products() {
        let f2 = f(2);
        let e12 = Matrix::unit(f2, 2, 2, 0, 1);
        let e21 = Matrix::unit(f2, 2, 2, 1, 0);
        assert_eq!(e12.mul(&e21).unwrap(), Matrix::unit(f2, 2, 2, 0, 0));
        let m = Matrix::from_ints(f(3), &[&[1, 2, 0], &[2, 2, 1]]);
        assert_eq!(Matrix::identity(f(3), 2).mul(&m).unwrap(), m);
        assert!(m.mul(&m).is_err());
        assert!(m.mul(&Matrix::identity(f(5), 3)).is_err());
    }

    #[test]
    fn product_matches_triple_loop() {
        let f3 = f(3);
        let a = Matrix::from_ints(f3, &[&[1, 2, 0], &[2, 1, 1], &[0, 2, 2]]);
        let b = Matrix::from_ints(f3, &[&[2, 0, 1], &[1, 1, 1], &[2, 2, 0]]);
        let c = a.mul(&b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: u32 = (0..3).map(|k| a.get(i, k) as u32 * b.get(k, j) as u32).sum();
                assert_eq!(c.get(i, j) as u32, s % 3);
            }
        }
        assert!(c.rank() <= a.rank().min(b.rank()));
    }

    #[test]
    fn rejects_noncanonical_entries() {
        assert!(Matrix::from_vec(f(3), 1, 2, vec![1, 3]).is_err());
        assert!(Matrix::parse_rows(f(2), 1, 2, &["1 2"]).is_err());
        let m = Matrix::parse_rows(f(3), 2, 2, &["1 2", "0 1"]).unwrap();
        assert_eq!(m.to_string(), "1 2\n0 1\n");
    }

    #[test]
    fn column_space_membership_and_inverse() {
        let f3 = f(3);
        let m = Matrix::from_ints(f3, &[&[1, 0], &[1, 0], &[0, 1]]);
        assert!(m.column_space_contains(&[2, 2, 1]));
        assert!(!m.column_space_contains(&[1, 0, 0]));
        let p = Matrix::from_ints(f3, &[&[1, 1], &[0, 2]]);
        let inv = p.inverse().unwrap();
        assert_eq!(p.mul(&inv).unwrap(), Matrix::identity(f3, 2));
        assert_eq!(Matrix::zeros(f3, 2, 2).inverse(), Err(Error::NotInvertible));
    }
}
