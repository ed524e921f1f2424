//! Spans of vectors kept in reduced row-echelon form, linear solves and
//! projective enumeration.

use crate::field::{Elem, FieldSpec};
use crate::matrix::{Matrix, Vector};

/// A subspace of `F_q^width` held as fully reduced, pivot-sorted rows.
///
/// Two `Echelon`s spanning the same subspace have identical rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Echelon {
    field: FieldSpec,
    width: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(field: FieldSpec, width: usize) -> Self {
        Echelon { field, width, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn from_vectors<'a>(field: FieldSpec, width: usize, vectors: impl IntoIterator<Item = &'a [Elem]>) -> Self {
        let mut e = Self::new(field, width);
        for v in vectors {
            e.insert(v);
        }
        e
    }

    /// Full space `F_q^width`.
    pub fn full(field: FieldSpec, width: usize) -> Self {
        let mut e = Self::new(field, width);
        for i in 0..width {
            let mut v = vec![0; width];
            v[i] = 1;
            e.insert(&v);
        }
        e
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn into_rows(self) -> Vec<Vector> {
        self.rows
    }

    /// Subtracts the span's components so that `v` vanishes on every pivot.
    pub fn reduce(&self, v: &mut [Elem]) {
        let f = self.field;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc];
            if c != 0 {
                let neg = f.neg(c);
                for (x, &r) in v.iter_mut().zip(row) {
                    if r != 0 {
                        *x = f.mul_add(neg, r, *x);
                    }
                }
            }
        }
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Coordinates of `v` in the row basis, or `None` when outside the span.
    pub fn coordinates(&self, v: &[Elem]) -> Option<Vector> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&pc| v[pc]).collect())
    }

    /// Inserts `v`; returns false when it already lies in the span.
    pub fn insert(&mut self, v: &[Elem]) -> bool {
        debug_assert_eq!(v.len(), self.width);
        let f = self.field;
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(lead) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv_nonzero(w[lead]);
        for x in w.iter_mut() {
            *x = f.mul(inv, *x);
        }
        for row in self.rows.iter_mut() {
            let c = row[lead];
            if c != 0 {
                let neg = f.neg(c);
                for (x, &r) in row.iter_mut().zip(&w) {
                    if r != 0 {
                        *x = f.mul_add(neg, r, *x);
                    }
                }
            }
        }
        let at = self.pivots.partition_point(|&p| p < lead);
        self.pivots.insert(at, lead);
        self.rows.insert(at, w);
        true
    }

    /// Extends a basis of this span by standard vectors (lowest index first)
    /// until it reaches dimension `target`.
    pub fn extend_to(&self, target: usize) -> Echelon {
        let mut e = self.clone();
        for i in 0..self.width {
            if e.dim() >= target {
                break;
            }
            let mut v = vec![0; self.width];
            v[i] = 1;
            e.insert(&v);
        }
        e
    }

    pub fn is_subspace_of(&self, other: &Echelon) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_row_vectors(self.field, self.width, &self.rows)
    }

    /// Basis of the annihilator `{u : u . v = 0 for all v in span}`.
    pub fn annihilator(&self) -> Vec<Vector> {
        if self.rows.is_empty() {
            return Echelon::full(self.field, self.width).into_rows();
        }
        self.to_matrix().kernel_basis()
    }

    /// Every element of the span, in odometer order on coordinates.
    pub fn elements(&self) -> Vec<Vector> {
        let f = self.field;
        let mut out = vec![vec![0; self.width]];
        for row in &self.rows {
            let mut next = Vec::with_capacity(out.len() * f.size());
            for c in f.elements() {
                for v in &out {
                    next.push(v.iter().zip(row).map(|(&a, &b)| f.mul_add(c, b, a)).collect());
                }
            }
            out = next;
        }
        out
    }
}

/// A particular solution of `a * x = b`, if one exists.
pub fn solve(a: &Matrix, b: &[Elem]) -> Option<Vector> {
    let f = a.field();
    let (n, p) = a.shape();
    debug_assert_eq!(b.len(), n);
    let mut aug = Matrix::zeros(f, n, p + 1);
    for i in 0..n {
        for j in 0..p {
            aug.set(i, j, a.get(i, j));
        }
        aug.set(i, p, b[i]);
    }
    let res = aug.rref_and_rank();
    if res.pivot_cols.last() == Some(&p) {
        return None;
    }
    let mut x = vec![0; p];
    for (i, &pc) in res.pivot_cols.iter().enumerate() {
        x[pc] = res.rref.get(i, p);
    }
    Some(x)
}

/// All `c` with `sum c_i * vectors[i] = 0`.
pub fn dependencies(field: FieldSpec, width: usize, vectors: &[Vector]) -> Vec<Vector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    Matrix::from_columns(field, width, vectors).kernel_basis()
}

/// Canonical representatives of the points of `P(F_q^m)`: nonzero vectors
/// whose first nonzero entry is 1, in ascending lexicographic order.
pub fn projective_points(field: FieldSpec, m: usize) -> Vec<Vector> {
    let q = field.size();
    let mut out = Vec::new();
    for lead in (0..m).rev() {
        let tail = m - lead - 1;
        let count = q.pow(tail as u32);
        for code in 0..count {
            let mut v = vec![0; m];
            v[lead] = 1;
            let mut c = code;
            for j in (lead + 1..m).rev() {
                v[j] = (c % q) as Elem;
                c /= q;
            }
            out.push(v);
        }
    }
    out
}

/// Scales a nonzero vector so its first nonzero entry is 1.
pub fn normalize(field: FieldSpec, v: &[Elem]) -> Option<Vector> {
    let lead = v.iter().position(|&x| x != 0)?;
    let inv = field.inv_nonzero(v[lead]);
    Some(v.iter().map(|&x| field.mul(inv, x)).collect())
}

pub fn dot(field: FieldSpec, a: &[Elem], b: &[Elem]) -> Elem {
    let s: u32 = a.iter().zip(b).map(|(&x, &y)| x as u32 * y as u32).sum();
    (s % field.q() as u32) as Elem
}

/// Basis of the hyperplane `ker(h)` for a normalized covector `h`.
pub fn hyperplane_basis(field: FieldSpec, h: &[Elem]) -> Vec<Vector> {
    let m = h.len();
    let j = h.iter().position(|&x| x != 0).expect("zero covector");
    debug_assert_eq!(h[j], 1);
    (0..m)
        .filter(|&i| i != j)
        .map(|i| {
            let mut v = vec![0; m];
            v[i] = 1;
            v[j] = field.neg(h[i]);
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echelon_is_canonical() {
        let f2 = FieldSpec::f2();
        let a = Echelon::from_vectors(f2, 3, [&[1u8, 1, 0][..], &[0, 1, 1]]);
        let b = Echelon::from_vectors(f2, 3, [&[1u8, 0, 1][..], &[1, 1, 0], &[0, 1, 1]]);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
        assert_eq!(a.rows(), &[vec![1, 0, 1], vec![0, 1, 1]]);
        assert!(a.contains(&[1, 0, 1]));
        assert!(!a.contains(&[1, 0, 0]));
        assert_eq!(a.coordinates(&[1, 1, 0]), Some(vec![1, 1]));
    }

    #[test]
    fn annihilator_and_elements() {
        let f3 = FieldSpec::f3();
        let e = Echelon::from_vectors(f3, 3, [&[1u8, 2, 0][..]]);
        let ann = e.annihilator();
        assert_eq!(ann.len(), 2);
        for u in &ann {
            assert_eq!(dot(f3, u, &[1, 2, 0]), 0);
        }
        assert_eq!(e.elements().len(), 3);
        assert_eq!(Echelon::full(f3, 2).elements().len(), 9);
    }

    #[test]
    fn projective_counts() {
        for (q, m, count) in [(2, 3, 7), (3, 2, 4), (3, 4, 40), (5, 2, 6)] {
            let f = FieldSpec::new(q).unwrap();
            let pts = projective_points(f, m);
            assert_eq!(pts.len(), count);
            let mut sorted = pts.clone();
            sorted.sort();
            assert_eq!(sorted, pts);
            assert!(pts.iter().all(|v| normalize(f, v).as_ref() == Some(v)));
        }
    }

    #[test]
    fn solve_and_hyperplanes() {
        let f3 = FieldSpec::f3();
        let a = Matrix::from_ints(f3, &[&[1, 1], &[0, 1]]);
        let x = solve(&a, &[2, 1]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![2, 1]);
        let sing = Matrix::from_ints(f3, &[&[1, 1], &[1, 1]]);
        assert!(solve(&sing, &[1, 0]).is_none());
        let h = vec![0u8, 1, 2];
        let basis = hyperplane_basis(f3, &h);
        assert_eq!(basis.len(), 2);
        assert!(basis.iter().all(|v| dot(f3, &h, v) == 0));
    }
}
