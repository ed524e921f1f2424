//! Enumeration of the `k`-dimensional subspaces of `F_q^m`.
//!
//! Subspaces are produced as RREF bases. The pivot pattern (a `k`-subset of
//! coordinates) partitions the Grassmannian into strata; inside a stratum the
//! entries right of each pivot, outside pivot columns, range freely.

use crate::budget::pow_sat;
use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::linalg::Echelon;
use crate::matrix::Vector;

/// Number of `k`-dimensional subspaces of `F_q^m`, saturating.
pub fn gaussian_binomial(m: usize, k: usize, q: u64) -> u128 {
    if k > m {
        return 0;
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        let a = pow_sat(q, m - i).saturating_sub(1);
        let b = pow_sat(q, i + 1).saturating_sub(1);
        num = match num.checked_mul(a) {
            Some(v) => v,
            None => return u128::MAX,
        };
        den *= b;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    num / den
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn pivot_patterns(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| c[i] < m - k + i) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// One pivot stratum of the Grassmannian.
#[derive(Clone, Debug)]
pub struct Stratum {
    field: FieldSpec,
    m: usize,
    pivots: Vec<usize>,
    /// (row, column) of each free entry.
    free: Vec<(usize, usize)>,
}

impl Stratum {
    pub fn new(field: FieldSpec, m: usize, pivots: Vec<usize>) -> Self {
        let free = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| (c + 1..m).filter(|j| !pivots.contains(j)).map(move |j| (i, j)))
            .collect();
        Stratum { field, m, pivots, free }
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn free_entries(&self) -> usize {
        self.free.len()
    }

    pub fn len(&self) -> u128 {
        pow_sat(self.field.size() as u128, self.free.len())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Calls `visit` with each RREF basis of the stratum, reusing one buffer.
    /// Stops early when `visit` returns `false`.
    pub fn for_each(&self, mut visit: impl FnMut(&[Vector]) -> bool) {
        let mut rows: Vec<Vector> = self
            .pivots
            .iter()
            .map(|&c| {
                let mut v = vec![0; self.m];
                v[c] = 1;
                v
            })
            .collect();
        let q = self.field.q();
        let mut digits: Vec<Elem> = vec![0; self.free.len()];
        loop {
            if !visit(&rows) {
                return;
            }
            let mut i = 0;
            loop {
                if i == self.free.len() {
                    return;
                }
                let (r, c) = self.free[i];
                digits[i] += 1;
                if digits[i] == q {
                    digits[i] = 0;
                    rows[r][c] = 0;
                    i += 1;
                } else {
                    rows[r][c] = digits[i];
                    break;
                }
            }
        }
    }
}

/// Iterator over all `k`-dimensional subspaces of `F_q^m`, stratum by
/// stratum in lexicographic pivot order.
pub struct SubspaceIterator {
    field: FieldSpec,
    m: usize,
    patterns: std::vec::IntoIter<Vec<usize>>,
    current: Option<(Stratum, Vec<Elem>, Vec<Vector>, bool)>,
}

/// `k`-dimensional subspaces of `F_q^m`.
pub fn subspaces(field: FieldSpec, m: usize, k: usize) -> Result<SubspaceIterator> {
    if k > m {
        return Err(Error::ParamOutOfRange(format!("{k}-dimensional subspaces of F^{m}")));
    }
    Ok(SubspaceIterator { field, m, patterns: pivot_patterns(m, k).into_iter(), current: None })
}

/// The pivot strata of the `k`-dimensional subspaces of `F_q^m`.
pub fn strata(field: FieldSpec, m: usize, k: usize) -> Vec<Stratum> {
    pivot_patterns(m, k).into_iter().map(|p| Stratum::new(field, m, p)).collect()
}

impl Iterator for SubspaceIterator {
    type Item = Echelon;

    fn next(&mut self) -> Option<Echelon> {
        loop {
            if self.current.is_none() {
                let pattern = self.patterns.next()?;
                let st = Stratum::new(self.field, self.m, pattern);
                let rows = st
                    .pivots
                    .iter()
                    .map(|&c| {
                        let mut v = vec![0; self.m];
                        v[c] = 1;
                        v
                    })
                    .collect();
                let digits = vec![0; st.free.len()];
                self.current = Some((st, digits, rows, true));
            }
            let (st, digits, rows, fresh) = self.current.as_mut().expect("set above");
            if *fresh {
                *fresh = false;
                return Some(Echelon::from_vectors(self.field, self.m, rows.iter().map(|r| r.as_slice())));
            }
            let q = self.field.q();
            let mut i = 0;
            let advanced = loop {
                if i == st.free.len() {
                    break false;
                }
                let (r, c) = st.free[i];
                digits[i] += 1;
                if digits[i] == q {
                    digits[i] = 0;
                    rows[r][c] = 0;
                    i += 1;
                } else {
                    rows[r][c] = digits[i];
                    break true;
                }
            };
            if advanced {
                return Some(Echelon::from_vectors(self.field, self.m, rows.iter().map(|r| r.as_slice())));
            }
            self.current = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts_match_product_formula() {
        for q in [2u32, 3] {
            let f = FieldSpec::new(q).unwrap();
            for m in 0..=6 {
                for k in 0..=m {
                    let n = subspaces(f, m, k).unwrap().count() as u128;
                    assert_eq!(n, gaussian_binomial(m, k, q as u64), "q={q} m={m} k={k}");
                    let by_strata: u128 = strata(f, m, k).iter().map(|s| s.len()).sum();
                    assert_eq!(by_strata, n);
                }
            }
        }
        assert_eq!(gaussian_binomial(9, 5, 2), 3_309_747);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(3, 2, 2), 7);
        assert_eq!(gaussian_binomial(5, 7, 2), 0);
    }

    #[test]
    fn brute_force_two_planes() {
        // every pair of vectors in F_2^4, deduplicated by span
        let f = FieldSpec::f2();
        let vecs: Vec<Vector> = (1..16u8).map(|x| (0..4).map(|i| (x >> i) & 1).collect()).collect();
        let mut spans = HashSet::new();
        for a in &vecs {
            for b in &vecs {
                let e = Echelon::from_vectors(f, 4, [a.as_slice(), b.as_slice()]);
                if e.dim() == 2 {
                    spans.insert(e);
                }
            }
        }
        let listed: HashSet<Echelon> = subspaces(f, 4, 2).unwrap().collect();
        assert_eq!(spans, listed);
        assert_eq!(listed.len(), 35);
    }

    #[test]
    fn distinct_and_canonical() {
        let f = FieldSpec::f3();
        let all: Vec<Echelon> = subspaces(f, 4, 2).unwrap().collect();
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        for e in &all {
            assert_eq!(e.dim(), 2);
            let again = Echelon::from_vectors(f, 4, e.rows().iter().map(|r| r.as_slice()));
            assert_eq!(&again, e);
        }
        assert_eq!(subspaces(f, 3, 0).unwrap().count(), 1);
        assert!(subspaces(f, 2, 3).is_err());
    }

    #[test]
    fn stratum_visit_matches_iterator() {
        let f = FieldSpec::f2();
        let mut seen = Vec::new();
        for st in strata(f, 5, 2) {
            st.for_each(|rows| {
                seen.push(Echelon::from_vectors(f, 5, rows.iter().map(|r| r.as_slice())));
                true
            });
        }
        let listed: Vec<Echelon> = subspaces(f, 5, 2).unwrap().collect();
        assert_eq!(seen, listed);
    }
}
