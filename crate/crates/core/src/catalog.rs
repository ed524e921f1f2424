//! Named spaces and constructions, with their known dimension and upper-rank.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::Matrix;
use crate::space::MatSpace;

/// `ℛ(s,t)`: matrices whose lower-right `(n-s) x (p-t)` block is zero.
pub fn compression_space(field: FieldSpec, n: usize, p: usize, s: usize, t: usize) -> Result<MatSpace> {
    if s > n || t > p {
        return Err(Error::ParamOutOfRange(format!("R({s},{t}) in Mat_{n}x{p}")));
    }
    let gens: Vec<Matrix> = (0..n)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .filter(|&(i, j)| i < s || j < t)
        .map(|(i, j)| Matrix::unit(field, n, p, i, j))
        .collect();
    MatSpace::linear(field, n, p, &gens)
}

/// `n t + s (p - t)`.
pub fn dim_compression(n: usize, p: usize, s: usize, t: usize) -> usize {
    n * t + s * (p - t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CatalogName {
    U2,
    U3,
    U4,
    J3,
    Alt,
    Triang,
}

impl CatalogName {
    pub const ALL: [CatalogName; 6] =
        [CatalogName::U2, CatalogName::U3, CatalogName::U4, CatalogName::J3, CatalogName::Alt, CatalogName::Triang];

    /// Field the construction is tied to, if any.
    pub fn defining_field(self) -> Option<u8> {
        match self {
            CatalogName::U2 | CatalogName::J3 => Some(2),
            CatalogName::U3 | CatalogName::U4 => Some(3),
            CatalogName::Alt | CatalogName::Triang => None,
        }
    }

    /// Natural size; `None` for the families indexed by `n`.
    pub fn fixed_size(self) -> Option<usize> {
        match self {
            CatalogName::U2 => Some(2),
            CatalogName::U3 | CatalogName::J3 => Some(3),
            CatalogName::U4 => Some(4),
            CatalogName::Alt | CatalogName::Triang => None,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            CatalogName::U2 => "U2: affine [[x,y],[0,x+1]] over F_2",
            CatalogName::U3 => "U3: affine [[x,a,b],[0,x+1,c],[0,0,x-1]] over F_3",
            CatalogName::U4 => "U4: linear 4x4 upper triangular with diagonal (x,y,x+y,x-y) over F_3",
            CatalogName::J3 => "J3: upper-triangular trace-zero 3x3 matrices over F_2",
            CatalogName::Alt => "alt: alternating n x n matrices",
            CatalogName::Triang => "triang: upper-triangular n x n matrices",
        }
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CatalogName::U2 => "u2",
            CatalogName::U3 => "u3",
            CatalogName::U4 => "u4",
            CatalogName::J3 => "j3",
            CatalogName::Alt => "alt",
            CatalogName::Triang => "triang",
        })
    }
}

impl FromStr for CatalogName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CatalogName::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ParamOutOfRange(format!("unknown catalog space `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub dim: usize,
    pub upper_rank: usize,
    /// `r` for which the space is known not to be `r`-decomposable.
    pub not_decomposable: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: CatalogName,
    pub field: FieldSpec,
    /// Size of the unpadded construction.
    pub size: usize,
    pub space: MatSpace,
    pub expected: Expected,
}

fn unit(f: FieldSpec, n: usize, i: usize, j: usize) -> Matrix {
    Matrix::unit(f, n, n, i, j)
}

fn diag(f: FieldSpec, d: &[i64]) -> Matrix {
    let d: Vec<_> = d.iter().map(|&x| f.reduce(x)).collect();
    Matrix::diagonal(f, &d)
}

fn strict_upper(f: FieldSpec, n: usize) -> impl Iterator<Item = Matrix> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| unit(f, n, i, j)))
}

/// A named space of natural size `n x n` (or `size` for the families).
pub fn named_space(name: CatalogName, field: FieldSpec, size: Option<usize>) -> Result<CatalogEntry> {
    if let Some(q) = name.defining_field() {
        if field.q() != q {
            return Err(Error::WrongField { name: name.to_string(), expected: q, got: field.q() });
        }
    }
    let n = match (name.fixed_size(), size) {
        (Some(k), None) => k,
        (Some(k), Some(m)) if m == k => k,
        (Some(k), Some(m)) => return Err(Error::ParamOutOfRange(format!("{name} has size {k}, not {m}"))),
        (None, Some(m)) => m,
        (None, None) => return Err(Error::ParamOutOfRange(format!("{name} needs a size"))),
    };
    let f = field;
    let (space, expected) = match name {
        CatalogName::U2 => {
            let base = diag(f, &[0, 1]);
            let gens = [Matrix::identity(f, 2), unit(f, 2, 0, 1)];
            (MatSpace::affine(&base, &gens)?, Expected { dim: 2, upper_rank: 1, not_decomposable: Some(1) })
        }
        CatalogName::U3 => {
            let base = diag(f, &[0, 1, -1]);
            let gens: Vec<Matrix> = std::iter::once(Matrix::identity(f, 3)).chain(strict_upper(f, 3)).collect();
            (MatSpace::affine(&base, &gens)?, Expected { dim: 4, upper_rank: 2, not_decomposable: Some(2) })
        }
        CatalogName::U4 => {
            let x = diag(f, &[1, 0, 1, 1]);
            let y = diag(f, &[0, 1, 1, -1]);
            let gens: Vec<Matrix> = [x, y].into_iter().chain(strict_upper(f, 4)).collect();
            (MatSpace::linear(f, 4, 4, &gens)?, Expected { dim: 8, upper_rank: 3, not_decomposable: Some(3) })
        }
        CatalogName::J3 => {
            let a = diag(f, &[1, 0, 1]);
            let b = diag(f, &[0, 1, 1]);
            let gens: Vec<Matrix> = [a, b].into_iter().chain(strict_upper(f, 3)).collect();
            (MatSpace::linear(f, 3, 3, &gens)?, Expected { dim: 5, upper_rank: 2, not_decomposable: Some(2) })
        }
        CatalogName::Alt => {
            let gens: Vec<Matrix> = strict_upper(f, n)
                .map(|m| {
                    let mt = m.transpose();
                    m.sub(&mt).expect("same shape")
                })
                .collect();
            let odd = n % 2 == 1;
            (
                MatSpace::linear(f, n, n, &gens)?,
                Expected {
                    dim: n * n.saturating_sub(1) / 2,
                    upper_rank: 2 * (n / 2),
                    not_decomposable: (n == 3 && odd).then_some(2),
                },
            )
        }
        CatalogName::Triang => {
            let gens: Vec<Matrix> = (0..n).flat_map(|i| (i..n).map(move |j| unit(f, n, i, j))).collect();
            (
                MatSpace::linear(f, n, n, &gens)?,
                Expected { dim: n * (n + 1) / 2, upper_rank: n, not_decomposable: None },
            )
        }
    };
    let entry = CatalogEntry { name, field, size: n, space, expected };
    if cfg!(debug_assertions) && entry.space.cardinality() <= 1 << 16 {
        entry.confirm()?;
    }
    Ok(entry)
}

impl CatalogEntry {
    /// Recomputes dim and upper-rank and compares them with the expected record.
    pub fn confirm(&self) -> Result<()> {
        let dim = self.space.dim();
        let urk = self.space.upper_rank(Budget::for_field(self.field))?;
        if dim != self.expected.dim || urk != self.expected.upper_rank {
            return Err(Error::Verification(format!(
                "{}: dim {dim} urk {urk}, expected dim {} urk {}",
                self.name, self.expected.dim, self.expected.upper_rank
            )));
        }
        Ok(())
    }

    /// Zero-pads the space to `Mat_{n,p}`; dim and upper-rank are unchanged.
    pub fn pad_to(mut self, n: usize, p: usize) -> Result<Self> {
        self.space = self.space.pad_to(n, p)?;
        Ok(self)
    }
}

/// `W ∨ Mat_{n-s,p-s}`: block matrices `[[A, B], [0, C]]` with `A ∈ W`.
pub fn vee_construct(w: &MatSpace, n: usize, p: usize) -> Result<MatSpace> {
    let s = w.n();
    if w.p() != s {
        return Err(Error::ShapeMismatch(format!("W must be square, got {}x{}", w.n(), w.p())));
    }
    if !(n >= p && p >= s) {
        return Err(Error::ShapeMismatch(format!("need n >= p >= s, got n={n} p={p} s={s}")));
    }
    let f = w.field();
    let embed = |m: &Matrix| Matrix::from_fn(f, n, p, |i, j| if i < s && j < s { m.get(i, j) } else { 0 });
    let base = embed(w.base());
    let mut gens: Vec<Matrix> = w.basis().iter().map(embed).collect();
    for i in 0..n {
        for j in s..p {
            gens.push(Matrix::unit(f, n, p, i, j));
        }
    }
    MatSpace::new(f, n, p, &base, &gens, w.is_linear())
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNL: Budget = Budget::UNLIMITED;

    #[test]
    fn compression_dims() {
        let f2 = FieldSpec::f2();
        assert_eq!(compression_space(f2, 4, 4, 1, 1).unwrap().dim(), 7);
        assert_eq!(compression_space(f2, 3, 2, 0, 2).unwrap(), MatSpace::full(f2, 3, 2));
        assert_eq!(compression_space(f2, 3, 2, 0, 0).unwrap(), MatSpace::zero(f2, 3, 2));
        let f3 = FieldSpec::f3();
        assert_eq!(compression_space(f3, 3, 3, 1, 1).unwrap().upper_rank(UNL).unwrap(), 2);
        assert!(compression_space(f3, 3, 3, 4, 0).is_err());
        for n in 0..4 {
            for p in 0..4 {
                for s in 0..=n {
                    for t in 0..=p {
                        let r = compression_space(f2, n, p, s, t).unwrap();
                        assert_eq!(r.dim(), dim_compression(n, p, s, t));
                        if s + t <= n.min(p) && n * p <= 16 {
                            assert_eq!(r.upper_rank(UNL).unwrap(), s + t);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dim_formula_instances() {
        for n in 2..=10 {
            for p in 2..=n {
                for r in 2..=p {
                    assert_eq!(dim_compression(n, p, 2, r - 2) + 2 * (n - p + r), n * r + 4);
                    assert_eq!(dim_compression(n, p, 0, r), n * r);
                }
            }
        }
    }

    #[test]
    fn named_values() {
        let f2 = FieldSpec::f2();
        let f3 = FieldSpec::f3();
        for (name, field, size, dim, urk) in [
            (CatalogName::U2, f2, None, 2, 1),
            (CatalogName::U3, f3, None, 4, 2),
            (CatalogName::U4, f3, None, 8, 3),
            (CatalogName::J3, f2, None, 5, 2),
            (CatalogName::Alt, f2, Some(3), 3, 2),
            (CatalogName::Alt, f3, Some(3), 3, 2),
            (CatalogName::Alt, f3, Some(4), 6, 4),
            (CatalogName::Alt, f2, Some(5), 10, 4),
            (CatalogName::Triang, f3, Some(3), 6, 3),
        ] {
            let e = named_space(name, field, size).unwrap();
            assert_eq!(e.space.dim(), dim, "{name}");
            assert_eq!(e.space.upper_rank(UNL).unwrap(), urk, "{name}");
            e.confirm().unwrap();
        }
        let u2 = named_space(CatalogName::U2, f2, None).unwrap().space;
        assert!(!u2.is_linear());
        assert!(!u2.contains(&Matrix::zeros(f2, 2, 2)).unwrap());
        let u3 = named_space(CatalogName::U3, f3, None).unwrap().space;
        assert!(u3.translation_space().contains(&Matrix::identity(f3, 3)).unwrap());
    }

    #[test]
    fn wrong_field_rejected() {
        let f3 = FieldSpec::f3();
        assert!(matches!(named_space(CatalogName::U2, f3, None), Err(Error::WrongField { .. })));
        assert!(matches!(named_space(CatalogName::U4, FieldSpec::f2(), None), Err(Error::WrongField { .. })));
        assert!(named_space(CatalogName::Alt, f3, None).is_err());
        assert!(named_space(CatalogName::U3, f3, Some(4)).is_err());
    }

    #[test]
    fn names_round_trip() {
        for c in CatalogName::ALL {
            assert_eq!(c.to_string().parse::<CatalogName>().unwrap(), c);
        }
        assert!("u5".parse::<CatalogName>().is_err());
    }

    #[test]
    fn padding_keeps_invariants() {
        let f2 = FieldSpec::f2();
        let e = named_space(CatalogName::U2, f2, None).unwrap().pad_to(3, 4).unwrap();
        assert_eq!(e.space.shape(), (3, 4));
        assert_eq!(e.space.dim(), 2);
        assert_eq!(e.space.upper_rank(UNL).unwrap(), 1);
    }

    #[test]
    fn vee_dims() {
        for q in [2, 3] {
            let f = FieldSpec::new(q).unwrap();
            let a3 = named_space(CatalogName::Alt, f, Some(3)).unwrap().space;
            for (n, p) in [(4, 4), (5, 4), (5, 5)] {
                let v = vee_construct(&a3, n, p).unwrap();
                assert_eq!(v.dim(), 3 + (p - 3) * n);
            }
            let v = vee_construct(&a3, 4, 4).unwrap();
            assert_eq!(v.upper_rank(UNL).unwrap(), 3);
        }
        let f2 = FieldSpec::f2();
        let j3 = named_space(CatalogName::J3, f2, None).unwrap().space;
        let v = vee_construct(&j3, 4, 4).unwrap();
        let (n, p) = (4, 4);
        assert_eq!(v.dim() + 2 * (n - p + (p - 1)), n * (p - 1) + 3);
        let w0 = MatSpace::zero(f2, 1, 1);
        // first column zero, everything else free
        let v0 = vee_construct(&w0, 3, 3).unwrap();
        assert_eq!(v0.dim(), 6);
        assert!(v0.basis().iter().all(|b| b.column(0).iter().all(|&x| x == 0)));
        assert!(vee_construct(&a3_of(f2), 3, 4).is_err());
    }

    fn a3_of(f: FieldSpec) -> MatSpace {
        named_space(CatalogName::Alt, f, Some(3)).unwrap().space
    }
}
