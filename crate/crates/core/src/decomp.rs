//! r-decomposability, primitivity and the primitive-core reduction.
//!
//! A space `S ⊂ Mat_{n,p}` is equivalent to a subspace of `ℛ(σ,τ)` exactly
//! when some `(p-τ)`-dimensional `G ⊂ F^p` is mapped by every element into a
//! common `σ`-dimensional `H ⊂ F^n`. For fixed `G` the smallest candidate for
//! `H` is the span of `S G`, so only `G` is searched.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::grassmann;
use crate::linalg::Echelon;
use crate::matrix::{Matrix, Vector};
use crate::space::{Covector, MatSpace};

pub use crate::grassmann::{gaussian_binomial, subspaces, SubspaceIterator};

/// Above this many candidate `G`, the search runs in parallel.
const PAR_THRESHOLD: u128 = 512;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionWitness {
    pub s: usize,
    pub t: usize,
    /// Basis of `G ⊂ F^p`, `dim G = p - t`.
    pub g: Vec<Vector>,
    /// Basis of `H ⊂ F^n`, `dim H = s`.
    pub h: Vec<Vector>,
}

impl DecompositionWitness {
    /// Checks dimensions and that the basepoint and every generator map `G` into `H`.
    pub fn verify(&self, space: &MatSpace) -> bool {
        let f = space.field();
        let (n, p) = space.shape();
        let g = Echelon::from_vectors(f, p, self.g.iter().map(|v| v.as_slice()));
        let h = Echelon::from_vectors(f, n, self.h.iter().map(|v| v.as_slice()));
        if self.s > n || self.t > p || g.dim() != p - self.t || h.dim() != self.s || self.g.len() != g.dim() {
            return false;
        }
        std::iter::once(space.base()).chain(space.basis()).all(|m| self.g.iter().all(|x| h.contains(&m.mul_vec(x))))
    }
}

/// Smallest `H` for `G`, or `None` as soon as its dimension would exceed `sigma`.
fn forced_image(space: &MatSpace, g: &[Vector], sigma: usize) -> Option<Echelon> {
    let mut h = Echelon::new(space.field(), space.n());
    for x in g {
        for m in std::iter::once(space.base()).chain(space.basis()) {
            h.insert(&m.mul_vec(x));
            if h.dim() > sigma {
                return None;
            }
        }
    }
    Some(h)
}

fn check_split(space: &MatSpace, sigma: usize, tau: usize) -> Result<()> {
    if sigma + tau > space.n().min(space.p()) {
        return Err(Error::ParamOutOfRange(format!(
            "split ({sigma},{tau}) exceeds min(n,p) = {}",
            space.n().min(space.p())
        )));
    }
    Ok(())
}

/// A witness that `space` is equivalent to a subspace of `ℛ(sigma, tau)`.
///
/// `G` is searched in canonical order; the first admissible `G` is returned.
pub fn equiv_sub_compression(space: &MatSpace, sigma: usize, tau: usize) -> Result<Option<DecompositionWitness>> {
    check_split(space, sigma, tau)?;
    let f = space.field();
    let (n, p) = space.shape();
    let k = p - tau;
    let build = |g: &[Vector]| {
        forced_image(space, g, sigma).map(|h| DecompositionWitness {
            s: sigma,
            t: tau,
            g: g.to_vec(),
            h: h.extend_to(sigma).into_rows(),
        })
    };
    debug_assert!(sigma <= n);
    let found = if gaussian_binomial(p, k, f.size() as u64) > PAR_THRESHOLD {
        let strata = grassmann::strata(f, p, k);
        strata.par_iter().find_map_first(|st| {
            let mut hit = None;
            st.for_each(|g| {
                hit = build(g);
                hit.is_none()
            });
            hit
        })
    } else {
        let mut hit = None;
        for st in grassmann::strata(f, p, k) {
            st.for_each(|g| {
                hit = build(g);
                hit.is_none()
            });
            if hit.is_some() {
                break;
            }
        }
        hit
    };
    debug_assert!(found.as_ref().is_none_or(|w| w.verify(space)));
    Ok(found)
}

/// Reference search that also enumerates every `H`; used to cross-check
/// [`equiv_sub_compression`].
pub fn equiv_sub_compression_exhaustive(
    space: &MatSpace,
    sigma: usize,
    tau: usize,
) -> Result<Option<DecompositionWitness>> {
    check_split(space, sigma, tau)?;
    let f = space.field();
    let (n, p) = space.shape();
    let hs: Vec<Echelon> = subspaces(f, n, sigma)?.collect();
    for g in subspaces(f, p, p - tau)? {
        for h in &hs {
            let w = DecompositionWitness { s: sigma, t: tau, g: g.rows().to_vec(), h: h.rows().to_vec() };
            if w.verify(space) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// First split `(σ, r-σ)`, σ ascending, admitting a witness.
pub fn is_r_decomposable(space: &MatSpace, r: usize) -> Result<Option<DecompositionWitness>> {
    if r > space.n().min(space.p()) {
        return Err(Error::ParamOutOfRange(format!("r = {r} exceeds min(n,p) = {}", space.n().min(space.p()))));
    }
    for sigma in 0..=r {
        if let Some(w) = equiv_sub_compression(space, sigma, r - sigma)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// The first condition of the primitivity definition that fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonPrimitive {
    /// (i) a nonzero vector killed by every matrix.
    CommonKernel(Vector),
    /// (ii) all images inside the hyperplane `ker(h)` of `F^n`.
    ImagesInHyperplane(Vector),
    /// (iii) restricting to the hyperplane `ker(h)` of `F^p` lowers the upper-rank.
    ColumnHyperplane(Vector),
    /// (iv) composing with the quotient by the line `span(d)` of `F^n` lowers the upper-rank.
    RowLine(Vector),
}

impl NonPrimitive {
    pub fn condition(&self) -> &'static str {
        match self {
            NonPrimitive::CommonKernel(_) => "i",
            NonPrimitive::ImagesInHyperplane(_) => "ii",
            NonPrimitive::ColumnHyperplane(_) => "iii",
            NonPrimitive::RowLine(_) => "iv",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityReport {
    pub upper_rank: usize,
    pub failure: Option<NonPrimitive>,
}

impl PrimitivityReport {
    pub fn is_primitive(&self) -> bool {
        self.failure.is_none()
    }
}

/// Matrix with columns spanning `ker(h)`, size `p x (p-1)`.
fn hyperplane_matrix(h: &Covector) -> Matrix {
    Matrix::from_columns(h.field(), h.len(), &h.kernel_basis())
}

/// Matrix of a surjection `F^n -> F^{n-1}` with kernel `span(d)`.
fn quotient_matrix(d: &Covector) -> Matrix {
    let f = d.field();
    let ann = Echelon::from_vectors(f, d.len(), [d.entries()]).annihilator();
    Matrix::from_row_vectors(f, d.len(), &ann)
}

fn common_kernel(space: &MatSpace) -> Option<Vector> {
    let f = space.field();
    let (n, p) = space.shape();
    let rows: Vec<Vector> = space.basis().iter().flat_map(|b| (0..n).map(|i| b.row(i).to_vec())).collect();
    Matrix::from_row_vectors(f, p, &rows).kernel_basis().into_iter().next()
}

fn image_annihilator(space: &MatSpace) -> Option<Vector> {
    let f = space.field();
    let (n, p) = space.shape();
    let mut im = Echelon::new(f, n);
    for b in space.basis() {
        for j in 0..p {
            im.insert(&b.column(j));
        }
    }
    im.annihilator().into_iter().next()
}

/// Tests the four primitivity conditions in order (i)..(iv).
pub fn is_primitive(space: &MatSpace, budget: Budget) -> Result<PrimitivityReport> {
    if !space.is_linear() {
        return Err(Error::NotLinear);
    }
    let f = space.field();
    let (n, p) = space.shape();
    let r = space.upper_rank(budget)?;
    let report = |failure| Ok(PrimitivityReport { upper_rank: r, failure });
    if p > 0 {
        if let Some(x) = common_kernel(space) {
            return report(Some(NonPrimitive::CommonKernel(crate::linalg::normalize(f, &x).expect("nonzero"))));
        }
    }
    if n > 0 {
        if let Some(h) = image_annihilator(space) {
            return report(Some(NonPrimitive::ImagesInHyperplane(crate::linalg::normalize(f, &h).expect("nonzero"))));
        }
    }
    if r > 0 {
        for h in Covector::all(f, p) {
            if space.right_multiply(&hyperplane_matrix(&h))?.rank_at_most(r - 1, budget)? {
                return report(Some(NonPrimitive::ColumnHyperplane(h.entries().to_vec())));
            }
        }
        for d in Covector::all(f, n) {
            if space.left_multiply(&quotient_matrix(&d))?.rank_at_most(r - 1, budget)? {
                return report(Some(NonPrimitive::RowLine(d.entries().to_vec())));
            }
        }
    }
    report(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveReduction {
    /// Rows peeled by condition (iv).
    pub s: usize,
    /// Columns peeled by condition (iii).
    pub t: usize,
    /// Shape of the core.
    pub s_prime: usize,
    pub t_prime: usize,
    pub core: MatSpace,
    /// Conditions applied, in order.
    pub steps: Vec<NonPrimitive>,
}

/// Strips failing conditions greedily, always taking the first one in the
/// order (i), (ii), (iii), (iv) and the canonical-least witness, until the
/// remaining space is primitive.
///
/// For non-maximal inputs another order might produce an inequivalent core;
/// only this order is implemented.
pub fn primitive_reduction(space: &MatSpace, budget: Budget) -> Result<PrimitiveReduction> {
    if !space.is_linear() {
        return Err(Error::NotLinear);
    }
    let r0 = space.upper_rank(budget)?;
    let (mut s, mut t) = (0, 0);
    let mut steps = Vec::new();
    let mut cur = space.clone();
    loop {
        let rep = is_primitive(&cur, budget)?;
        let Some(fail) = rep.failure else { break };
        cur = match &fail {
            NonPrimitive::CommonKernel(x) => {
                let j = x.iter().position(|&v| v != 0).expect("nonzero");
                cur.delete_rows_cols(&[], &[j])?
            }
            NonPrimitive::ImagesInHyperplane(h) => {
                let j = h.iter().position(|&v| v != 0).expect("nonzero");
                cur.delete_rows_cols(&[j], &[])?
            }
            NonPrimitive::ColumnHyperplane(h) => {
                t += 1;
                cur.right_multiply(&hyperplane_matrix(&Covector::new(cur.field(), h)?))?
            }
            NonPrimitive::RowLine(d) => {
                s += 1;
                cur.left_multiply(&quotient_matrix(&Covector::new(cur.field(), d)?))?
            }
        };
        steps.push(fail);
    }
    let core_rank = cur.upper_rank(budget)?;
    if core_rank + s + t != r0 {
        return Err(Error::Verification(format!("core has upper-rank {core_rank}, expected {} - {s} - {t}", r0)));
    }
    Ok(PrimitiveReduction { s, t, s_prime: cur.n(), t_prime: cur.p(), core: cur, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{compression_space, named_space, vee_construct, CatalogName};
    use crate::field::FieldSpec;

    const UNL: Budget = Budget::UNLIMITED;

    fn entry(name: CatalogName, q: u32, size: Option<usize>) -> MatSpace {
        named_space(name, FieldSpec::new(q).unwrap(), size).unwrap().space
    }

    #[test]
    fn compression_witness() {
        let f3 = FieldSpec::f3();
        let r11 = compression_space(f3, 3, 3, 1, 1).unwrap();
        let w = equiv_sub_compression(&r11, 1, 1).unwrap().unwrap();
        assert!(w.verify(&r11));
        let g = Echelon::from_vectors(f3, 3, w.g.iter().map(|v| v.as_slice()));
        assert_eq!(g, Echelon::from_vectors(f3, 3, [&[0, 1, 0][..], &[0, 0, 1]]));
        assert_eq!(w.h, vec![vec![1, 0, 0]]);
        assert!(equiv_sub_compression(&r11, 0, 1).unwrap().is_none());
        assert!(equiv_sub_compression(&r11, 2, 2).is_err());
        for q in [2, 3] {
            let f = FieldSpec::new(q).unwrap();
            for (n, p) in [(2, 2), (3, 2), (3, 3), (2, 4)] {
                for s in 0..=n.min(p) {
                    for t in 0..=n.min(p) - s {
                        let r = compression_space(f, n, p, s, t).unwrap();
                        let w = is_r_decomposable(&r, s + t).unwrap().unwrap();
                        assert!(w.verify(&r));
                    }
                }
            }
        }
    }

    #[test]
    fn catalog_non_decomposable() {
        let u2 = entry(CatalogName::U2, 2, None);
        assert!(equiv_sub_compression(&u2, 0, 1).unwrap().is_none());
        assert!(equiv_sub_compression(&u2, 1, 0).unwrap().is_none());
        assert!(is_r_decomposable(&entry(CatalogName::U3, 3, None), 2).unwrap().is_none());
        assert!(is_r_decomposable(&entry(CatalogName::J3, 2, None), 2).unwrap().is_none());
        assert!(is_r_decomposable(&entry(CatalogName::U4, 3, None), 3).unwrap().is_none());
        for q in [2, 3] {
            let a3 = entry(CatalogName::Alt, q, Some(3));
            assert!(is_r_decomposable(&a3, 2).unwrap().is_none());
            let v = vee_construct(&a3, 4, 4).unwrap();
            assert!(is_r_decomposable(&v, 3).unwrap().is_none());
        }
    }

    #[test]
    fn agrees_with_exhaustive_search() {
        let mut spaces = vec![
            entry(CatalogName::U2, 2, None),
            entry(CatalogName::U3, 3, None),
            entry(CatalogName::J3, 2, None),
            entry(CatalogName::Alt, 2, Some(3)),
            entry(CatalogName::Triang, 3, Some(2)),
        ];
        let f2 = FieldSpec::f2();
        spaces.push(compression_space(f2, 3, 2, 1, 1).unwrap());
        spaces.push(spaces[1].transpose());
        for s in &spaces {
            for r in 0..=s.n().min(s.p()) {
                for sigma in 0..=r {
                    let fast = equiv_sub_compression(s, sigma, r - sigma).unwrap();
                    let slow = equiv_sub_compression_exhaustive(s, sigma, r - sigma).unwrap();
                    assert_eq!(fast.is_some(), slow.is_some());
                }
            }
        }
    }

    #[test]
    fn primitivity() {
        let f2 = FieldSpec::f2();
        let a3 = entry(CatalogName::Alt, 2, Some(3));
        assert!(is_primitive(&a3, UNL).unwrap().is_primitive());
        let r11 = compression_space(f2, 3, 3, 1, 1).unwrap();
        assert!(!is_primitive(&r11, UNL).unwrap().is_primitive());
        let full = MatSpace::full(f2, 2, 2);
        let rep = is_primitive(&full, UNL).unwrap();
        assert_eq!(rep.failure.as_ref().map(|c| c.condition()), Some("iii"));
        let u2 = entry(CatalogName::U2, 2, None);
        assert_eq!(is_primitive(&u2, UNL), Err(Error::NotLinear));
        assert!(is_primitive(&MatSpace::zero(f2, 0, 0), UNL).unwrap().is_primitive());
        assert_eq!(is_primitive(&MatSpace::zero(f2, 2, 2), UNL).unwrap().failure.map(|c| c.condition()), Some("i"));
    }

    #[test]
    fn reductions() {
        let f2 = FieldSpec::f2();
        let r11 = compression_space(f2, 3, 3, 1, 1).unwrap();
        let red = primitive_reduction(&r11, UNL).unwrap();
        assert_eq!((red.s, red.t, red.s_prime, red.t_prime), (1, 1, 0, 0));

        for q in [2, 3] {
            let a3 = entry(CatalogName::Alt, q, Some(3));
            let red = primitive_reduction(&a3, UNL).unwrap();
            assert_eq!((red.s, red.t), (0, 0));
            assert_eq!(red.core, a3);

            let v = vee_construct(&a3, 4, 4).unwrap();
            let red = primitive_reduction(&v, UNL).unwrap();
            assert_eq!((red.s_prime, red.t_prime), (3, 3));
            assert_eq!(red.s + red.t, 1);
            assert_eq!(red.core.upper_rank(UNL).unwrap(), 2);
            assert!(is_primitive(&red.core, UNL).unwrap().is_primitive());
            assert_eq!(red.core.dim(), 3);
        }
    }
}
