//! Affine maps `F : S -> F^n` on matrix spaces: range-compatibility,
//! quasi-range-compatibility, locality and the plane form
//! `F(M) = φ(M X) + M X'`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{pow_sat, Budget};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::linalg::{self, Echelon};
use crate::matrix::{Matrix, Vector};
use crate::space::MatSpace;

/// `F(base + Σ c_i B_i) = at_base + Σ c_i on_basis[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap {
    domain: MatSpace,
    at_base: Vector,
    on_basis: Vec<Vector>,
}

/// `F(M) = M x` on the whole domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityWitness {
    pub x: Vector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RcShape {
    Local(LocalityWitness),
    /// `F(M) = φ(M x) + M x_prime`, with `S x ⊂ P = span(plane)` and `φ`
    /// given in the basis `plane` (column `k` holds the coordinates of `φ(plane[k])`).
    PlaneForm {
        x: Vector,
        x_prime: Vector,
        plane: Vec<Vector>,
        phi: Matrix,
    },
    Neither,
}

fn check_vec(field: FieldSpec, n: usize, v: &[Elem]) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!("value of length {} in F^{n}", v.len())));
    }
    if let Some(&x) = v.iter().find(|&&x| x >= field.q()) {
        return Err(Error::NonCanonicalEntry { value: x as u32, q: field.q() });
    }
    Ok(())
}

fn column_span(m: &Matrix) -> Echelon {
    let mut e = Echelon::new(m.field(), m.rows());
    for j in 0..m.cols() {
        e.insert(&m.column(j));
    }
    e
}

fn axpy(f: FieldSpec, c: Elem, x: &[Elem], y: &mut [Elem]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = f.mul_add(c, xi, *yi);
    }
}

impl AffineMap {
    /// Map given by its values on the canonical base and basis of `domain`.
    pub fn new(domain: MatSpace, at_base: Vector, on_basis: Vec<Vector>) -> Result<Self> {
        let (f, n) = (domain.field(), domain.n());
        if on_basis.len() != domain.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} basis values for a space of dim {}",
                on_basis.len(),
                domain.dim()
            )));
        }
        for v in std::iter::once(&at_base).chain(&on_basis) {
            check_vec(f, n, v)?;
        }
        Ok(AffineMap { domain, at_base, on_basis })
    }

    /// Map given by its values on an arbitrary description `base + span(gens)`.
    /// Values on dependent generators must be consistent.
    pub fn from_generators(base: &Matrix, base_value: &[Elem], gens: &[Matrix], gen_values: &[Vector]) -> Result<Self> {
        let f = base.field();
        let (n, p) = base.shape();
        if gens.len() != gen_values.len() {
            return Err(Error::DimensionMismatch(format!("{} generators, {} values", gens.len(), gen_values.len())));
        }
        check_vec(f, n, base_value)?;
        for v in gen_values {
            check_vec(f, n, v)?;
        }
        let domain = MatSpace::new(f, n, p, base, gens, false)?;
        let np = n * p;
        // Row i of `stack` is gens[i] vectorized followed by its value.
        let rows: Vec<Vector> =
            gens.iter().zip(gen_values).map(|(g, v)| g.data().iter().chain(v).copied().collect()).collect();
        let mut span = Echelon::new(f, np + n);
        for r in &rows {
            span.insert(r);
        }
        let mut on_basis = Vec::with_capacity(domain.dim());
        for r in span.rows() {
            if r[..np].iter().all(|&x| x == 0) {
                return Err(Error::InconsistentMap("a vanishing combination of generators has nonzero value".into()));
            }
            on_basis.push(r[np..].to_vec());
        }
        debug_assert!(span.rows().iter().zip(domain.basis()).all(|(r, b)| &r[..np] == b.data()));
        // base value moves with the reduction of the base
        let mut at_base = base_value.to_vec();
        let mut b: Vector = base.data().iter().chain(base_value).copied().collect();
        span.reduce(&mut b);
        at_base.copy_from_slice(&b[np..]);
        AffineMap::new(domain, at_base, on_basis)
    }

    /// `M ↦ M x`.
    pub fn local(domain: &MatSpace, x: &[Elem]) -> Result<Self> {
        if x.len() != domain.p() {
            return Err(Error::DimensionMismatch(format!("x of length {} for p = {}", x.len(), domain.p())));
        }
        let at_base = domain.base().mul_vec(x);
        let on_basis = domain.basis().iter().map(|b| b.mul_vec(x)).collect();
        AffineMap::new(domain.clone(), at_base, on_basis)
    }

    /// `M ↦ φ(M x) + M x'` where `φ` acts on `span(plane)` in that basis.
    pub fn plane_form(domain: &MatSpace, x: &[Elem], x_prime: &[Elem], plane: &[Vector], phi: &Matrix) -> Result<Self> {
        let f = domain.field();
        let pe = Echelon::from_vectors(f, domain.n(), plane.iter().map(|v| v.as_slice()));
        if pe.dim() != plane.len() || phi.shape() != (plane.len(), plane.len()) {
            return Err(Error::DimensionMismatch("plane basis and endomorphism disagree".into()));
        }
        let value = |m: &Matrix| -> Result<Vector> {
            let mx = m.mul_vec(x);
            let c = solve_in_basis(f, plane, &mx)
                .ok_or_else(|| Error::ParamOutOfRange("S x is not inside the plane".into()))?;
            let mut out = m.mul_vec(x_prime);
            let img = phi.mul_vec(&c);
            for (k, &ck) in img.iter().enumerate() {
                axpy(f, ck, &plane[k], &mut out);
            }
            Ok(out)
        };
        let at_base = value(domain.base())?;
        let on_basis = domain.basis().iter().map(value).collect::<Result<_>>()?;
        AffineMap::new(domain.clone(), at_base, on_basis)
    }

    pub fn domain(&self) -> &MatSpace {
        &self.domain
    }

    pub fn at_base(&self) -> &[Elem] {
        &self.at_base
    }

    pub fn on_basis(&self) -> &[Vector] {
        &self.on_basis
    }

    pub fn is_linear(&self) -> bool {
        self.domain.is_linear() && self.at_base.iter().all(|&x| x == 0)
    }

    pub fn eval_coords(&self, coeffs: &[Elem]) -> Vector {
        let f = self.domain.field();
        let mut v = self.at_base.clone();
        for (&c, b) in coeffs.iter().zip(&self.on_basis) {
            axpy(f, c, b, &mut v);
        }
        v
    }

    pub fn eval(&self, m: &Matrix) -> Result<Vector> {
        let c =
            self.domain.coordinates(m)?.ok_or_else(|| Error::ParamOutOfRange("matrix outside the domain".into()))?;
        Ok(self.eval_coords(&c))
    }

    /// Calls `visit(M, F(M))` for every element of the domain until it returns `false`.
    fn scan(&self, budget: Budget, mut visit: impl FnMut(&Matrix, &[Elem]) -> bool) -> Result<()> {
        let f = self.domain.field();
        let d = self.domain.dim();
        budget.check(self.domain.cardinality())?;
        let mut m = self.domain.base().clone();
        let mut v = self.at_base.clone();
        let mut digits = vec![0; d];
        loop {
            if !visit(&m, &v) {
                return Ok(());
            }
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(());
                }
                m = m.add(&self.domain.basis()[i]).expect("shape");
                axpy(f, 1, &self.on_basis[i], &mut v);
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

    /// Whether `F(M) ∈ im M` for every `M`.
    pub fn is_range_compatible(&self, budget: Budget) -> Result<bool> {
        let mut ok = true;
        self.scan(budget, |m, v| {
            ok = m.column_space_contains(v);
            ok
        })?;
        Ok(ok)
    }

    /// Some `x` with `F(M) = M x` on base and basis, by one linear solve.
    pub fn find_locality_witness(&self) -> Option<LocalityWitness> {
        let f = self.domain.field();
        let (n, p) = self.domain.shape();
        let mats: Vec<&Matrix> = std::iter::once(self.domain.base()).chain(self.domain.basis()).collect();
        let vals: Vec<&Vector> = std::iter::once(&self.at_base).chain(&self.on_basis).collect();
        let stacked = Matrix::from_fn(f, mats.len() * n, p, |i, j| mats[i / n].get(i % n, j));
        let rhs: Vector = vals.iter().flat_map(|v| v.iter().copied()).collect();
        let x = linalg::solve(&stacked, &rhs)?;
        debug_assert!(mats.iter().zip(&vals).all(|(m, v)| &&m.mul_vec(&x) == v));
        Some(LocalityWitness { x })
    }

    /// The canonical-least line `D` such that `F(M) ∈ im M` whenever `D ⊄ im M`.
    pub fn find_qrc_line(&self, budget: Budget) -> Result<Option<Vector>> {
        let f = self.domain.field();
        let n = self.domain.n();
        let mut common: Option<Echelon> = None;
        let mut dead = false;
        self.scan(budget, |m, v| {
            if m.column_space_contains(v) {
                return true;
            }
            let im = column_span(m);
            common = Some(match common.take() {
                None => im,
                Some(c) => intersect(&c, &im),
            });
            dead = common.as_ref().is_some_and(|c| c.dim() == 0);
            !dead
        })?;
        if dead {
            return Ok(None);
        }
        Ok(linalg::projective_points(f, n).into_iter().find(|d| common.as_ref().is_none_or(|c| c.contains(d))))
    }

    pub fn is_quasi_range_compatible(&self, budget: Budget) -> Result<bool> {
        Ok(self.find_qrc_line(budget)?.is_some())
    }

    /// Local, plane form, or neither. No element enumeration is needed.
    pub fn classify_rc_shape(&self) -> Result<RcShape> {
        if let Some(w) = self.find_locality_witness() {
            return Ok(RcShape::Local(w));
        }
        let f = self.domain.field();
        let (n, p) = self.domain.shape();
        if n < 2 {
            return Err(Error::ParamOutOfRange("plane forms need n >= 2".into()));
        }
        for x in linalg::projective_points(f, p) {
            let sx = self.domain.image_of_vector(&x);
            if sx.dim() > 2 {
                continue;
            }
            // when S x is a line, every plane through it is a candidate
            let planes: Vec<Vec<Vector>> = if sx.dim() == 2 {
                vec![sx.into_rows()]
            } else {
                linalg::projective_points(f, n)
                    .into_iter()
                    .filter(|w| !sx.contains(w))
                    .map(|w| {
                        let mut e = sx.clone();
                        e.insert(&w);
                        e.extend_to(2).into_rows()
                    })
                    .collect()
            };
            for plane in planes {
                if let Some((phi, x_prime)) = self.solve_plane(&x, &plane) {
                    let planted = AffineMap::plane_form(&self.domain, &x, &x_prime, &plane, &phi)?;
                    if planted != *self {
                        return Err(Error::Verification("plane form does not reproduce the map".into()));
                    }
                    return Ok(RcShape::PlaneForm { x, x_prime, plane, phi });
                }
            }
        }
        Ok(RcShape::Neither)
    }

    /// Unknowns: `φ` (four entries, row-major) then `x'`.
    fn solve_plane(&self, x: &[Elem], plane: &[Vector]) -> Option<(Matrix, Vector)> {
        let f = self.domain.field();
        let (n, p) = self.domain.shape();
        let mats: Vec<&Matrix> = std::iter::once(self.domain.base()).chain(self.domain.basis()).collect();
        let vals: Vec<&Vector> = std::iter::once(&self.at_base).chain(&self.on_basis).collect();
        let mut a = Matrix::zeros(f, mats.len() * n, 4 + p);
        let mut rhs = Vec::with_capacity(mats.len() * n);
        for (t, m) in mats.iter().enumerate() {
            let alpha = solve_in_basis(f, plane, &m.mul_vec(x)).expect("S x inside the plane");
            for i in 0..n {
                let row = t * n + i;
                for l in 0..2 {
                    for k in 0..2 {
                        a.set(row, l * 2 + k, f.mul(alpha[k], plane[l][i]));
                    }
                }
                for j in 0..p {
                    a.set(row, 4 + j, m.get(i, j));
                }
                rhs.push(vals[t][i]);
            }
        }
        let sol = linalg::solve(&a, &rhs)?;
        let phi = Matrix::from_vec(f, 2, 2, sol[..4].to_vec()).expect("canonical");
        Some((phi, sol[4..].to_vec()))
    }
}

/// Coordinates of `v` in the (independent) basis `basis`, if `v` is in its span.
fn solve_in_basis(f: FieldSpec, basis: &[Vector], v: &[Elem]) -> Option<Vector> {
    let m = Matrix::from_columns(f, v.len(), basis);
    linalg::solve(&m, v)
}

fn intersect(a: &Echelon, b: &Echelon) -> Echelon {
    let f = a.field();
    let w = a.width();
    // u ∈ a ∩ b iff u is killed by the annihilators of both
    let mut ann = Echelon::from_vectors(f, w, a.annihilator().iter().map(|v| v.as_slice()));
    for v in b.annihilator() {
        ann.insert(&v);
    }
    Echelon::from_vectors(f, w, ann.annihilator().iter().map(|v| v.as_slice()))
}

/// Outcome of enumerating every affine (or linear) map on a domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapCensus {
    pub maps: u64,
    pub range_compatible: u64,
    pub quasi_range_compatible: u64,
    /// Number of distinct local maps.
    pub local_maps: u64,
    /// Range-compatible maps outside the local ones.
    pub rc_not_local: u64,
    /// Quasi-range-compatible maps classified as local / plane form / neither.
    pub qrc_local: u64,
    pub qrc_plane: u64,
    pub qrc_neither: u64,
    /// First few maps that break the expectations, in enumeration order.
    pub counterexamples: Vec<AffineMap>,
}

impl MapCensus {
    fn merge(mut self, other: MapCensus) -> MapCensus {
        self.maps += other.maps;
        self.range_compatible += other.range_compatible;
        self.quasi_range_compatible += other.quasi_range_compatible;
        self.rc_not_local += other.rc_not_local;
        self.qrc_local += other.qrc_local;
        self.qrc_plane += other.qrc_plane;
        self.qrc_neither += other.qrc_neither;
        self.counterexamples.extend(other.counterexamples);
        self.counterexamples.truncate(MAX_COUNTEREXAMPLES);
        self
    }
}

const MAX_COUNTEREXAMPLES: usize = 8;

/// Per-element data for the literal map enumeration.
struct ElementTable {
    /// Coefficients of each element in the basis (base coefficient is 1).
    coeffs: Vec<Vector>,
    /// Bit `v` set iff the vector with index `v` lies in `im M`.
    image: Vec<Vec<u64>>,
    /// Bit `l` set iff line `l` lies in `im M`.
    lines: Vec<u64>,
}

fn vec_index(q: usize, v: &[Elem]) -> usize {
    v.iter().rev().fold(0, |acc, &x| acc * q + x as usize)
}

impl ElementTable {
    fn new(domain: &MatSpace) -> Result<Self> {
        let f = domain.field();
        let q = f.size();
        let n = domain.n();
        let lines = linalg::projective_points(f, n);
        if lines.len() > 64 {
            return Err(Error::ParamOutOfRange(format!("F_{q}^{n} has more than 64 lines")));
        }
        let d = domain.dim();
        let total = q.pow(n as u32);
        let words = total.div_ceil(64);
        let mut out = ElementTable { coeffs: Vec::new(), image: Vec::new(), lines: Vec::new() };
        let mut c: Vector = vec![0; d];
        loop {
            let m = domain.element(&c);
            let im = column_span(&m);
            let mut bits = vec![0u64; words];
            for v in im.elements() {
                let k = vec_index(q, &v);
                bits[k / 64] |= 1 << (k % 64);
            }
            out.image.push(bits);
            out.lines
                .push(lines.iter().enumerate().filter(|(_, l)| im.contains(l)).fold(0, |acc, (i, _)| acc | 1 << i));
            out.coeffs.push(c.clone());
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(out);
                }
                c[i] += 1;
                if c[i] == f.q() {
                    c[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// Enumerates every affine map on `domain` (or every linear map when
/// `linear_maps`, which requires a linear domain), recording
/// range-compatibility, quasi-range-compatibility and, when `classify`,
/// the shape of each quasi-range-compatible map.
///
/// Work is split on the value at the last basis matrix.
pub fn map_census(domain: &MatSpace, linear_maps: bool, classify: bool, budget: Budget) -> Result<MapCensus> {
    if linear_maps && !domain.is_linear() {
        return Err(Error::NotLinear);
    }
    let f = domain.field();
    let q = f.size();
    let n = domain.n();
    let d = domain.dim();
    // slot 0 is the base value, slot s >= 1 the value on basis s-1
    let slots: Vec<usize> = if linear_maps { (1..=d).collect() } else { (0..=d).collect() };
    let params = slots.len() * n;
    budget.check(pow_sat(q as u128, params))?;
    budget.check(domain.cardinality())?;
    let table = ElementTable::new(domain)?;
    let local = local_span(domain, &slots);
    let local_maps = pow_sat(q as u128, local.dim()) as u64;

    let Some((&top, inner)) = slots.split_last() else {
        // only the zero linear map on the zero space
        let mut c =
            MapCensus { maps: 1, range_compatible: 1, quasi_range_compatible: 1, local_maps, ..Default::default() };
        c.qrc_local = u64::from(classify);
        return Ok(c);
    };
    let tops: Vec<Vector> = all_vectors(f, n);
    let parts: Vec<MapCensus> = tops
        .par_iter()
        .map(|tv| census_part(domain, &table, &local, top, tv, inner, classify))
        .collect::<Result<_>>()?;
    let mut total = parts.into_iter().fold(MapCensus::default(), MapCensus::merge);
    total.local_maps = local_maps;
    Ok(total)
}

fn all_vectors(f: FieldSpec, n: usize) -> Vec<Vector> {
    let q = f.size();
    (0..q.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let x = (k % q) as Elem;
                    k /= q;
                    x
                })
                .collect()
        })
        .collect()
}

/// Parameter vectors (concatenated slot values) of the local maps.
fn local_span(domain: &MatSpace, slots: &[usize]) -> Echelon {
    let f = domain.field();
    let n = domain.n();
    let mats: Vec<&Matrix> = std::iter::once(domain.base()).chain(domain.basis()).collect();
    let mut e = Echelon::new(f, slots.len() * n);
    for k in 0..domain.p() {
        let mut x = vec![0; domain.p()];
        x[k] = 1;
        let v: Vector = slots.iter().flat_map(|&s| mats[s].mul_vec(&x)).collect();
        e.insert(&v);
    }
    e
}

fn census_part(
    domain: &MatSpace,
    table: &ElementTable,
    local: &Echelon,
    top: usize,
    top_value: &[Elem],
    inner: &[usize],
    classify: bool,
) -> Result<MapCensus> {
    let f = domain.field();
    let q = f.size();
    let n = domain.n();
    let elems = table.coeffs.len();
    let coeff = |e: usize, s: usize| -> Elem {
        if s == 0 {
            1
        } else {
            table.coeffs[e][s - 1]
        }
    };
    let pow: Vec<usize> = (0..n).map(|j| q.pow(j as u32)).collect();
    // values F(e) as digits and as an index
    let mut digits = vec![0 as Elem; elems * n];
    let mut index = vec![0usize; elems];
    for e in 0..elems {
        let c = coeff(e, top);
        for j in 0..n {
            let v = f.mul(c, top_value[j]);
            digits[e * n + j] = v;
            index[e] += v as usize * pow[j];
        }
    }
    let params = inner.len() * n;
    let mut pvals = vec![0 as Elem; params];
    let mut out = MapCensus::default();
    let all_lines: u64 =
        if table.lines.is_empty() { 0 } else { u64::MAX >> (64 - linalg::projective_points(f, n).len()) };
    loop {
        out.maps += 1;
        let mut rc = true;
        let mut lines = all_lines;
        for e in 0..elems {
            let k = index[e];
            if table.image[e][k / 64] >> (k % 64) & 1 == 0 {
                rc = false;
                lines &= table.lines[e];
                if lines == 0 {
                    break;
                }
            }
        }
        let qrc = rc || lines != 0;
        if rc || qrc {
            let params_vec: Vector = {
                let mut v = vec![0; (inner.len() + 1) * n];
                v[..params].copy_from_slice(&pvals);
                v[params..].copy_from_slice(top_value);
                v
            };
            let build = || build_map(domain, inner, top, &params_vec);
            if rc {
                out.range_compatible += 1;
                if !local.contains(&params_vec) {
                    out.rc_not_local += 1;
                    if out.counterexamples.len() < MAX_COUNTEREXAMPLES {
                        out.counterexamples.push(build());
                    }
                }
            }
            out.quasi_range_compatible += 1;
            if classify {
                let map = build();
                match map.classify_rc_shape()? {
                    RcShape::Local(_) => out.qrc_local += 1,
                    RcShape::PlaneForm { .. } => out.qrc_plane += 1,
                    RcShape::Neither => {
                        out.qrc_neither += 1;
                        if out.counterexamples.len() < MAX_COUNTEREXAMPLES {
                            out.counterexamples.push(map);
                        }
                    }
                }
            }
        }
        // odometer over the inner parameters; every change is +1 on one digit
        let mut t = 0;
        loop {
            if t == params {
                return Ok(out);
            }
            let (s, j) = (inner[t / n], t % n);
            pvals[t] = if pvals[t] + 1 == f.q() { 0 } else { pvals[t] + 1 };
            for e in 0..elems {
                let c = coeff(e, s);
                if c != 0 {
                    let old = digits[e * n + j];
                    let new = f.add(old, c);
                    digits[e * n + j] = new;
                    index[e] = index[e] + new as usize * pow[j] - old as usize * pow[j];
                }
            }
            if pvals[t] == 0 {
                t += 1;
            } else {
                break;
            }
        }
    }
}

fn build_map(domain: &MatSpace, inner: &[usize], top: usize, params: &[Elem]) -> AffineMap {
    let n = domain.n();
    let mut at_base = vec![0; n];
    let mut on_basis = vec![vec![0; n]; domain.dim()];
    for (k, &s) in inner.iter().chain(std::iter::once(&top)).enumerate() {
        let v = params[k * n..(k + 1) * n].to_vec();
        if s == 0 {
            at_base = v;
        } else {
            on_basis[s - 1] = v;
        }
    }
    AffineMap::new(domain.clone(), at_base, on_basis).expect("valid parameters")
}

/// Quasi-range-compatible linear maps on a linear domain, found without
/// enumerating all maps: for a fixed line `D` they form a linear space of
/// parameters, cut out by `F(M) ∈ im M` for each `M` with `D ⊄ im M`.
/// Every map of the union over `D` is classified.
pub fn qrc_linear_census(domain: &MatSpace, budget: Budget) -> Result<MapCensus> {
    if !domain.is_linear() {
        return Err(Error::NotLinear);
    }
    let f = domain.field();
    let n = domain.n();
    let d = domain.dim();
    let width = n * d;
    let table = ElementTable::new(domain)?;
    let lines = linalg::projective_points(f, n);
    let mats: Vec<Matrix> = table.coeffs.iter().map(|c| domain.element(c)).collect();
    let anns: Vec<Vec<Vector>> = mats.iter().map(|m| column_span(m).annihilator()).collect();
    let coeffs = &table.coeffs;
    let row_for = |e: usize, u: &[Elem]| -> Vector {
        let c = &coeffs[e];
        (0..d).flat_map(|i| u.iter().map(move |&uj| f.mul(c[i], uj))).collect()
    };
    let mut all = Echelon::new(f, width);
    for (e, ann) in anns.iter().enumerate() {
        for u in ann {
            all.insert(&row_for(e, u));
        }
    }
    let mut spaces: Vec<Echelon> = Vec::new();
    for l in 0..lines.len() {
        let mut cons = Echelon::new(f, width);
        for (e, ann) in anns.iter().enumerate() {
            if table.lines[e] >> l & 1 == 1 {
                continue;
            }
            for u in ann {
                // u . F(M) = Σ_i c_i Σ_j u_j v_ij
                cons.insert(&row_for(e, u));
            }
            if cons.dim() == width {
                break;
            }
        }
        let sol = Echelon::from_vectors(f, width, cons.annihilator().iter().map(|v| v.as_slice()));
        if !spaces.contains(&sol) {
            spaces.push(sol);
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = MapCensus::default();
    let local = local_span(domain, &(1..=d).collect::<Vec<_>>());
    out.local_maps = pow_sat(f.size() as u128, local.dim()) as u64;
    for s in &spaces {
        budget.check(pow_sat(f.size() as u128, s.dim()))?;
        for v in s.elements() {
            if !seen.insert(v.clone()) {
                continue;
            }
            let map =
                AffineMap::new(domain.clone(), vec![0; n], (0..d).map(|i| v[i * n..(i + 1) * n].to_vec()).collect())?;
            out.quasi_range_compatible += 1;
            match map.classify_rc_shape()? {
                RcShape::Local(_) => out.qrc_local += 1,
                RcShape::PlaneForm { .. } => out.qrc_plane += 1,
                RcShape::Neither => {
                    out.qrc_neither += 1;
                    if out.counterexamples.len() < MAX_COUNTEREXAMPLES {
                        out.counterexamples.push(map);
                    }
                }
            }
        }
    }
    out.maps = pow_sat(f.size() as u128, width) as u64;
    out.range_compatible = pow_sat(f.size() as u128, width - all.dim()) as u64;
    out.rc_not_local = out.range_compatible - out.local_maps.min(out.range_compatible);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::compression_space;

    const UNL: Budget = Budget::UNLIMITED;

    fn full(q: u32, n: usize, p: usize) -> MatSpace {
        MatSpace::full(FieldSpec::new(q).unwrap(), n, p)
    }

    #[test]
    fn zero_and_local_maps() {
        let s = full(2, 3, 2);
        let zero = AffineMap::new(s.clone(), vec![0; 3], vec![vec![0; 3]; 6]).unwrap();
        assert!(zero.is_range_compatible(UNL).unwrap());
        assert_eq!(zero.find_locality_witness().unwrap().x, vec![0, 0]);
        let loc = AffineMap::local(&s, &[1, 0]).unwrap();
        assert!(loc.is_range_compatible(UNL).unwrap());
        assert_eq!(loc.find_locality_witness().unwrap().x, vec![1, 0]);
        let m = Matrix::from_ints(FieldSpec::f2(), &[&[1, 1], &[0, 1], &[1, 0]]);
        assert_eq!(loc.eval(&m).unwrap(), vec![1, 0, 1]);
        assert!(matches!(loc.classify_rc_shape().unwrap(), RcShape::Local(_)));
    }

    #[test]
    fn constant_map_fails() {
        let s = full(3, 2, 2);
        let c = AffineMap::new(s.clone(), vec![1, 0], vec![vec![0, 0]; 4]).unwrap();
        assert!(!c.is_range_compatible(UNL).unwrap());
        // the zero matrix violates, and its image contains no line
        assert_eq!(c.find_qrc_line(UNL).unwrap(), None);
        assert!(c.find_locality_witness().is_none());
    }

    #[test]
    fn qrc_line_found() {
        // on span(E11, E21, E22) \ ... use an affine domain avoiding 0:
        // S = E11 + span(E12, E22); F constant e1. Violations need e1 ∉ im M.
        let f3 = FieldSpec::f3();
        let base = Matrix::unit(f3, 2, 2, 0, 0);
        let s = MatSpace::affine(&base, &[Matrix::unit(f3, 2, 2, 0, 1), Matrix::unit(f3, 2, 2, 1, 1)]).unwrap();
        let c = AffineMap::new(s.clone(), vec![0, 1], vec![vec![0, 0]; 2]).unwrap();
        // every element has e1 in its image; e2 ∈ im M iff M invertible
        let d = c.find_qrc_line(UNL).unwrap();
        assert!(d.is_some());
        assert!(!c.is_range_compatible(UNL).unwrap());
        // the violators are the singular elements, whose image is span(e1)
        assert_eq!(d, Some(vec![1, 0]));
    }

    #[test]
    fn rc_implies_qrc() {
        let f3 = FieldSpec::f3();
        let s = compression_space(f3, 3, 3, 1, 1).unwrap();
        let loc = AffineMap::local(&s, &[1, 2, 0]).unwrap();
        assert!(loc.is_range_compatible(UNL).unwrap());
        assert_eq!(loc.find_qrc_line(UNL).unwrap(), Some(linalg::projective_points(f3, 3)[0].clone()));
    }

    #[test]
    fn plane_form_recovered() {
        let f3 = FieldSpec::f3();
        let s = full(3, 2, 2);
        let x = vec![1, 0];
        let plane = vec![vec![1, 0], vec![0, 1]];
        let phi = Matrix::from_ints(f3, &[&[0, 1], &[2, 1]]);
        let planted = AffineMap::plane_form(&s, &x, &[0, 1], &plane, &phi).unwrap();
        match planted.classify_rc_shape().unwrap() {
            RcShape::PlaneForm { x, x_prime, plane, phi } => {
                let again = AffineMap::plane_form(&s, &x, &x_prime, &plane, &phi).unwrap();
                assert_eq!(again, planted);
                for m in s.elements(UNL).unwrap() {
                    assert_eq!(again.eval(&m).unwrap(), planted.eval(&m).unwrap());
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn from_generators_canonicalizes() {
        let f2 = FieldSpec::f2();
        let e = |i, j| Matrix::unit(f2, 2, 2, i, j);
        let g = [e(0, 0).add(&e(1, 1)).unwrap(), e(1, 1), e(0, 0)];
        let x = [1u8, 1];
        let vals: Vec<Vector> = g.iter().map(|m| m.mul_vec(&x)).collect();
        let base = e(0, 1);
        let f = AffineMap::from_generators(&base, &base.mul_vec(&x), &g, &vals).unwrap();
        assert_eq!(f, AffineMap::local(f.domain(), &x).unwrap());
        let mut bad = vals.clone();
        bad[0] = vec![0, 0];
        assert!(matches!(
            AffineMap::from_generators(&base, &base.mul_vec(&x), &g, &bad),
            Err(Error::InconsistentMap(_))
        ));
    }

    #[test]
    fn small_map_census_matches_direct_checks() {
        for (q, n, p) in [(2, 2, 1), (2, 2, 2), (3, 2, 1)] {
            let f = FieldSpec::new(q).unwrap();
            let s = MatSpace::full(f, n, p);
            let census = map_census(&s, false, false, UNL).unwrap();
            let d = s.dim();
            let mut rc = 0;
            let mut qrc = 0;
            let total = (q as u64).pow((n * (d + 1)) as u32);
            assert_eq!(census.maps, total);
            for code in 0..total {
                let mut k = code;
                let mut digit = || {
                    let v = (k % q as u64) as Elem;
                    k /= q as u64;
                    v
                };
                let at_base: Vector = (0..n).map(|_| digit()).collect();
                let on_basis: Vec<Vector> = (0..d).map(|_| (0..n).map(|_| digit()).collect()).collect();
                let map = AffineMap::new(s.clone(), at_base, on_basis).unwrap();
                rc += u64::from(map.is_range_compatible(UNL).unwrap());
                qrc += u64::from(map.is_quasi_range_compatible(UNL).unwrap());
            }
            assert_eq!(census.range_compatible, rc);
            assert_eq!(census.quasi_range_compatible, qrc);
        }
    }

    #[test]
    fn full_3x2_over_f2_rc_maps_are_local() {
        let s = full(2, 3, 2);
        let c = map_census(&s, false, false, UNL).unwrap();
        assert_eq!(c.maps, 1 << 21);
        assert_eq!(c.range_compatible, 4);
        assert_eq!(c.local_maps, 4);
        assert_eq!(c.rc_not_local, 0);
    }

    #[test]
    fn qrc_full_2x2_f3() {
        let s = full(3, 2, 2);
        let c = map_census(&s, false, true, UNL).unwrap();
        assert_eq!(c.qrc_neither, 0);
        assert_eq!(c.qrc_local + c.qrc_plane, c.quasi_range_compatible);
        let lin = qrc_linear_census(&s, UNL).unwrap();
        let lit = map_census(&s, true, true, UNL).unwrap();
        assert_eq!(lin.quasi_range_compatible, lit.quasi_range_compatible);
        assert_eq!(lin.qrc_plane, lit.qrc_plane);
        assert_eq!(lin.qrc_local, lit.qrc_local);
        assert_eq!(lin.range_compatible, lit.range_compatible);
    }
}
