use flanders::decomp::{gaussian_binomial, subspaces};
use flanders::io::{format_space, parse_space, space_to_json};
use flanders::{
    are_equivalent, compression_space, dim_compression, equiv_sub_compression, is_r_decomposable, AffineMap, Budget,
    Equivalence, FieldSpec, MatSpace, Matrix, RcShape,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, f: FieldSpec, n: usize, p: usize) -> Matrix {
    Matrix::from_fn(f, n, p, |_, _| rng.random_range(0..f.q()))
}

fn random_invertible(rng: &mut ChaCha8Rng, f: FieldSpec, n: usize) -> Matrix {
    loop {
        let m = random_matrix(rng, f, n, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// A small space together with a random pair `(P, Q)` acting on it.
#[derive(Debug, Clone)]
struct Case {
    space: MatSpace,
    pmat: Matrix,
    qmat: Matrix,
    gens: Vec<Matrix>,
}

fn case() -> impl Strategy<Value = Case> {
    (prop::sample::select(vec![2u32, 3]), 1usize..=3, 1usize..=3, 0usize..=4, any::<bool>(), any::<u64>()).prop_map(
        |(q, n, p, k, linear, seed)| {
            let f = FieldSpec::new(q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gens: Vec<Matrix> = (0..k).map(|_| random_matrix(&mut rng, f, n, p)).collect();
            let base = if linear { Matrix::zeros(f, n, p) } else { random_matrix(&mut rng, f, n, p) };
            let space = MatSpace::new(f, n, p, &base, &gens, linear).unwrap();
            let pmat = random_invertible(&mut rng, f, n);
            let qmat = random_invertible(&mut rng, f, p);
            Case { space, pmat, qmat, gens }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rank_profile_is_an_equivalence_invariant(c in case()) {
        let moved = c.space.apply_equivalence(&c.pmat, &c.qmat).unwrap();
        prop_assert_eq!(moved.dim(), c.space.dim());
        prop_assert_eq!(moved.is_linear(), c.space.is_linear());
        prop_assert_eq!(moved.rank_counts(Budget::UNLIMITED).unwrap(), c.space.rank_counts(Budget::UNLIMITED).unwrap());
        prop_assert_eq!(moved.upper_rank(Budget::UNLIMITED).unwrap(), c.space.upper_rank(Budget::UNLIMITED).unwrap());
    }

    #[test]
    fn decomposability_is_an_equivalence_invariant(c in case()) {
        let moved = c.space.apply_equivalence(&c.pmat, &c.qmat).unwrap();
        let m = c.space.n().min(c.space.p());
        for s in 0..=m {
            for t in 0..=m - s {
                let a = equiv_sub_compression(&c.space, s, t).unwrap();
                let b = equiv_sub_compression(&moved, s, t).unwrap();
                prop_assert_eq!(a.is_some(), b.is_some(), "split ({}, {})", s, t);
                if let Some(w) = a {
                    prop_assert!(w.verify(&c.space));
                }
                if let Some(w) = b {
                    prop_assert!(w.verify(&moved));
                }
            }
        }
    }

    #[test]
    fn upper_rank_bounds_decomposability(c in case()) {
        let r = c.space.upper_rank(Budget::UNLIMITED).unwrap();
        // a space inside some R(s,t) with s+t = r' has upper-rank <= r'
        for rr in 0..r {
            prop_assert!(is_r_decomposable(&c.space, rr).unwrap().is_none());
        }
        let m = c.space.n().min(c.space.p());
        prop_assert!(is_r_decomposable(&c.space, m).unwrap().is_some());
    }

    #[test]
    fn search_recovers_random_equivalences(c in case()) {
        let moved = c.space.apply_equivalence(&c.pmat, &c.qmat).unwrap();
        match are_equivalent(&c.space, &moved, flanders::equiv::DEFAULT_SEARCH_BUDGET).unwrap() {
            Equivalence::Yes(w) => prop_assert!(w.verify(&c.space, &moved)),
            other => prop_assert!(false, "expected Yes, got {:?}", other),
        }
    }

    #[test]
    fn canonical_form_ignores_generator_order(c in case(), rot in 0usize..4) {
        let mut gens = c.gens.clone();
        if !gens.is_empty() {
            let k = rot % gens.len();
            gens.rotate_left(k);
        }
        // adding a translation vector to the base leaves the space unchanged
        let mut base = c.space.base().clone();
        if let (Some(g), false) = (gens.first(), c.space.is_linear()) {
            base = base.add(g).unwrap();
        }
        let again = MatSpace::new(c.space.field(), c.space.n(), c.space.p(), &base, &gens, c.space.is_linear()).unwrap();
        prop_assert_eq!(&again, &c.space);
    }

    #[test]
    fn file_formats_round_trip(c in case()) {
        prop_assert_eq!(parse_space(&format_space(&c.space)).unwrap(), c.space.clone());
        prop_assert_eq!(parse_space(&space_to_json(&c.space)).unwrap(), c.space.clone());
    }

    #[test]
    fn transpose_is_an_involution_preserving_rank(c in case()) {
        let t = c.space.transpose();
        prop_assert_eq!(t.transpose(), c.space.clone());
        prop_assert_eq!(t.rank_counts(Budget::UNLIMITED).unwrap(), c.space.rank_counts(Budget::UNLIMITED).unwrap());
    }

    #[test]
    fn matrix_rank_laws(q in prop::sample::select(vec![2u32, 3, 5, 7]), n in 1usize..5, k in 1usize..5, p in 1usize..5, seed in any::<u64>()) {
        let f = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, f, n, k);
        let b = random_matrix(&mut rng, f, k, p);
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(a.rank(), a.transpose().rank());
        prop_assert!(ab.rank() <= a.rank().min(b.rank()));
        prop_assert_eq!(a.rank() + a.kernel_basis().len(), k);
        let pm = random_invertible(&mut rng, f, n);
        prop_assert_eq!(pm.mul(&a).unwrap().rank(), a.rank());
    }

    #[test]
    fn compression_spaces_have_the_stated_dimension(q in prop::sample::select(vec![2u32, 3]), n in 1usize..=4, p in 1usize..=4, s in 0usize..=4, t in 0usize..=4) {
        prop_assume!(s <= n && t <= p && s + t <= n.min(p));
        let f = FieldSpec::new(q).unwrap();
        let c = compression_space(f, n, p, s, t).unwrap();
        prop_assert_eq!(c.dim(), dim_compression(n, p, s, t));
        if n * p <= 9 {
            prop_assert_eq!(c.upper_rank(Budget::UNLIMITED).unwrap(), s + t);
        }
        prop_assert!(equiv_sub_compression(&c, s, t).unwrap().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_maps_are_range_compatible(c in case(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = c.space.field();
        let x: Vec<u8> = (0..c.space.p()).map(|_| rng.random_range(0..f.q())).collect();
        let map = AffineMap::local(&c.space, &x).unwrap();
        prop_assert!(map.is_range_compatible(Budget::UNLIMITED).unwrap());
        prop_assert!(map.is_quasi_range_compatible(Budget::UNLIMITED).unwrap());
        prop_assert!(map.find_locality_witness().is_some());
    }

    #[test]
    fn plane_forms_classify_as_local_or_plane(c in case(), seed in any::<u64>()) {
        let (n, p) = (c.space.n(), c.space.p());
        prop_assume!(n >= 2);
        let f = c.space.field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<u8> = loop {
            let v: Vec<u8> = (0..p).map(|_| rng.random_range(0..f.q())).collect();
            if v.iter().any(|&e| e != 0) {
                break v;
            }
        };
        // the plane must contain S x
        let mut sx = flanders::Echelon::new(f, n);
        for m in std::iter::once(c.space.base()).chain(c.space.basis()) {
            sx.insert(&m.mul_vec(&x));
        }
        prop_assume!(sx.dim() <= 2);
        let mut plane = sx.clone();
        while plane.dim() < 2 {
            let v: Vec<u8> = (0..n).map(|_| rng.random_range(0..f.q())).collect();
            plane.insert(&v);
        }
        let plane = plane.into_rows();
        let x_prime: Vec<u8> = (0..p).map(|_| rng.random_range(0..f.q())).collect();
        let phi = random_matrix(&mut rng, f, 2, 2);
        let map = AffineMap::plane_form(&c.space, &x, &x_prime, &plane, &phi).unwrap();
        let shape = map.classify_rc_shape().unwrap();
        prop_assert!(!matches!(shape, RcShape::Neither), "{:?}", map);
    }
}

#[test]
fn subspace_counts_match_gaussian_binomials() {
    for q in [2u32, 3] {
        let f = FieldSpec::new(q).unwrap();
        for m in 0..=4 {
            for k in 0..=m {
                let n = subspaces(f, m, k).unwrap().count() as u128;
                assert_eq!(n, gaussian_binomial(m, k, q as u64), "[{m},{k}]_{q}");
            }
        }
    }
}
