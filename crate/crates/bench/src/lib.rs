//! Fixtures shared by the benchmarks.

use flanders::{named_space, CatalogName, FieldSpec, MatSpace, Matrix};

pub fn f2() -> FieldSpec {
    FieldSpec::f2()
}

pub fn f3() -> FieldSpec {
    FieldSpec::new(3).expect("prime")
}

pub fn catalog(name: CatalogName) -> MatSpace {
    let q = name.defining_field().unwrap_or(2);
    named_space(name, FieldSpec::new(u32::from(q)).expect("prime"), None).expect("fixed size").space
}

/// Deterministic pseudo-random matrices (xorshift), so runs compare like with like.
pub fn matrices(f: FieldSpec, n: usize, p: usize, count: usize) -> Vec<Matrix> {
    let mut x: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..count)
        .map(|_| {
            Matrix::from_fn(f, n, p, |_, _| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                (x % u64::from(f.q())) as u8
            })
        })
        .collect()
}

/// Packed `F_2` masks of `n x p` matrices.
pub fn masks(n: usize, p: usize, count: usize) -> Vec<u64> {
    let mut x: u64 = 0x2545_F491_4F6C_DD1D;
    let keep = if n * p == 64 { u64::MAX } else { (1u64 << (n * p)) - 1 };
    (0..count)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x & keep
        })
        .collect()
}
