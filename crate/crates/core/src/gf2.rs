//! Bit-packed kernels for `F_2`.
//!
//! A matrix row of width `<= 64` is a single `u64`; wider rows use a slice of
//! words. Elimination is XOR-based. Small whole matrices (`n * p <= 64`) are
//! packed into one `u64` with entry `(i, j)` at bit `i * p + j`.

/// Rank of a set of single-word rows. Destroys the input.
#[inline]
pub fn rank_rows(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for i in 0..rows.len() {
        let pivot_row = rows[i];
        if pivot_row == 0 {
            continue;
        }
        rank += 1;
        let low = pivot_row & pivot_row.wrapping_neg();
        for r in rows[i + 1..].iter_mut() {
            if *r & low != 0 {
                *r ^= pivot_row;
            }
        }
    }
    rank
}

/// Rank of rows made of `words` 64-bit words each, stored contiguously.
pub fn rank_wide(data: &mut [u64], words: usize) -> usize {
    if words == 0 {
        return 0;
    }
    let n = data.len() / words;
    let mut rank = 0;
    for i in 0..n {
        let (head, tail) = data.split_at_mut((i + 1) * words);
        let row = &head[i * words..];
        let Some((w, bit)) = row.iter().enumerate().find(|(_, &x)| x != 0).map(|(w, &x)| (w, x & x.wrapping_neg()))
        else {
            continue;
        };
        rank += 1;
        for other in tail.chunks_mut(words) {
            if other[w] & bit != 0 {
                for (o, r) in other.iter_mut().zip(row) {
                    *o ^= r;
                }
            }
        }
    }
    rank
}

/// Packs an `n x p` matrix stored as one bitmask into row words.
#[inline]
pub fn unpack_rows(mask: u64, n: usize, p: usize, out: &mut [u64]) {
    let row_mask = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    for (i, slot) in out.iter_mut().enumerate().take(n) {
        *slot = (mask >> (i * p)) & row_mask;
    }
}

/// Rank of a packed `n x p` matrix with `n * p <= 64` and `n <= 64`.
#[inline]
pub fn rank_packed(mask: u64, n: usize, p: usize) -> usize {
    let mut rows = [0u64; 64];
    unpack_rows(mask, n, p, &mut rows);
    rank_rows(&mut rows[..n])
}

/// Rank lookup for every packed `n x p` matrix, for `n * p <= 20`.
pub struct RankTable {
    n: usize,
    p: usize,
    table: Vec<u8>,
}

impl RankTable {
    pub const MAX_BITS: usize = 20;

    pub fn new(n: usize, p: usize) -> Option<Self> {
        let bits = n * p;
        if bits > Self::MAX_BITS {
            return None;
        }
        let table = (0..1u64 << bits).map(|m| rank_packed(m, n, p) as u8).collect();
        Some(RankTable { n, p, table })
    }

    #[inline]
    pub fn rank(&self, mask: u64) -> usize {
        self.table[mask as usize] as usize
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }
}

/// Rank oracle over packed `F_2` matrices: table when small, elimination otherwise.
pub enum PackedRank {
    Table(RankTable),
    Eliminate { n: usize, p: usize },
}

impl PackedRank {
    pub fn new(n: usize, p: usize) -> Self {
        match RankTable::new(n, p) {
            Some(t) => PackedRank::Table(t),
            None => PackedRank::Eliminate { n, p },
        }
    }

    #[inline]
    pub fn rank(&self, mask: u64) -> usize {
        match self {
            PackedRank::Table(t) => t.rank(mask),
            PackedRank::Eliminate { n, p } => rank_packed(mask, *n, *p),
        }
    }
}

/// Bit flipped at step `k >= 1` of the reflected binary Gray code.
#[inline]
pub fn gray_flip(k: u64) -> usize {
    k.trailing_zeros() as usize
}
