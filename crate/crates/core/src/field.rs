//! Prime fields `F_q` for `q` in {2, 3, 5, 7}.
//!
//! Elements are canonical residues stored as `u8`. Arithmetic is plain
//! modular arithmetic; inverses come from a table filled at construction.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

pub type Elem = u8;

pub const SUPPORTED_FIELDS: [u8; 4] = [2, 3, 5, 7];

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FieldSpec {
    q: u8,
    inv: [u8; 8],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Neg,
}

impl FieldSpec {
    pub fn new(q: u32) -> Result<Self> {
        if !SUPPORTED_FIELDS.iter().any(|&s| s as u32 == q) {
            return Err(Error::UnsupportedField(q));
        }
        let q = q as u8;
        let mut inv = [0u8; 8];
        for a in 1..q {
            // brute force: q is tiny
            inv[a as usize] = (1..q).find(|&b| (a as u16 * b as u16) % q as u16 == 1).unwrap();
        }
        Ok(FieldSpec { q, inv })
    }

    pub fn f2() -> Self {
        Self::new(2).unwrap()
    }

    pub fn f3() -> Self {
        Self::new(3).unwrap()
    }

    #[inline]
    pub fn q(&self) -> u8 {
        self.q
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.q as usize
    }

    #[inline]
    pub fn is_binary(&self) -> bool {
        self.q == 2
    }

    /// Validates a raw integer as an element of the field.
    pub fn elem(&self, value: u32) -> Result<Elem> {
        if value < self.q as u32 {
            Ok(value as Elem)
        } else {
            Err(Error::NonCanonicalEntry { value, q: self.q })
        }
    }

    /// Reduces an arbitrary integer (possibly negative) to its canonical residue.
    #[inline]
    pub fn reduce(&self, value: i64) -> Elem {
        value.rem_euclid(self.q as i64) as Elem
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        ((a as u16 * b as u16) % self.q as u16) as Elem
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// Inverse of a known nonzero element.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Elem) -> Elem {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// `a * x + b` shorthand used in elimination loops.
    #[inline]
    pub fn mul_add(&self, a: Elem, x: Elem, b: Elem) -> Elem {
        ((a as u16 * x as u16 + b as u16) % self.q as u16) as Elem
    }

    /// `neg` ignores `b`.
    pub fn arith(&self, op: ArithOp, a: Elem, b: Elem) -> Elem {
        match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Neg => self.neg(a),
        }
    }

    /// The correction term used by the second classification bound:
    /// 2 over `F_2`, 0 for every larger field.
    pub fn epsilon(&self) -> usize {
        if self.q == 2 {
            2
        } else {
            0
        }
    }

    /// A generator of the multiplicative group.
    pub fn primitive_root(&self) -> Elem {
        (1..self.q)
            .find(|&g| {
                let mut x = 1u8;
                let mut order = 0;
                loop {
                    x = self.mul(x, g);
                    order += 1;
                    if x == 1 {
                        break;
                    }
                }
                order == self.q - 1
            })
            .unwrap()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }
}

impl TryFrom<u8> for FieldSpec {
    type Error = Error;
    fn try_from(q: u8) -> Result<Self> {
        FieldSpec::new(q as u32)
    }
}

impl From<FieldSpec> for u8 {
    fn from(f: FieldSpec) -> u8 {
        f.q
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.q)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}
