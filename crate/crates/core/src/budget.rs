//! Enumeration budgets.
//!
//! Every exhaustive scan states how many items it needs up front and fails
//! with [`Error::BudgetExceeded`] rather than sampling.

use crate::error::{Error, Result};
use crate::field::FieldSpec;

/// Environment variable overriding the default element budget.
pub const BUDGET_ENV: &str = "FLANDERS_BUDGET";

pub const DEFAULT_BINARY: u128 = 100_000_000;
pub const DEFAULT_OTHER: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub limit: u128,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget { limit: u128::MAX };

    pub fn new(limit: u128) -> Self {
        Budget { limit }
    }

    /// Default for `field`, unless `FLANDERS_BUDGET` is set to an integer.
    pub fn for_field(field: FieldSpec) -> Self {
        if let Some(limit) = env_override() {
            return Budget { limit };
        }
        Budget { limit: if field.is_binary() { DEFAULT_BINARY } else { DEFAULT_OTHER } }
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.limit {
            Err(Error::BudgetExceeded { required, budget: self.limit })
        } else {
            Ok(())
        }
    }
}

pub fn env_override() -> Option<u128> {
    std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().replace('_', "").parse().ok())
}

/// `q^k`, saturating.
pub fn pow_sat(q: u128, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.saturating_mul(q);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks() {
        let b = Budget::new(10);
        assert!(b.check(10).is_ok());
        assert_eq!(b.check(11), Err(Error::BudgetExceeded { required: 11, budget: 10 }));
        assert_eq!(pow_sat(3, 4), 81);
        assert_eq!(pow_sat(7, 1000), u128::MAX);
    }
}
