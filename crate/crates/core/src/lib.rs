//! Exact linear algebra over small prime fields for spaces of bounded-rank
//! matrices: construction, upper-rank, decomposability, equivalence,
//! range-compatible maps and exhaustive classification censuses.

pub mod budget;
pub mod catalog;
pub mod decomp;
pub mod equiv;
pub mod error;
pub mod field;
pub mod gf2;
pub mod grassmann;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod rangecompat;
pub mod space;
pub mod verify;

pub use budget::Budget;
pub use catalog::{compression_space, dim_compression, named_space, vee_construct, CatalogEntry, CatalogName};
pub use decomp::{equiv_sub_compression, is_primitive, is_r_decomposable, primitive_reduction, DecompositionWitness};
pub use equiv::{are_equivalent, EquivTarget, Equivalence, EquivalenceWitness};
pub use error::{Error, Result};
pub use field::{Elem, FieldSpec};
pub use linalg::Echelon;
pub use matrix::{Matrix, Vector};
pub use rangecompat::{AffineMap, RcShape};
pub use space::{Covector, MatSpace};
