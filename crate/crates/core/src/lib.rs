//! Finite-scale analysis of subdegree-finite permutation groups.
//!
//! The crate builds finite permutation groups, both wreath-product actions,
//! truncations of box products on biregular trees, and the orbital graphs that
//! witness their structure. Everything is deterministic: all set-valued outputs
//! are sorted and all randomness is seeded.

pub mod blocks;
pub mod catalog;
pub mod decompose;
pub mod error;
pub mod graph;
pub mod group;
pub mod iso;
pub mod par;
pub mod perm;
pub mod products;
mod schreier;
pub mod treebox;

pub use blocks::{higman_primitivity, is_primitive, primitivity, BlockSystem};
pub use error::{Error, Result};
pub use group::{PermGroup, Regularity, Suborbit, SuborbitReport};
pub use iso::{permutation_isomorphism, PermIsomorphism};
pub use perm::Permutation;
