//! Exact local computations around Kudla-Rapoport cycles for unitary groups
//! of signature (1,1): Hermitian representation densities at inert primes,
//! intersection numbers of local divisors on the Bruhat-Tits tree, and the
//! global bookkeeping (Hilbert symbols, `Diff(T)`, class numbers, lattice
//! representation counts) that surrounds them.

pub mod btree;
pub mod checks;
pub mod error;
pub mod exact;
pub mod global;
pub mod hironaka;
pub mod localfield;
pub mod oracle;

pub use error::{Error, Result};
pub use exact::{Polynomial, Rational};
pub use global::{FieldElem, GlobalHermitianMatrix, LevelStructure, QuadField};
pub use hironaka::{DensityTarget, Partition};
pub use localfield::{InertLocalRing, LocalHermitianSpec, ResidueRingElem};
