//! Exact computational toolkit for incidence bounds between homogeneous
//! point sets and families of pseudoflats.

pub mod algebra;
pub mod exact;
pub mod flats;
pub mod incidence;
pub mod pointgen;
pub mod prooflab;
pub mod selftest;
pub mod xplab;

pub use exact::{Cube, Cutting, ExactScalar, Point};
pub use flats::{Flat, FlatFamily};
