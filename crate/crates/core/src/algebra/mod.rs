//! Polynomial arithmetic over ℚ used by the flat predicates.

mod linear;
mod multivariate;
mod univariate;

pub use linear::{solve_affine, AffineSolution};
pub use multivariate::{resultant_in_y, AffineForm, Interval, Monomial, Poly};
pub use univariate::UPoly;
