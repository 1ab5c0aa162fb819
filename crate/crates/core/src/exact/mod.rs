//! Exact scalars, points, enclosing cubes and grid cuttings.

mod cutting;
mod point;
mod scalar;

pub use cutting::{
    dyadic_cutting, dyadic_depth, make_cutting, parent_cell, CellIndex, Cube, Cutting,
    CuttingError, CuttingKind,
};
pub use point::Point;
pub use scalar::{cross3, dot, primitive_direction, ExactScalar, ParseScalarError};
