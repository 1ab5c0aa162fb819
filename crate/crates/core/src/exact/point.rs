use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExactScalar;

/// A point of ℝⁿ with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<ExactScalar>,
}

impl Point {
    pub fn new(coords: Vec<ExactScalar>) -> Self {
        Point { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point::new(coords.iter().map(|&c| ExactScalar::from_int(c)).collect())
    }

    /// Builds a point from `(num, den)` pairs.
    pub fn from_ratios(coords: &[(i64, i64)]) -> Self {
        Point::new(coords.iter().map(|&(n, d)| ExactScalar::ratio(n, d)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[ExactScalar] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<ExactScalar> {
        self.coords
    }

    pub fn coord(&self, i: usize) -> &ExactScalar {
        &self.coords[i]
    }

    pub fn sub(&self, other: &Point) -> Vec<ExactScalar> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }

    /// `self + s * v`
    pub fn offset(&self, s: &ExactScalar, v: &[ExactScalar]) -> Point {
        Point::new(
            self.coords
                .iter()
                .zip(v)
                .map(|(a, b)| a + &(s * b))
                .collect(),
        )
    }

    pub fn squared_distance(&self, other: &Point) -> ExactScalar {
        self.sub(other).iter().map(|d| d * d).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(ExactScalar::to_f64).collect()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c:?}")?;
        }
        f.write_str(")")
    }
}
