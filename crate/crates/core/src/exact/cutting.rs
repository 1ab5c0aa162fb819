//! Grid cuttings of the enclosing cube `[0,a]^n` into `t^n` open cells.

use serde::{Deserialize, Serialize};

use super::{ExactScalar, Point};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CuttingError {
    #[error("cutting resolution must be at least 1")]
    ZeroResolution,
    #[error("cube side must be at least 1 and dimension at least 1")]
    DegenerateCube,
    #[error("point has dimension {found}, cutting has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {axis} of point lies outside the open cube (0, {side})")]
    OutOfCube { axis: usize, side: u64 },
    #[error("coordinate {axis} of point lies on a cell boundary of the t={t} cutting")]
    OnBoundary { axis: usize, t: u64 },
    #[error("level-0 cell has no parent")]
    NoParent,
    #[error("cell is not part of a dyadic cutting")]
    NotDyadic,
    #[error("dyadic level {0} is too deep")]
    LevelTooDeep(u32),
}

/// The enclosing cube `[0, side]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    side: u64,
    dim: usize,
}

impl Cube {
    pub fn new(side: u64, dim: usize) -> Result<Self, CuttingError> {
        if side == 0 || dim == 0 {
            return Err(CuttingError::DegenerateCube);
        }
        Ok(Cube { side, dim })
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether `p` lies in the open cube.
    pub fn contains_open(&self, p: &Point) -> bool {
        let a = ExactScalar::from(self.side);
        p.dim() == self.dim && p.coords().iter().all(|c| c.is_positive() && *c < a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CuttingKind {
    Uniform,
    /// Level `i` of the dyadic hierarchy, `t = 2^i`.
    Dyadic { level: u32 },
}

/// Subdivision of a cube into `t^n` congruent open cells
/// `{ (j_i - 1) a/t < x_i < j_i a/t }`, `j ∈ {1..t}^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cutting {
    cube: Cube,
    t: u64,
    kind: CuttingKind,
}

/// Index of a cell; components are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub t: u64,
    pub level: Option<u32>,
    pub index: Vec<u64>,
}

pub fn make_cutting(cube: Cube, t: u64) -> Result<Cutting, CuttingError> {
    if t == 0 {
        return Err(CuttingError::ZeroResolution);
    }
    Ok(Cutting {
        cube,
        t,
        kind: CuttingKind::Uniform,
    })
}

/// The `level`-th dyadic cutting, `t = 2^level`.
pub fn dyadic_cutting(cube: Cube, level: u32) -> Result<Cutting, CuttingError> {
    if level >= 62 {
        return Err(CuttingError::LevelTooDeep(level));
    }
    Ok(Cutting {
        cube,
        t: 1u64 << level,
        kind: CuttingKind::Dyadic { level },
    })
}

/// Depth `I = ceil(log2 a) + 1` of the finest dyadic cutting: level-`I`
/// cells have side `a / 2^I <= 1/2`.
pub fn dyadic_depth(side: u64) -> u32 {
    assert!(side >= 1);
    let ceil_log2 = 64 - (side - 1).leading_zeros();
    let ceil_log2 = if side == 1 { 0 } else { ceil_log2 };
    ceil_log2 + 1
}

impl Cutting {
    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn kind(&self) -> CuttingKind {
        self.kind
    }

    pub fn level(&self) -> Option<u32> {
        match self.kind {
            CuttingKind::Dyadic { level } => Some(level),
            CuttingKind::Uniform => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.cube.dim
    }

    pub fn cell_count(&self) -> u128 {
        (self.t as u128).pow(self.cube.dim as u32)
    }

    /// Side length `a / t` of every cell.
    pub fn cell_side(&self) -> ExactScalar {
        ExactScalar::ratio(self.cube.side as i64, self.t as i64)
    }

    /// The cell whose open box contains `p`.
    pub fn locate(&self, p: &Point) -> Result<CellIndex, CuttingError> {
        if p.dim() != self.cube.dim {
            return Err(CuttingError::DimensionMismatch {
                expected: self.cube.dim,
                found: p.dim(),
            });
        }
        let a = ExactScalar::from(self.cube.side);
        let scale = ExactScalar::ratio(self.t as i64, self.cube.side as i64);
        let mut index = Vec::with_capacity(p.dim());
        for (axis, x) in p.coords().iter().enumerate() {
            if !x.is_positive() || *x >= a {
                return Err(CuttingError::OutOfCube {
                    axis,
                    side: self.cube.side,
                });
            }
        }
        for (axis, x) in p.coords().iter().enumerate() {
            let y = x * &scale;
            if y.is_integer() {
                return Err(CuttingError::OnBoundary { axis, t: self.t });
            }
            let j: u64 = num_traits::ToPrimitive::to_u64(&y.floor()).expect("in range") + 1;
            index.push(j);
        }
        Ok(CellIndex {
            t: self.t,
            level: self.level(),
            index,
        })
    }

    /// Index of the closed bucket containing `p`: like [`Cutting::locate`] but
    /// boundary points go to the cell above, clamped into range. Points
    /// outside the closed cube yield `None`.
    pub fn bucket_of(&self, p: &Point) -> Option<Vec<u64>> {
        let a = ExactScalar::from(self.cube.side);
        let scale = ExactScalar::ratio(self.t as i64, self.cube.side as i64);
        let mut out = Vec::with_capacity(p.dim());
        for x in p.coords() {
            if x.is_negative() || *x > a {
                return None;
            }
            let f = num_traits::ToPrimitive::to_u64(&(x * &scale).floor())?;
            out.push(f.min(self.t - 1) + 1);
        }
        Some(out)
    }

    /// Lower and upper bounds of the cell box along each axis.
    pub fn cell_bounds(&self, cell: &[u64]) -> Vec<(ExactScalar, ExactScalar)> {
        let side = self.cell_side();
        cell.iter()
            .map(|&j| {
                let hi = &side * &ExactScalar::from(j);
                let lo = &hi - &side;
                (lo, hi)
            })
            .collect()
    }

    /// All cell indices in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let n = self.cube.dim;
        let t = self.t;
        let total = self.cell_count();
        (0..total).map(move |mut k| {
            let mut idx = vec![0u64; n];
            for slot in idx.iter_mut().rev() {
                *slot = (k % t as u128) as u64 + 1;
                k /= t as u128;
            }
            idx
        })
    }

    /// Mixed-radix key of a cell, unique within this cutting.
    pub fn cell_key(&self, cell: &[u64]) -> u128 {
        cell.iter()
            .fold(0u128, |acc, &j| acc * self.t as u128 + (j - 1) as u128)
    }
}

/// The level-(i−1) cell containing a level-i dyadic cell.
pub fn parent_cell(c: &CellIndex) -> Result<CellIndex, CuttingError> {
    let level = c.level.ok_or(CuttingError::NotDyadic)?;
    if level == 0 {
        return Err(CuttingError::NoParent);
    }
    Ok(CellIndex {
        t: c.t / 2,
        level: Some(level - 1),
        index: c.index.iter().map(|j| j.div_ceil(2)).collect(),
    })
}
