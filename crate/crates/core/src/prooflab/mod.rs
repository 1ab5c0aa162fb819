//! Executable counting arguments behind the rich-flat bounds: good
//! r-tuples in a cutting, defining (r+1)-tuples, the index of a point on a
//! surface, the pigeonhole level choices and admissible triples.
//!
//! Tuples are unordered throughout.

mod index;
mod tuples;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::exact::{dyadic_cutting, Cube, Cutting, CuttingError, Point};
use crate::flats::{intersect_surfaces, Flat, FlatError, FlatFamily, Intersection};
use crate::incidence::IncidenceStructure;
use crate::pointgen::PointSet;

pub use index::{
    admissible_triples, case_split, index_lemma_check, pigeonhole_levels, select_level_l,
    AdmissibleCount, AdmissibleWitness, CaseReport, IndexLemmaReport, IndexTable, LevelSelection,
};
pub use tuples::{
    good_tuples, good_tuples_in_flat, theorem13_diagnostic, Theorem13Report, TupleCount,
};

/// Default cap on the number of subsets enumerated in one cell.
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofError {
    #[error(transparent)]
    Cutting(#[from] CuttingError),
    #[error(transparent)]
    Flat(#[from] FlatError),
    #[error("tuple size r must be at least 1")]
    InvalidR,
    #[error("a cell would need {subsets} subsets, above the cap of {cap}")]
    SubsetCapExceeded { subsets: u128, cap: u128 },
    #[error("flat {flat} has no defining tuple at level 0")]
    NoDefiningTupleAtLevel0 { flat: usize },
    #[error("point {point} does not lie on the surface")]
    PointNotOnSurface { point: usize },
    #[error("the points do not share one cell of the cutting")]
    NotSameCell,
    #[error("flat {flat} has {points} points, fewer than k = {k}")]
    NotRich { flat: usize, points: usize, k: usize },
}

/// `C(n, r)`.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Calls `f` on every `k`-subset of `items` in lexicographic order until it
/// breaks.
pub(crate) fn for_each_subset<B>(
    items: &[usize],
    k: usize,
    mut f: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if k > items.len() {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<usize> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf)?;
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + items.len() - k) else {
            return ControlFlow::Continue(());
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
        for q in pos..k {
            buf[q] = items[idx[q]];
        }
    }
}

/// Exact check on raw points: no member other than `s` contains all of them.
/// With a cutting, the points must also share one cell.
pub fn is_defining_tuple(
    points: &[Point],
    s: &Flat,
    family: &FlatFamily,
    cutting: Option<&Cutting>,
) -> Result<bool, ProofError> {
    for (i, p) in points.iter().enumerate() {
        if !s.incident(p)? {
            return Err(ProofError::PointNotOnSurface { point: i });
        }
    }
    if let Some(c) = cutting {
        let cells: Vec<_> = points.iter().map(|p| c.locate(p)).collect::<Result<_, _>>()?;
        if cells.windows(2).any(|w| w[0] != w[1]) {
            return Err(ProofError::NotSameCell);
        }
    }
    Ok(!family
        .members()
        .iter()
        .any(|f| f != s && points.iter().all(|p| f.contains(p))))
}

/// Point set, family and incidences with the per-level cell of every point
/// precomputed for the dyadic cuttings `0..=I`.
#[derive(Debug, Clone)]
pub struct ProofContext {
    points: Vec<Point>,
    cube: Cube,
    family: FlatFamily,
    point_ids: Vec<Vec<usize>>,
    flats_by_point: Vec<Vec<usize>>,
    depth: u32,
    r: usize,
    subset_cap: u128,
    /// `cells[level][point]`: key of the point's cell at that level.
    cells: Vec<Vec<u128>>,
}

impl ProofContext {
    pub fn new(ps: &PointSet, is: &IncidenceStructure, r: usize) -> Result<ProofContext, ProofError> {
        if r == 0 {
            return Err(ProofError::InvalidR);
        }
        let depth = ps.dyadic_depth();
        let cells = (0..=depth)
            .map(|level| {
                let c = dyadic_cutting(ps.cube(), level)?;
                ps.points()
                    .iter()
                    .map(|p| Ok(c.cell_key(&c.locate(p)?.index)))
                    .collect::<Result<Vec<u128>, CuttingError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProofContext {
            points: ps.points().to_vec(),
            cube: ps.cube(),
            family: is.flats().clone(),
            point_ids: is.point_ids().to_vec(),
            flats_by_point: is.flats_by_point(),
            depth,
            r,
            subset_cap: DEFAULT_SUBSET_CAP,
            cells,
        })
    }

    pub fn with_subset_cap(mut self, cap: u128) -> ProofContext {
        self.subset_cap = cap;
        self
    }

    /// `I`, the finest dyadic level.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn family(&self) -> &FlatFamily {
        &self.family
    }

    pub fn point_ids(&self) -> &[Vec<usize>] {
        &self.point_ids
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub(crate) fn cell(&self, level: u32, point: usize) -> u128 {
        self.cells[level as usize][point]
    }

    pub(crate) fn check_cap(&self, n: usize, k: usize) -> Result<(), ProofError> {
        let subsets = binomial(n as u64, k as u64);
        if subsets > self.subset_cap {
            return Err(ProofError::SubsetCapExceeded {
                subsets,
                cap: self.subset_cap,
            });
        }
        Ok(())
    }

    /// Members containing every point of `tuple`, up to `limit` of them.
    pub(crate) fn members_containing(&self, tuple: &[usize], limit: usize) -> Vec<usize> {
        let Some(&first) = tuple.iter().min_by_key(|&&p| self.flats_by_point[p].len()) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &f in &self.flats_by_point[first] {
            if tuple.iter().all(|&p| self.flats_by_point[p].binary_search(&f).is_ok()) {
                out.push(f);
                if out.len() >= limit {
                    break;
                }
            }
        }
        out
    }

    /// Whether `tuple` (points of member `s`) lies on no other member.
    pub fn is_defining_ids(&self, tuple: &[usize], s: usize) -> bool {
        let on = self.members_containing(tuple, 2);
        on.len() == 1 && on[0] == s
    }

    /// Points of member `s` sharing the level-`level` cell of point `x`.
    pub(crate) fn cellmates(&self, s: usize, level: u32, x: usize) -> Vec<usize> {
        let key = self.cell(level, x);
        self.point_ids[s]
            .iter()
            .copied()
            .filter(|&y| self.cell(level, y) == key)
            .collect()
    }

    /// The unique intersection curve through all given points of member
    /// `s` when no (r+1)-subset of them is defining.
    pub fn uniqueness_of_cell_curve(&self, ids: &[usize], s: usize) -> Result<CellCurve, ProofError> {
        let r = self.r;
        if ids.len() < r + 1 {
            return Ok(CellCurve::TooFewPoints);
        }
        self.check_cap(ids.len(), r + 1)?;
        let any_defining = for_each_subset(ids, r + 1, |t| {
            if self.is_defining_ids(t, s) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if any_defining.is_break() {
            return Ok(CellCurve::NotAligned);
        }
        let surface = &self.family.members()[s];
        let curve_of = |t: &[usize]| -> Result<Flat, ProofError> {
            let other = self
                .members_containing(t, 2)
                .into_iter()
                .find(|&f| f != s)
                .expect("non-defining tuple lies on a second member");
            match intersect_surfaces(surface, &self.family.members()[other])? {
                Intersection::Curve(v) => Ok(v),
                Intersection::Empty => unreachable!("surfaces share points"),
            }
        };
        let v = curve_of(&ids[..r + 1])?;
        // Every other point, together with the first r, gives a curve that
        // must coincide with v by the type-r property.
        for &x in &ids[r + 1..] {
            let mut t: Vec<usize> = ids[..r].to_vec();
            t.push(x);
            let w = curve_of(&t)?;
            if w != v || !v.contains(&self.points[x]) {
                return Ok(CellCurve::Conflicting { first: v, second: w });
            }
        }
        Ok(CellCurve::Unique(v))
    }
}

/// Outcome of [`ProofContext::uniqueness_of_cell_curve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellCurve {
    Unique(Flat),
    /// Some (r+1)-subset is defining.
    NotAligned,
    TooFewPoints,
    /// Two intersection curves through r common points differ, which a
    /// type-r family rules out.
    Conflicting { first: Flat, second: Flat },
}

/// Scans every member, level and cell for all-non-defining cells and
/// resolves each one's curve.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub aligned_cells: usize,
    pub unique: usize,
    pub conflicting: usize,
}

pub fn uniqueness_scan(ctx: &ProofContext) -> Result<UniquenessReport, ProofError> {
    let mut rep = UniquenessReport::default();
    for s in 0..ctx.family.len() {
        for level in 0..=ctx.depth {
            let mut groups: std::collections::BTreeMap<u128, Vec<usize>> = Default::default();
            for &x in &ctx.point_ids[s] {
                groups.entry(ctx.cell(level, x)).or_default().push(x);
            }
            for ids in groups.values() {
                match ctx.uniqueness_of_cell_curve(ids, s)? {
                    CellCurve::Unique(_) => {
                        rep.aligned_cells += 1;
                        rep.unique += 1;
                    }
                    CellCurve::Conflicting { .. } => {
                        rep.aligned_cells += 1;
                        rep.conflicting += 1;
                    }
                    CellCurve::NotAligned | CellCurve::TooFewPoints => {}
                }
            }
        }
    }
    Ok(rep)
}
