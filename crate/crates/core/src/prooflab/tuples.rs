//! Good r-tuples: r points sharing a cell of a cutting, counted overall and
//! along rich flats.

use std::collections::{BTreeMap, HashSet};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::exact::{make_cutting, Cutting, Point};
use crate::flats::{nonempty_cells, Flat};
use crate::incidence::IncidenceStructure;
use crate::pointgen::PointSet;

use super::{binomial, for_each_subset, ProofError, DEFAULT_SUBSET_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleCount {
    pub t: u64,
    pub r: usize,
    /// `sum over cells of C(|P ∩ cell|, r)`.
    pub total: u128,
    pub occupied_cells: usize,
    pub max_occupancy: usize,
}

fn cell_sizes<'a>(
    points: impl Iterator<Item = &'a Point>,
    cutting: &Cutting,
) -> Result<BTreeMap<u128, usize>, ProofError> {
    let mut sizes = BTreeMap::new();
    for p in points {
        *sizes.entry(cutting.cell_key(&cutting.locate(p)?.index)).or_default() += 1;
    }
    Ok(sizes)
}

/// Unordered r-tuples of points lying in one cell. Points on a cell
/// boundary are an error.
pub fn good_tuples(points: &[Point], cutting: &Cutting, r: usize) -> Result<TupleCount, ProofError> {
    if r == 0 {
        return Err(ProofError::InvalidR);
    }
    let sizes = cell_sizes(points.iter(), cutting)?;
    Ok(TupleCount {
        t: cutting.t(),
        r,
        total: sizes.values().map(|&c| binomial(c as u64, r as u64)).sum(),
        occupied_cells: sizes.len(),
        max_occupancy: sizes.values().copied().max().unwrap_or(0),
    })
}

/// Good r-tuples made of points on `v`.
pub fn good_tuples_in_flat(points: &[Point], cutting: &Cutting, v: &Flat, r: usize) -> Result<u128, ProofError> {
    if r == 0 {
        return Err(ProofError::InvalidR);
    }
    let mut on = Vec::new();
    for p in points {
        if v.incident(p)? {
            on.push(p);
        }
    }
    let sizes = cell_sizes(on.into_iter(), cutting)?;
    Ok(sizes.values().map(|&c| binomial(c as u64, r as u64)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem13Report {
    pub dim: usize,
    pub n_points: usize,
    pub k: usize,
    pub r: usize,
    /// `max(1, floor(k / 2r))`.
    pub t: u64,
    pub m_total: u128,
    pub rich_count: usize,
    pub sum_flat: u128,
    pub min_flat: Option<u128>,
    /// r-tuples counted on more than one rich flat.
    pub shared_tuples: u64,
    pub multiplicity_cap_ok: bool,
    /// `floor(M_total / min M_flat)`.
    pub implied_bound: Option<u128>,
    pub bound_ok: bool,
    /// Largest number of cells met by a rich flat.
    pub max_cells_met: u128,
    pub k_over_r: f64,
    /// `N^r / k^(n(r-1)+1)`.
    pub envelope: f64,
}

/// Good-tuple double count for the flats of `is` with at least `k` points.
pub fn theorem13_diagnostic(
    ps: &PointSet,
    is: &IncidenceStructure,
    k: usize,
    r: usize,
) -> Result<Theorem13Report, ProofError> {
    if r == 0 {
        return Err(ProofError::InvalidR);
    }
    let t = (k / (2 * r)).max(1) as u64;
    let cutting = make_cutting(ps.cube(), t)?;
    let m_total = good_tuples(ps.points(), &cutting, r)?.total;
    let rich = is.rich_flats(k.max(1)).expect("threshold is positive");
    let keys: Vec<u128> = ps
        .points()
        .iter()
        .map(|p| Ok(cutting.cell_key(&cutting.locate(p)?.index)))
        .collect::<Result<_, ProofError>>()?;

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut shared_tuples = 0u64;
    let mut sum_flat = 0u128;
    let mut min_flat: Option<u128> = None;
    let mut max_cells_met = 0u128;
    for &f in &rich {
        let mut groups: BTreeMap<u128, Vec<usize>> = BTreeMap::new();
        for &x in &is.point_ids()[f] {
            groups.entry(keys[x]).or_default().push(x);
        }
        let mut m_flat = 0u128;
        for ids in groups.values() {
            let n = binomial(ids.len() as u64, r as u64);
            if n > DEFAULT_SUBSET_CAP {
                return Err(ProofError::SubsetCapExceeded {
                    subsets: n,
                    cap: DEFAULT_SUBSET_CAP,
                });
            }
            m_flat += n;
            let _ = for_each_subset::<()>(ids, r, |tuple| {
                if !seen.insert(tuple.to_vec()) {
                    shared_tuples += 1;
                }
                ControlFlow::Continue(())
            });
        }
        sum_flat += m_flat;
        min_flat = Some(min_flat.map_or(m_flat, |m| m.min(m_flat)));
        max_cells_met = max_cells_met.max(nonempty_cells(&is.flats().members()[f], &cutting)?.count);
    }
    let implied_bound = min_flat.filter(|&m| m > 0).map(|m| m_total / m);
    let n = ps.dim() as i32;
    Ok(Theorem13Report {
        dim: ps.dim(),
        n_points: ps.len(),
        k,
        r,
        t,
        m_total,
        rich_count: rich.len(),
        sum_flat,
        min_flat,
        shared_tuples,
        multiplicity_cap_ok: shared_tuples == 0 && sum_flat <= m_total,
        implied_bound,
        bound_ok: implied_bound.map_or(rich.is_empty(), |b| b >= rich.len() as u128),
        max_cells_met,
        k_over_r: k as f64 / r as f64,
        envelope: (ps.len() as f64).powi(r as i32) / (k as f64).powi(n * (r as i32 - 1) + 1),
    })
}
