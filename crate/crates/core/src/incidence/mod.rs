//! Point–flat incidences, rich-flat counting and spanned families.

mod spanned;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{make_cutting, Cutting, ExactScalar};
use crate::flats::{meets_box, FlatFamily};
use crate::pointgen::PointSet;

pub use spanned::{
    spanned_line_sizes, spanned_lines, spanned_lines_incidences, spanned_plane_sizes,
    spanned_planes, spanned_planes_incidences,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IncidenceError {
    #[error("points have dimension {points}, flats have dimension {flats}")]
    DimensionMismatch { points: usize, flats: usize },
    #[error("richness threshold must be at least 1")]
    InvalidThreshold,
    #[error("spanned planes need points in 3-space, got dimension {0}")]
    NotThreeDimensional(usize),
}

/// Flats with their sorted incident point ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceStructure {
    flats: FlatFamily,
    point_ids: Vec<Vec<usize>>,
    n_points: usize,
    total: usize,
}

impl IncidenceStructure {
    pub(crate) fn from_lists(flats: FlatFamily, point_ids: Vec<Vec<usize>>, n_points: usize) -> Self {
        let total = point_ids.iter().map(Vec::len).sum();
        IncidenceStructure {
            flats,
            point_ids,
            n_points,
            total,
        }
    }

    pub fn flats(&self) -> &FlatFamily {
        &self.flats
    }

    /// Incident point ids of each flat, ascending.
    pub fn point_ids(&self) -> &[Vec<usize>] {
        &self.point_ids
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// For each point, the ascending ids of the flats through it.
    pub fn flats_by_point(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_points];
        for (f, ids) in self.point_ids.iter().enumerate() {
            for &p in ids {
                out[p].push(f);
            }
        }
        out
    }

    pub fn sizes(&self) -> SizeHistogram {
        SizeHistogram::from_sizes(self.point_ids.iter().map(Vec::len))
    }

    /// `(k, R(k))` for `k = 1..=max richness`.
    pub fn profile(&self) -> Vec<(usize, usize)> {
        self.sizes().profile()
    }

    /// Ids of flats with at least `k` incident points, ascending.
    pub fn rich_flats(&self, k: usize) -> Result<Vec<usize>, IncidenceError> {
        if k == 0 {
            return Err(IncidenceError::InvalidThreshold);
        }
        Ok((0..self.point_ids.len()).filter(|&i| self.point_ids[i].len() >= k).collect())
    }

    /// Restriction to the given flats, keeping their order.
    pub fn restrict(&self, ids: &[usize]) -> IncidenceStructure {
        IncidenceStructure::from_lists(
            self.flats.subfamily(ids),
            ids.iter().map(|&i| self.point_ids[i].clone()).collect(),
            self.n_points,
        )
    }
}

/// Number of flats of each exact size (`counts[s]` = flats with `s` points).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeHistogram {
    counts: Vec<usize>,
}

impl SizeHistogram {
    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut h = SizeHistogram::default();
        for s in sizes {
            h.add(s, 1);
        }
        h
    }

    pub fn add(&mut self, size: usize, count: usize) {
        if self.counts.len() <= size {
            self.counts.resize(size + 1, 0);
        }
        self.counts[size] += count;
    }

    pub fn merge(mut self, other: &SizeHistogram) -> Self {
        for (s, &c) in other.counts.iter().enumerate() {
            if c > 0 {
                self.add(s, c);
            }
        }
        self
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn flat_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn total_incidences(&self) -> usize {
        self.counts.iter().enumerate().map(|(s, c)| s * c).sum()
    }

    pub fn max_richness(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    /// `R(k)`: flats with at least `k` points.
    pub fn rich_count(&self, k: usize) -> usize {
        self.counts.iter().skip(k).sum()
    }

    /// `(k, R(k))` for `k = 1..=max richness`.
    pub fn profile(&self) -> Vec<(usize, usize)> {
        let max = self.max_richness();
        let mut out = Vec::with_capacity(max);
        let mut acc = 0;
        for k in (1..=max).rev() {
            acc += self.counts[k];
            out.push((k, acc));
        }
        out.reverse();
        out
    }
}

/// Bucket resolution aiming at a handful of points per bucket.
fn default_buckets(ps: &PointSet) -> u64 {
    let per_axis = (ps.len() as f64 / 4.0).powf(1.0 / ps.dim() as f64).round() as u64;
    per_axis.clamp(1, ps.cube().side().max(1) * 4).min(64)
}

/// Exact incidences between a point set and a family.
pub fn build_incidences(ps: &PointSet, family: &FlatFamily) -> Result<IncidenceStructure, IncidenceError> {
    build_incidences_with(ps, family, default_buckets(ps))
}

/// [`build_incidences`] with an explicit bucket resolution `t`. Each flat is
/// tested only against points in closed buckets it meets; the result does
/// not depend on `t`.
pub fn build_incidences_with(
    ps: &PointSet,
    family: &FlatFamily,
    t: u64,
) -> Result<IncidenceStructure, IncidenceError> {
    if !family.is_empty() && family.ambient_dim() != ps.dim() {
        return Err(IncidenceError::DimensionMismatch {
            points: ps.dim(),
            flats: family.ambient_dim(),
        });
    }
    let cutting: Cutting = make_cutting(ps.cube(), t.max(1)).expect("valid cube and t");
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cutting.cell_count() as usize];
    for (i, p) in ps.points().iter().enumerate() {
        let cell = cutting.bucket_of(p).expect("points lie inside the cube");
        buckets[cutting.cell_key(&cell) as usize].push(i);
    }
    let occupied: Vec<(Vec<(ExactScalar, ExactScalar)>, &Vec<usize>)> = cutting
        .cells()
        .zip(&buckets)
        .filter(|(_, b)| !b.is_empty())
        .map(|(c, b)| (cutting.cell_bounds(&c), b))
        .collect();
    let point_ids: Vec<Vec<usize>> = family
        .members()
        .par_iter()
        .map(|f| {
            let mut ids: Vec<usize> = Vec::new();
            for (bounds, members) in &occupied {
                if !meets_box(f, bounds, true).possibly() {
                    continue;
                }
                ids.extend(members.iter().copied().filter(|&i| f.contains(&ps.points()[i])));
            }
            ids.sort_unstable();
            ids
        })
        .collect();
    Ok(IncidenceStructure::from_lists(family.clone(), point_ids, ps.len()))
}

/// Profile as CSV with columns `k,rich_count`.
pub fn profile_csv(profile: &[(usize, usize)]) -> String {
    let mut out = String::from("k,rich_count\n");
    for (k, r) in profile {
        let _ = writeln!(out, "{k},{r}");
    }
    out
}

/// One line of canonical coefficients per member.
pub fn flat_list_text(family: &FlatFamily) -> String {
    let mut out = String::new();
    for f in family.members() {
        out.push_str(&f.canonical_text());
        out.push('\n');
    }
    out
}
