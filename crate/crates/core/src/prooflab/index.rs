//! Index of a point on a surface, the level pigeonholes and admissible
//! triples.

use std::collections::{BTreeMap, HashSet};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flats::{intersect_surfaces, Flat, Intersection};

use super::{for_each_subset, ProofContext, ProofError};

impl ProofContext {
    /// Whether point `x` of member `s` belongs to a defining (r+1)-tuple
    /// inside its level-`level` cell.
    pub fn in_defining_tuple(&self, x: usize, s: usize, level: u32) -> Result<bool, ProofError> {
        let others: Vec<usize> = self.cellmates(s, level, x).into_iter().filter(|&y| y != x).collect();
        if others.len() < self.r {
            return Ok(false);
        }
        self.check_cap(others.len(), self.r)?;
        let mut t = Vec::with_capacity(self.r + 1);
        let found = for_each_subset(&others, self.r, |sub| {
            t.clear();
            t.extend_from_slice(sub);
            t.push(x);
            if self.is_defining_ids(&t, s) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        Ok(found.is_break())
    }

    /// Whether member `s` has any defining (r+1)-tuple at level 0.
    pub fn has_defining_tuple(&self, s: usize) -> Result<bool, ProofError> {
        let ids = &self.point_ids[s];
        if ids.len() < self.r + 1 {
            return Ok(false);
        }
        self.check_cap(ids.len(), self.r + 1)?;
        Ok(for_each_subset(ids, self.r + 1, |t| {
            if self.is_defining_ids(t, s) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break())
    }

    /// Least level `i` in `0..=I` at which `x` lies in no defining tuple of
    /// member `s`, or `I + 1` when it lies in one at every level. Levels are
    /// scanned upward; cells only shrink, so the first miss is final.
    pub fn index_of(&self, x: usize, s: usize) -> Result<u32, ProofError> {
        if self.point_ids[s].binary_search(&x).is_err() {
            return Err(ProofError::PointNotOnSurface { point: x });
        }
        for level in 0..=self.depth {
            if !self.in_defining_tuple(x, s, level)? {
                if level == 0 && !self.has_defining_tuple(s)? {
                    return Err(ProofError::NoDefiningTupleAtLevel0 { flat: s });
                }
                return Ok(level);
            }
        }
        Ok(self.depth + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLemmaReport {
    pub pairs: usize,
    /// Members without any defining tuple; their points have no index.
    pub rejected_flats: Vec<usize>,
    /// `(point, flat, index)` with index outside `1..=I`.
    pub violations: Vec<(usize, usize, u32)>,
    pub min_index: Option<u32>,
    pub max_index: Option<u32>,
    pub pass: bool,
}

/// Checks `1 <= index(x, S) <= I` for every incident pair.
pub fn index_lemma_check(ctx: &ProofContext) -> Result<IndexLemmaReport, ProofError> {
    let per_flat: Vec<Result<Option<Vec<(usize, u32)>>, ProofError>> = (0..ctx.family.len())
        .into_par_iter()
        .map(|s| {
            let mut out = Vec::with_capacity(ctx.point_ids[s].len());
            for &x in &ctx.point_ids[s] {
                match ctx.index_of(x, s) {
                    Ok(i) => out.push((x, i)),
                    Err(ProofError::NoDefiningTupleAtLevel0 { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(out))
        })
        .collect();
    let mut rep = IndexLemmaReport {
        pairs: 0,
        rejected_flats: Vec::new(),
        violations: Vec::new(),
        min_index: None,
        max_index: None,
        pass: true,
    };
    for (s, res) in per_flat.into_iter().enumerate() {
        let Some(list) = res? else {
            rep.rejected_flats.push(s);
            continue;
        };
        for (x, i) in list {
            rep.pairs += 1;
            rep.min_index = Some(rep.min_index.map_or(i, |m| m.min(i)));
            rep.max_index = Some(rep.max_index.map_or(i, |m| m.max(i)));
            if i == 0 || i > ctx.depth {
                rep.violations.push((x, s, i));
            }
        }
    }
    rep.pass = rep.violations.is_empty() && rep.rejected_flats.is_empty();
    Ok(rep)
}

/// Indices of all incident pairs of a k-rich family and the level choices
/// made from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexTable {
    pub k: usize,
    pub depth: u32,
    /// `indices[s][j]`: index of the `j`-th point of member `s`.
    pub indices: Vec<Vec<u32>>,
    /// `i(S)`: least level holding at least `k / 2I` points of `S`.
    pub flat_level: Vec<Option<u32>>,
    /// The most common `i(S)`, ties to the smaller level.
    pub chosen: u32,
    /// Members with `i(S)` equal to the chosen level.
    pub s1: Vec<usize>,
    /// `|S1| * 2I >= |S|`.
    pub pigeonhole_ok: bool,
}

fn majority(levels: impl Iterator<Item = u32>) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for l in levels {
        *counts.entry(l).or_default() += 1;
    }
    // max_by_key keeps the last maximum, so walk levels downward.
    counts.into_iter().rev().max_by_key(|&(_, c)| c).map(|(l, _)| l)
}

/// Computes every index of a k-rich family and chooses the level `𝐢`.
pub fn pigeonhole_levels(ctx: &ProofContext, k: usize) -> Result<IndexTable, ProofError> {
    for (s, ids) in ctx.point_ids.iter().enumerate() {
        if ids.len() < k {
            return Err(ProofError::NotRich {
                flat: s,
                points: ids.len(),
                k,
            });
        }
    }
    let indices: Vec<Vec<u32>> = (0..ctx.family.len())
        .into_par_iter()
        .map(|s| ctx.point_ids[s].iter().map(|&x| ctx.index_of(x, s)).collect())
        .collect::<Result<_, _>>()?;
    let two_i = 2 * ctx.depth as usize;
    let flat_level: Vec<Option<u32>> = indices
        .iter()
        .map(|idx| {
            (1..=ctx.depth).find(|&l| idx.iter().filter(|&&i| i == l).count() * two_i >= k)
        })
        .collect();
    let chosen = majority(flat_level.iter().flatten().copied()).unwrap_or(0);
    let s1: Vec<usize> = (0..flat_level.len()).filter(|&s| flat_level[s] == Some(chosen)).collect();
    let pigeonhole_ok = s1.len() * two_i >= ctx.family.len();
    Ok(IndexTable {
        k,
        depth: ctx.depth,
        indices,
        flat_level,
        chosen,
        s1,
        pigeonhole_ok,
    })
}

/// Constant separating the two cases of the level argument.
pub const CASE_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub level: u32,
    pub c0: f64,
    /// `C0 4^𝐢 ln N ln k`.
    pub threshold: f64,
    pub case: u8,
    /// Defining (r+1)-tuples at level `𝐢 - 1` over members of `S1`.
    pub defining_tuples: u64,
    /// `|S1| k / (2I (r+1))`.
    pub defining_lower_bound: f64,
    pub defining_bound_ok: bool,
}

/// Which case applies at the chosen level, with the defining-tuple count
/// that the first case relies on.
pub fn case_split(ctx: &ProofContext, table: &IndexTable) -> Result<CaseReport, ProofError> {
    let level = table.chosen;
    let n = ctx.n_points() as f64;
    let k = table.k as f64;
    let threshold = CASE_CONSTANT * 4f64.powi(level as i32) * n.ln() * k.ln();
    let below = level.saturating_sub(1);
    let counts: Vec<u64> = table
        .s1
        .par_iter()
        .map(|&s| {
            let mut groups: BTreeMap<u128, Vec<usize>> = BTreeMap::new();
            for &x in &ctx.point_ids[s] {
                groups.entry(ctx.cell(below, x)).or_default().push(x);
            }
            let mut c = 0u64;
            for ids in groups.values() {
                ctx.check_cap(ids.len(), ctx.r + 1)?;
                let _ = for_each_subset::<()>(ids, ctx.r + 1, |t| {
                    if ctx.is_defining_ids(t, s) {
                        c += 1;
                    }
                    ControlFlow::Continue(())
                });
            }
            Ok(c)
        })
        .collect::<Result<_, ProofError>>()?;
    let defining_tuples: u64 = counts.iter().sum();
    let denom = 2 * ctx.depth as u64 * (ctx.r as u64 + 1);
    Ok(CaseReport {
        level,
        c0: CASE_CONSTANT,
        threshold,
        case: if k <= threshold { 1 } else { 2 },
        defining_tuples,
        defining_lower_bound: (table.s1.len() * table.k) as f64 / denom as f64,
        defining_bound_ok: defining_tuples as u128 * denom as u128 >= (table.s1.len() * table.k) as u128,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSelection {
    /// `L` with `2^L <= k < 2^(L+1)`.
    pub big_l: u32,
    /// `|P0(S)| = ceil(k / 2I)`.
    pub p0_size: usize,
    /// `P0(S)` for each member of `S1`, in the order of `S1`.
    pub p0: Vec<Vec<usize>>,
    /// `m[j][l]`: level-`𝐢` cells holding between `2^l` and `2^(l+1)`
    /// points of `P0` of the `j`-th member of `S1`.
    pub m: Vec<Vec<usize>>,
    /// `l(S)`, maximizing `m(l, S) 2^(l+1)`.
    pub flat_l: Vec<u32>,
    pub chosen: u32,
    pub s2: Vec<usize>,
    /// `m(𝐥, S)` for each member of `S2`.
    pub m_chosen: Vec<usize>,
    /// `|S2| 2L >= |S1|`.
    pub pigeonhole_ok: bool,
    /// `m(𝐥, S) 2^(𝐥+1) >= k / 4IL` on all of `S2`.
    pub density_ok: bool,
}

/// Chooses the point-count scale `𝐥` over `S1`.
pub fn select_level_l(ctx: &ProofContext, table: &IndexTable) -> LevelSelection {
    let k = table.k;
    let two_i = 2 * ctx.depth as usize;
    let big_l = usize::BITS - 1 - k.max(1).leading_zeros();
    let p0_size = k.div_ceil(two_i.max(1));
    let mut p0 = Vec::with_capacity(table.s1.len());
    let mut m = Vec::with_capacity(table.s1.len());
    let mut flat_l = Vec::with_capacity(table.s1.len());
    for &s in &table.s1 {
        let chosen_pts: Vec<usize> = ctx.point_ids[s]
            .iter()
            .zip(&table.indices[s])
            .filter(|&(_, &i)| i == table.chosen)
            .map(|(&x, _)| x)
            .take(p0_size)
            .collect();
        let mut per_cell: BTreeMap<u128, usize> = BTreeMap::new();
        for &x in &chosen_pts {
            *per_cell.entry(ctx.cell(table.chosen, x)).or_default() += 1;
        }
        let row: Vec<usize> = (0..=big_l)
            .map(|l| per_cell.values().filter(|&&c| (1 << l..=2 << l).contains(&c)).count())
            .collect();
        let best = (0..=big_l).rev().max_by_key(|&l| row[l as usize] << (l + 1)).unwrap_or(0);
        p0.push(chosen_pts);
        m.push(row);
        flat_l.push(best);
    }
    let chosen = majority(flat_l.iter().copied()).unwrap_or(0);
    let picks: Vec<usize> = (0..table.s1.len()).filter(|&j| flat_l[j] == chosen).collect();
    let s2: Vec<usize> = picks.iter().map(|&j| table.s1[j]).collect();
    let m_chosen: Vec<usize> = picks.iter().map(|&j| m[j][chosen as usize]).collect();
    let four_il = 4 * ctx.depth as usize * big_l as usize;
    LevelSelection {
        big_l,
        p0_size,
        pigeonhole_ok: s2.len() * 2 * big_l.max(1) as usize >= table.s1.len(),
        density_ok: m_chosen.iter().all(|&mm| (mm << (chosen + 1)) * four_il >= k),
        p0,
        m,
        flat_l,
        chosen,
        s2,
        m_chosen,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleWitness {
    pub surface: usize,
    pub other: usize,
    pub cell: u128,
    pub curve: String,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleCount {
    pub level: u32,
    /// `2^𝐥`.
    pub threshold: usize,
    /// Distinct `(S, V, j)` with `V = S ∩ S'` holding at least `2^𝐥` points
    /// in cell `j`.
    pub m_prime: u64,
    /// `|S2| min m(𝐥, S)`.
    pub lower_bound: u64,
    /// `sum over S2 of m(𝐥, S)`.
    pub sum_m: u64,
    pub lower_bound_ok: bool,
    pub witnesses: Vec<AdmissibleWitness>,
}

const WITNESS_LIMIT: usize = 32;

/// Counts admissible triples at level `𝐢` and threshold `2^𝐥` over the whole
/// family.
pub fn admissible_triples(
    ctx: &ProofContext,
    table: &IndexTable,
    sel: &LevelSelection,
) -> Result<AdmissibleCount, ProofError> {
    let level = table.chosen;
    let threshold = 1usize << sel.chosen;
    let members = ctx.family.members();
    let per_flat: Vec<(u64, Vec<AdmissibleWitness>)> = (0..members.len())
        .into_par_iter()
        .map(|s| {
            let mut groups: BTreeMap<u128, Vec<usize>> = BTreeMap::new();
            for &x in &ctx.point_ids[s] {
                groups.entry(ctx.cell(level, x)).or_default().push(x);
            }
            let mut count = 0u64;
            let mut witnesses = Vec::new();
            let mut hits = vec![0usize; members.len()];
            let mut touched = Vec::new();
            for (&cell, xs) in groups.iter().filter(|(_, xs)| xs.len() >= threshold) {
                for &x in xs {
                    for &f in &ctx.flats_by_point[x] {
                        if f != s {
                            if hits[f] == 0 {
                                touched.push(f);
                            }
                            hits[f] += 1;
                        }
                    }
                }
                touched.sort_unstable();
                let mut curves: HashSet<Flat> = HashSet::new();
                for &f in &touched {
                    if hits[f] < threshold {
                        continue;
                    }
                    let Intersection::Curve(v) = intersect_surfaces(&members[s], &members[f])? else {
                        continue;
                    };
                    if curves.contains(&v) {
                        continue;
                    }
                    if witnesses.len() < WITNESS_LIMIT {
                        witnesses.push(AdmissibleWitness {
                            surface: s,
                            other: f,
                            cell,
                            curve: v.canonical_text(),
                            points: xs.iter().copied().filter(|&x| v.contains(&ctx.points[x])).collect(),
                        });
                    }
                    curves.insert(v);
                }
                for f in touched.drain(..) {
                    hits[f] = 0;
                }
                count += curves.len() as u64;
            }
            Ok((count, witnesses))
        })
        .collect::<Result<_, ProofError>>()?;
    let m_prime = per_flat.iter().map(|(c, _)| c).sum();
    let witnesses = per_flat.into_iter().flat_map(|(_, w)| w).take(WITNESS_LIMIT).collect();
    let lower_bound = sel.s2.len() as u64 * sel.m_chosen.iter().copied().min().unwrap_or(0) as u64;
    Ok(AdmissibleCount {
        level,
        threshold,
        m_prime,
        lower_bound,
        sum_m: sel.m_chosen.iter().map(|&m| m as u64).sum(),
        lower_bound_ok: m_prime >= lower_bound,
        witnesses,
    })
}
