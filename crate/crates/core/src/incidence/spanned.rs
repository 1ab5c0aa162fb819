//! Lines and planes spanned by a point set.
//!
//! Both enumerations work point by point: around point `i` the other points
//! are grouped by canonical direction, so each group is one line through
//! `i`, and pairs of groups with a common canonical normal make up one plane
//! through `i`. A flat is emitted only from its smallest point, so no global
//! deduplication is needed and per-point work runs in parallel.

use std::collections::HashMap;

use num_integer::Integer;
use rayon::prelude::*;

use crate::exact::{cross3, dot, primitive_direction, ExactScalar, Point};
use crate::flats::{Flat, FlatFamily, Line, Plane};
use crate::pointgen::PointSet;

use super::{IncidenceError, IncidenceStructure, SizeHistogram};

/// Canonical primitive integer direction. Vectors of dimension at most 4
/// whose entries fit in `i64` always use the inline form, so equal
/// directions get equal keys.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum DirKey {
    Small(u8, [i64; 4]),
    Big(Vec<ExactScalar>),
}

impl DirKey {
    fn from_primitive(v: Vec<ExactScalar>) -> DirKey {
        if v.len() <= 4 {
            let mut out = [0i64; 4];
            let fits = v.iter().zip(out.iter_mut()).all(|(x, slot)| match x.to_i64() {
                Some(y) => {
                    *slot = y;
                    true
                }
                None => false,
            });
            if fits {
                return DirKey::Small(v.len() as u8, out);
            }
        }
        DirKey::Big(v)
    }

    fn from_ints(v: &[i128]) -> Option<DirKey> {
        let mut g: i128 = 0;
        for x in v {
            g = g.gcd(x);
        }
        if g == 0 {
            return None;
        }
        if v.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
            g = -g;
        }
        let mut out = [0i64; 4];
        for (slot, x) in out.iter_mut().zip(v) {
            *slot = i64::try_from(x / g).ok()?;
        }
        Some(DirKey::Small(v.len() as u8, out))
    }

    fn to_scalars(&self) -> Vec<ExactScalar> {
        match self {
            DirKey::Small(n, v) => v[..*n as usize].iter().map(|&x| ExactScalar::from_int(x)).collect(),
            DirKey::Big(v) => v.clone(),
        }
    }

    /// Direction from `a` to `b` (distinct points).
    fn between(a: &Point, b: &Point) -> DirKey {
        Self::between_small(a, b).unwrap_or_else(|| {
            DirKey::from_primitive(primitive_direction(&b.sub(a)).expect("points are distinct"))
        })
    }

    fn between_small(a: &Point, b: &Point) -> Option<DirKey> {
        let n = a.dim();
        if n > 4 {
            return None;
        }
        // Generated sets share one denominator; then the numerator
        // differences already give the direction.
        let mut same = [0i128; 4];
        let mut common = None;
        let shared = (0..n).all(|k| match (a.coord(k).as_small(), b.coord(k).as_small()) {
            (Some((na, da)), Some((nb, db))) if da == db && common.is_none_or(|c| c == da) => {
                common = Some(da);
                same[k] = nb as i128 - na as i128;
                true
            }
            _ => false,
        });
        if shared {
            return Self::from_ints(&same[..n]);
        }
        let mut nums = [0i128; 4];
        let mut dens = [1i128; 4];
        let mut lcm: i128 = 1;
        for k in 0..n {
            let (na, da) = a.coord(k).as_small()?;
            let (nb, db) = b.coord(k).as_small()?;
            let (da, db) = (da as i128, db as i128);
            let num = nb as i128 * da - na as i128 * db;
            let den = da * db;
            let g = num.gcd(&den);
            nums[k] = num / g;
            dens[k] = den / g;
            lcm = lcm.checked_mul(dens[k] / lcm.gcd(&dens[k]))?;
        }
        let mut ints = [0i128; 4];
        for k in 0..n {
            ints[k] = nums[k].checked_mul(lcm / dens[k])?;
        }
        Self::from_ints(&ints[..n])
    }

    /// Canonical normal of the plane spanned by two 3D directions.
    fn cross(a: &DirKey, b: &DirKey) -> DirKey {
        if let (DirKey::Small(3, x), DirKey::Small(3, y)) = (a, b) {
            let (x, y) = (x.map(i128::from), y.map(i128::from));
            let c = [
                x[1] * y[2] - x[2] * y[1],
                x[2] * y[0] - x[0] * y[2],
                x[0] * y[1] - x[1] * y[0],
            ];
            if let Some(k) = Self::from_ints(&c) {
                return k;
            }
        }
        let c = cross3(&a.to_scalars(), &b.to_scalars());
        DirKey::from_primitive(primitive_direction(&c).expect("distinct canonical directions"))
    }
}

/// `(direction from pts[i], j)` for all `j != i`, sorted.
fn sorted_directions(pts: &[Point], i: usize) -> Vec<(DirKey, usize)> {
    let mut keyed: Vec<(DirKey, usize)> = pts
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, q)| (DirKey::between(&pts[i], q), j))
        .collect();
    keyed.sort_unstable();
    keyed
}

/// Sizes of the lines whose smallest point is `i`.
fn line_sizes_at(pts: &[Point], i: usize) -> SizeHistogram {
    let keyed = sorted_directions(pts, i);
    let mut h = SizeHistogram::default();
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len() && keyed[end].0 == keyed[start].0 {
            end += 1;
        }
        // Runs are sorted by point id, so the first one is the smallest.
        if keyed[start].1 > i {
            h.add(end - start + 1, 1);
        }
        start = end;
    }
    h
}

/// Other points grouped by canonical direction from `pts[i]`; each group is
/// ascending, and groups are sorted by direction.
fn direction_classes(pts: &[Point], i: usize) -> Vec<(DirKey, Vec<usize>)> {
    let keyed = sorted_directions(pts, i);
    let mut out: Vec<(DirKey, Vec<usize>)> = Vec::new();
    for (k, j) in keyed {
        match out.last_mut() {
            Some((last, class)) if *last == k => class.push(j),
            _ => out.push((k, vec![j])),
        }
    }
    out
}

fn lines_at(pts: &[Point], i: usize) -> Vec<(DirKey, Vec<usize>)> {
    direction_classes(pts, i)
        .into_iter()
        .filter(|(_, class)| class[0] > i)
        .collect()
}

/// Plane normals through `pts[i]` with the direction classes on each plane.
/// Only planes whose smallest point is `i` are kept.
fn planes_at(pts: &[Point], i: usize) -> Vec<(DirKey, Vec<usize>)> {
    let classes = direction_classes(pts, i);
    let mut groups: HashMap<DirKey, (bool, Vec<usize>)> = HashMap::new();
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            let n = DirKey::cross(&classes[a].0, &classes[b].0);
            let ok = classes[a].1[0] > i && classes[b].1[0] > i;
            let entry = groups.entry(n).or_insert_with(|| (true, Vec::new()));
            entry.0 &= ok;
            if entry.0 {
                entry.1.push(a);
                entry.1.push(b);
            }
        }
    }
    let mut out: Vec<(DirKey, Vec<usize>)> = groups
        .into_iter()
        .filter(|(_, (ok, _))| *ok)
        .map(|(n, (_, cls))| {
            let mut ids: Vec<usize> = std::iter::once(i)
                .chain(cls.iter().flat_map(|&c| classes[c].1.iter().copied()))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            (n, ids)
        })
        .collect();
    out.sort_unstable();
    out
}

fn collect_sorted(mut flats: Vec<(Flat, Vec<usize>)>, r: usize, n_points: usize) -> IncidenceStructure {
    flats.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let (members, lists): (Vec<Flat>, Vec<Vec<usize>>) = flats.into_iter().unzip();
    let family = FlatFamily::new(members, r).expect("spanned flats are distinct");
    IncidenceStructure::from_lists(family, lists, n_points)
}

/// All lines through at least two points, with their incidences, in
/// canonical order.
pub fn spanned_lines_incidences(ps: &PointSet) -> Result<IncidenceStructure, IncidenceError> {
    let pts = ps.points();
    let flats: Vec<(Flat, Vec<usize>)> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            lines_at(pts, i).into_iter().map(move |(d, class)| {
                let line = Flat::Line(Line::from_primitive(&pts[i], d.to_scalars()));
                let mut ids = Vec::with_capacity(class.len() + 1);
                ids.push(i);
                ids.extend(class);
                (line, ids)
            })
        })
        .collect();
    Ok(collect_sorted(flats, 2, pts.len()))
}

pub fn spanned_lines(ps: &PointSet) -> FlatFamily {
    spanned_lines_incidences(ps).expect("lines exist in every dimension").flats().clone()
}

/// Sizes of all spanned lines without materializing them.
pub fn spanned_line_sizes(ps: &PointSet) -> SizeHistogram {
    let pts = ps.points();
    (0..pts.len())
        .into_par_iter()
        .map(|i| line_sizes_at(pts, i))
        .reduce(SizeHistogram::default, |a, b| a.merge(&b))
}

fn require_3d(ps: &PointSet) -> Result<(), IncidenceError> {
    if ps.dim() != 3 {
        return Err(IncidenceError::NotThreeDimensional(ps.dim()));
    }
    Ok(())
}

/// All planes through at least three non-collinear points, with their
/// incidences, in canonical order.
pub fn spanned_planes_incidences(ps: &PointSet) -> Result<IncidenceStructure, IncidenceError> {
    require_3d(ps)?;
    let pts = ps.points();
    let flats: Vec<(Flat, Vec<usize>)> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            planes_at(pts, i).into_iter().map(move |(n, ids)| {
                let n = n.to_scalars();
                let offset = dot(&n, pts[i].coords());
                let plane = Flat::Plane(Plane::new(&n, &offset).expect("nonzero normal"));
                (plane, ids)
            })
        })
        .collect();
    Ok(collect_sorted(flats, 3, pts.len()))
}

pub fn spanned_planes(ps: &PointSet) -> Result<FlatFamily, IncidenceError> {
    Ok(spanned_planes_incidences(ps)?.flats().clone())
}

/// Sizes of all spanned planes without materializing them.
pub fn spanned_plane_sizes(ps: &PointSet) -> Result<SizeHistogram, IncidenceError> {
    require_3d(ps)?;
    let pts = ps.points();
    Ok((0..pts.len())
        .into_par_iter()
        .map(|i| SizeHistogram::from_sizes(planes_at(pts, i).iter().map(|(_, ids)| ids.len())))
        .reduce(SizeHistogram::default, |a, b| a.merge(&b)))
}
