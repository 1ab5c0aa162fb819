//! Counting the cells of a cutting that a flat passes through.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::algebra::Interval;
use crate::exact::{Cutting, ExactScalar};

use super::{Ball, Flat, FlatError, Implicit, Line, Plane};

/// Outcome of a flat/box intersection test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxTest {
    Meets,
    Misses,
    /// The test could not exclude the box (implicit flats only).
    Maybe,
}

impl BoxTest {
    /// Conservative reading: anything not excluded counts as meeting.
    pub fn possibly(self) -> bool {
        self != BoxTest::Misses
    }

    fn from_bool(b: bool) -> BoxTest {
        if b {
            BoxTest::Meets
        } else {
            BoxTest::Misses
        }
    }
}

/// Number of cells met, and whether the count is exact or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCount {
    pub count: u128,
    pub exact: bool,
}

fn lt(a: &ExactScalar, b: &ExactScalar, closed: bool) -> bool {
    if closed {
        a <= b
    } else {
        a < b
    }
}

/// Tests whether the flat meets the box `Π (lo_i, hi_i)`, open or closed.
pub fn meets_box(f: &Flat, bx: &[(ExactScalar, ExactScalar)], closed: bool) -> BoxTest {
    assert_eq!(bx.len(), f.ambient_dim());
    match f {
        Flat::Line(l) => BoxTest::from_bool(line_param_range(l, bx, closed).is_some()),
        Flat::Plane(p) => {
            let (lo, hi) = linear_range(p.normal(), bx);
            BoxTest::from_bool(lt(&lo, p.offset(), closed) && lt(p.offset(), &hi, closed))
        }
        Flat::Circle(b) | Flat::Sphere(b) => {
            let (lo, hi) = dist_sq_range(b, bx);
            BoxTest::from_bool(lt(&lo, b.radius_sq(), closed) && lt(b.radius_sq(), &hi, closed))
        }
        Flat::Implicit(i) => implicit_box(i, bx),
    }
}

/// Parameter interval of the line inside the box, if nonempty.
fn line_param_range(
    l: &Line,
    bx: &[(ExactScalar, ExactScalar)],
    closed: bool,
) -> Option<(Option<ExactScalar>, Option<ExactScalar>)> {
    let mut lo: Option<ExactScalar> = None;
    let mut hi: Option<ExactScalar> = None;
    for ((b, d), (blo, bhi)) in l.base().coords().iter().zip(l.direction()).zip(bx) {
        if d.is_zero() {
            if !(lt(blo, b, closed) && lt(b, bhi, closed)) {
                return None;
            }
            continue;
        }
        let mut s0 = &(blo - b) / d;
        let mut s1 = &(bhi - b) / d;
        if s0 > s1 {
            std::mem::swap(&mut s0, &mut s1);
        }
        if lo.as_ref().is_none_or(|v| s0 > *v) {
            lo = Some(s0);
        }
        if hi.as_ref().is_none_or(|v| s1 < *v) {
            hi = Some(s1);
        }
    }
    match (&lo, &hi) {
        (Some(a), Some(b)) if !lt(a, b, closed) => None,
        _ => Some((lo, hi)),
    }
}

/// Range of `n · x` over the box.
fn linear_range(n: &[ExactScalar], bx: &[(ExactScalar, ExactScalar)]) -> (ExactScalar, ExactScalar) {
    let mut lo = ExactScalar::zero();
    let mut hi = ExactScalar::zero();
    for (c, (a, b)) in n.iter().zip(bx) {
        let (x, y) = (c * a, c * b);
        if c.is_negative() {
            lo = &lo + &y;
            hi = &hi + &x;
        } else {
            lo = &lo + &x;
            hi = &hi + &y;
        }
    }
    (lo, hi)
}

/// Infimum and supremum of the squared distance to the center over the box.
fn dist_sq_range(b: &Ball, bx: &[(ExactScalar, ExactScalar)]) -> (ExactScalar, ExactScalar) {
    let mut lo = ExactScalar::zero();
    let mut hi = ExactScalar::zero();
    for (c, (a, z)) in b.center().coords().iter().zip(bx) {
        let near = if c < a {
            a - c
        } else if c > z {
            c - z
        } else {
            ExactScalar::zero()
        };
        let far = (a - c).abs().max((z - c).abs());
        lo = &lo + &near.square();
        hi = &hi + &far.square();
    }
    (lo, hi)
}

fn implicit_box(i: &Implicit, bx: &[(ExactScalar, ExactScalar)]) -> BoxTest {
    let excluded = |b: &[Interval]| i.equations().iter().any(|e| !e.eval_interval(b).contains_zero());
    let whole: Vec<Interval> = bx.iter().map(|(a, b)| Interval::new(a.clone(), b.clone())).collect();
    if excluded(&whole) {
        return BoxTest::Misses;
    }
    // One bisection round: the box survives if any half-box survives.
    let n = bx.len();
    let two = ExactScalar::from_int(2);
    let mids: Vec<ExactScalar> = bx.iter().map(|(a, b)| &(a + b) / &two).collect();
    let any_survives = (0..1u32 << n).any(|mask| {
        let sub: Vec<Interval> = (0..n)
            .map(|k| {
                let (a, b) = &bx[k];
                if mask >> k & 1 == 0 {
                    Interval::new(a.clone(), mids[k].clone())
                } else {
                    Interval::new(mids[k].clone(), b.clone())
                }
            })
            .collect();
        !excluded(&sub)
    });
    if any_survives {
        BoxTest::Maybe
    } else {
        BoxTest::Misses
    }
}

/// Counts the open cells of the cutting that the flat meets.
///
/// Lines, planes, circles and spheres are counted exactly. Implicit flats get
/// a conservative interval-arithmetic count, reported with `exact = false`.
pub fn nonempty_cells(f: &Flat, cutting: &Cutting) -> Result<CellCount, FlatError> {
    if f.ambient_dim() != cutting.dim() {
        return Err(FlatError::DimensionMismatch {
            expected: f.ambient_dim(),
            found: cutting.dim(),
        });
    }
    let exact = |count| CellCount { count, exact: true };
    match f {
        Flat::Line(l) => Ok(exact(line_cells(l, cutting))),
        Flat::Plane(p) => Ok(exact(plane_cells(p, cutting))),
        Flat::Circle(_) | Flat::Sphere(_) => Ok(exact(
            cutting
                .cells()
                .filter(|c| meets_box(f, &cutting.cell_bounds(c), false) == BoxTest::Meets)
                .count() as u128,
        )),
        Flat::Implicit(_) => Ok(CellCount {
            count: cutting
                .cells()
                .filter(|c| meets_box(f, &cutting.cell_bounds(c), false).possibly())
                .count() as u128,
            exact: false,
        }),
    }
}

/// The line crosses a new cell exactly at each distinct grid-hyperplane
/// crossing strictly inside its parameter range within the open cube.
fn line_cells(l: &Line, cutting: &Cutting) -> u128 {
    let a = ExactScalar::from(cutting.cube().side());
    let h = cutting.cell_side();
    let n = cutting.dim();
    let cube: Vec<(ExactScalar, ExactScalar)> = vec![(ExactScalar::zero(), a); n];
    let Some((Some(lo), Some(hi))) = line_param_range(l, &cube, false) else {
        return 0;
    };
    // An axis-parallel line lying on a grid hyperplane meets no open cell.
    for (b, d) in l.base().coords().iter().zip(l.direction()) {
        if d.is_zero() && (b / &h).is_integer() {
            return 0;
        }
    }
    let mut breaks = Vec::new();
    for (b, d) in l.base().coords().iter().zip(l.direction()) {
        if d.is_zero() {
            continue;
        }
        for k in 1..cutting.t() {
            let s = &(&(&h * &ExactScalar::from(k)) - b) / d;
            if lo < s && s < hi {
                breaks.push(s);
            }
        }
    }
    breaks.sort();
    breaks.dedup();
    breaks.len() as u128 + 1
}

/// Column sweep along the axis with the largest normal component: over each
/// open column the plane's height is an open interval, and the cells it meets
/// are counted directly.
fn plane_cells(p: &Plane, cutting: &Cutting) -> u128 {
    let n = p.normal();
    let axis = (0..3).max_by_key(|&i| n[i].abs()).unwrap();
    let others: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
    let a = ExactScalar::from(cutting.cube().side());
    let h = cutting.cell_side();
    let t = cutting.t();
    let na = &n[axis];
    let mut total: u128 = 0;
    for i in 1..=t {
        for j in 1..=t {
            let bx = cutting.cell_bounds(&[i, j]);
            let coeffs = [-&n[others[0]] / na, -&n[others[1]] / na];
            let base = p.offset() / na;
            let (mut zlo, mut zhi) = linear_range(&coeffs, &bx);
            zlo = &zlo + &base;
            zhi = &zhi + &base;
            if zlo == zhi {
                // Plane orthogonal to the sweep axis.
                let z = zlo;
                let on_grid = (&z / &h).is_integer();
                if z.is_positive() && z < a && !on_grid {
                    total += 1;
                }
                continue;
            }
            let lo = zlo.max(ExactScalar::zero());
            let hi = zhi.min(a.clone());
            if lo >= hi {
                continue;
            }
            let first = (&lo / &h).floor();
            let last = (&hi / &h).ceil();
            total += (last - first).to_u128().unwrap_or(0);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{make_cutting, Cube, Point};
    use crate::flats::line_through;

    fn s(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    fn ints(v: &[i64]) -> Vec<ExactScalar> {
        v.iter().map(|&x| ExactScalar::from_int(x)).collect()
    }

    /// Brute-force oracle: sample the flat densely in floating point far away
    /// from cell boundaries would be fragile, so compare against the generic
    /// per-cell box test instead.
    fn per_cell(f: &Flat, c: &Cutting) -> u128 {
        c.cells()
            .filter(|cell| meets_box(f, &c.cell_bounds(cell), false) == BoxTest::Meets)
            .count() as u128
    }

    #[test]
    fn diagonal_line_examples() {
        let cube = Cube::new(1, 2).unwrap();
        let c4 = make_cutting(cube, 4).unwrap();
        let diag = line_through(&Point::from_ints(&[0, 0]), &Point::from_ints(&[1, 1])).unwrap();
        assert_eq!(nonempty_cells(&diag, &c4).unwrap().count, 4);
        let shifted = Flat::line(&Point::from_ratios(&[(0, 1), (1, 8)]), &ints(&[1, 1])).unwrap();
        assert_eq!(nonempty_cells(&shifted, &c4).unwrap().count, 7);
        assert_eq!(per_cell(&shifted, &c4), 7);
    }

    #[test]
    fn boundary_line_meets_nothing() {
        let cube = Cube::new(1, 2).unwrap();
        let c4 = make_cutting(cube, 4).unwrap();
        let l = Flat::line(&Point::from_ratios(&[(0, 1), (1, 4)]), &ints(&[1, 0])).unwrap();
        assert_eq!(nonempty_cells(&l, &c4).unwrap().count, 0);
        let l = Flat::line(&Point::from_ratios(&[(0, 1), (1, 8)]), &ints(&[1, 0])).unwrap();
        assert_eq!(nonempty_cells(&l, &c4).unwrap().count, 4);
    }

    #[test]
    fn plane_sweep_matches_per_cell() {
        let cube = Cube::new(4, 3).unwrap();
        let planes = [
            Flat::plane(&ints(&[1, 1, 1]), &s(6, 1)).unwrap(),
            Flat::plane(&ints(&[1, 2, -3]), &s(1, 3)).unwrap(),
            Flat::plane(&ints(&[0, 0, 1]), &s(3, 2)).unwrap(),
            Flat::plane(&ints(&[0, 0, 1]), &s(2, 1)).unwrap(),
            Flat::plane(&ints(&[0, 3, 1]), &s(7, 5)).unwrap(),
        ];
        for t in [1, 2, 3, 4, 8] {
            let c = make_cutting(cube, t).unwrap();
            for p in &planes {
                let got = nonempty_cells(p, &c).unwrap().count;
                assert_eq!(got, per_cell(p, &c), "{p:?} t={t}");
                assert!(got <= 3 * (t as u128).pow(2));
            }
        }
    }

    #[test]
    fn line_breakpoints_match_per_cell() {
        let cube = Cube::new(3, 3).unwrap();
        let l = line_through(
            &Point::from_ratios(&[(1, 3), (5, 7), (2, 1)]),
            &Point::from_ratios(&[(4, 9), (1, 2), (3, 5)]),
        )
        .unwrap();
        for t in [1, 2, 3, 6] {
            let c = make_cutting(cube, t).unwrap();
            assert_eq!(nonempty_cells(&l, &c).unwrap().count, per_cell(&l, &c));
        }
    }

    #[test]
    fn circle_cells_bounded() {
        let cube = Cube::new(8, 2).unwrap();
        let circ = Flat::circle(Point::from_ints(&[4, 4]), s(9, 1)).unwrap();
        for t in [2, 4, 8, 16] {
            let c = make_cutting(cube, t).unwrap();
            let k = nonempty_cells(&circ, &c).unwrap();
            assert!(k.exact && k.count > 0 && k.count <= 8 * t as u128);
        }
    }

    #[test]
    fn implicit_count_is_conservative() {
        let circ = Flat::circle(Point::from_ints(&[4, 4]), s(9, 1)).unwrap();
        let imp = Flat::implicit(circ.equations(), 2, 1).unwrap();
        let c = make_cutting(Cube::new(8, 2).unwrap(), 8).unwrap();
        let exact = nonempty_cells(&circ, &c).unwrap();
        let approx = nonempty_cells(&imp, &c).unwrap();
        assert!(!approx.exact);
        assert!(approx.count >= exact.count);
    }
}
