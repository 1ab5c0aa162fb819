//! The type-r parameter and a sampled check that r points lie on at most one
//! member of a family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{dot, ExactScalar, Point};

use super::{is_square, line_line_point, Ball, Flat, FlatError, Line};

/// Type parameter `r` for degree-`d` curves (`flat_dim = 1`) in ℝⁿ or
/// degree-`d` surfaces (`flat_dim = 2`) in ℝ³.
pub fn type_r_bound(d: u32, n: usize, flat_dim: usize) -> Result<u64, FlatError> {
    let unsupported = || FlatError::Unsupported(format!("d={d}, n={n}, flat_dim={flat_dim}"));
    if d == 0 || n < 2 {
        return Err(unsupported());
    }
    let d = d as u64;
    match (flat_dim, n) {
        (1, 2) => Ok(d * d + 1),
        (1, _) => Ok(d * (2 * d - 1).pow(n as u32 - 1) + 1),
        (2, 3) => Ok(d * (2 * d - 1).pow(2) + 1),
        _ => Err(unsupported()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRWitness {
    pub points: Vec<Point>,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRReport {
    pub r: usize,
    pub trials: usize,
    /// Trials that produced r distinct points.
    pub sampled: usize,
    pub max_multiplicity: usize,
    pub witness: Option<TypeRWitness>,
    pub pass: bool,
}

/// Samples r-subsets of points from the members (mixed with pairwise common
/// points and random points) and counts how many members contain each
/// subset. The family passes when no subset lies on two members.
///
/// Takes a plain slice so that malformed inputs, such as repeated members,
/// can be checked too.
pub fn check_type_r(members: &[Flat], r: usize, trials: usize, seed: u64) -> TypeRReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TypeRReport {
        r,
        trials,
        sampled: 0,
        max_multiplicity: 0,
        witness: None,
        pass: true,
    };
    if members.is_empty() || r == 0 {
        return report;
    }
    for _ in 0..trials {
        let Some(points) = sample_subset(members, r, &mut rng) else {
            continue;
        };
        report.sampled += 1;
        let on: Vec<usize> = members
            .par_iter()
            .enumerate()
            .filter(|(_, m)| points.iter().all(|p| m.contains(p)))
            .map(|(i, _)| i)
            .collect();
        if on.len() > report.max_multiplicity {
            report.max_multiplicity = on.len();
            if on.len() > 1 {
                report.witness = Some(TypeRWitness {
                    points: points.clone(),
                    members: on,
                });
            }
        }
    }
    report.pass = report.max_multiplicity <= 1;
    report
}

fn random_scalar(rng: &mut ChaCha8Rng) -> ExactScalar {
    ExactScalar::ratio(rng.random_range(-40..=40), rng.random_range(1..=12))
}

fn random_point_on(f: &Flat, rng: &mut ChaCha8Rng) -> Option<Point> {
    let k = f.param_count()?;
    let params: Vec<ExactScalar> = (0..k).map(|_| random_scalar(rng)).collect();
    f.rational_point(&params)
}

fn sample_subset(members: &[Flat], r: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Point>> {
    let i = rng.random_range(0..members.len());
    let f = &members[i];
    let mut pts: Vec<Point> = Vec::with_capacity(r);
    // Common points with another member stress the "at most one" clause.
    if members.len() > 1 && rng.random_bool(0.5) {
        let j = (i + rng.random_range(1..members.len())) % members.len();
        for p in rational_common_points(f, &members[j]) {
            if pts.len() < r && !pts.contains(&p) {
                pts.push(p);
            }
        }
    }
    let mut attempts = 0;
    while pts.len() < r && attempts < 20 * r {
        attempts += 1;
        let p = if rng.random_bool(0.1) {
            Point::new((0..f.ambient_dim()).map(|_| random_scalar(rng)).collect())
        } else {
            random_point_on(f, rng)?
        };
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    (pts.len() == r).then_some(pts)
}

/// Rational common points of two plane curves among lines and circles, or
/// of two lines in any dimension. Irrational points are skipped.
pub fn rational_common_points(a: &Flat, b: &Flat) -> Vec<Point> {
    match (a, b) {
        (Flat::Line(x), Flat::Line(y)) => line_line_point(x, y).into_iter().collect(),
        (Flat::Line(l), Flat::Circle(c)) | (Flat::Circle(c), Flat::Line(l)) => line_ball(l, c),
        (Flat::Circle(c1), Flat::Circle(c2)) => {
            let (p, q) = (c1.center().coords(), c2.center().coords());
            let normal: Vec<ExactScalar> = q.iter().zip(p).map(|(y, x)| y - x).collect();
            if normal.iter().all(ExactScalar::is_zero) {
                return Vec::new();
            }
            // Radical line: 2(q-p)·x = |q|² - |p|² + r1 - r2.
            let two = ExactScalar::from_int(2);
            let rhs = &(&(&(&dot(q, q) - &dot(p, p)) + c1.radius_sq()) - c2.radius_sq()) / &two;
            let i0 = normal.iter().position(|v| !v.is_zero()).unwrap();
            let mut base = vec![ExactScalar::zero(); 2];
            base[i0] = &rhs / &normal[i0];
            let dir = [-&normal[1], normal[0].clone()];
            match Line::new(&Point::new(base), &dir) {
                Ok(l) => line_ball(&l, c1),
                Err(_) => Vec::new(),
            }
        }
        _ => Vec::new(),
    }
}

fn line_ball(l: &Line, b: &Ball) -> Vec<Point> {
    if l.dim() != b.center().dim() {
        return Vec::new();
    }
    let d = l.direction();
    let w = l.base().sub(b.center());
    let qa = dot(d, d);
    let qb = &ExactScalar::from_int(2) * &dot(d, &w);
    let qc = &dot(&w, &w) - b.radius_sq();
    let disc = &qb.square() - &(&ExactScalar::from_int(4) * &(&qa * &qc));
    if disc.is_negative() || !is_square(&disc) {
        return Vec::new();
    }
    let root = ExactScalar::from_big_parts(
        num_integer::Roots::sqrt(&disc.numer()),
        num_integer::Roots::sqrt(&disc.denom()),
    );
    let two_a = &ExactScalar::from_int(2) * &qa;
    let mut out = vec![l.point_at(&(&(&-&qb + &root) / &two_a))];
    if !root.is_zero() {
        out.push(l.point_at(&(&(&-&qb - &root) / &two_a)));
    }
    out
}
