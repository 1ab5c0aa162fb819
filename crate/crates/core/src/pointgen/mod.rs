//! Homogeneous point sets: generators, the text format and the homogeneity
//! checker.

mod text;

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{dyadic_depth, Cube, CuttingError, ExactScalar, Point};
use crate::flats::{Flat, FlatFamily};

pub use text::ParsePointSetError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PointGenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("member {0} has no rational parametrization")]
    UnparametrizableFlat(usize),
    #[error("could not place a boundary-safe point on member {0} inside the cube")]
    SamplingFailed(usize),
    #[error("point {index} is not strictly inside the cube")]
    OutsideCube { index: usize },
    #[error(transparent)]
    Cube(#[from] CuttingError),
}

/// Where a generated point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointTag {
    Lattice,
    Grid,
    /// Sampled on the family member with this index.
    OnFlat(usize),
    Background,
    External,
}

/// A finite point set inside an enclosing cube `[0,a]^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Point>,
    tags: Vec<PointTag>,
    cube: Cube,
    seed: u64,
    c_hom: u64,
    c_vol: u64,
}

/// Default homogeneity constant `2^n · 2`.
pub fn default_c_hom(n: usize) -> u64 {
    2u64.pow(n as u32) * 2
}

pub const DEFAULT_C_VOL: u64 = 2;

impl PointSet {
    /// Wraps externally supplied points; all must lie strictly inside the cube.
    pub fn new(points: Vec<Point>, cube: Cube, seed: u64) -> Result<PointSet, PointGenError> {
        if let Some(index) = points.iter().position(|p| !cube.contains_open(p)) {
            return Err(PointGenError::OutsideCube { index });
        }
        let tags = vec![PointTag::External; points.len()];
        Ok(PointSet::from_parts(points, tags, cube, seed))
    }

    fn from_parts(points: Vec<Point>, tags: Vec<PointTag>, cube: Cube, seed: u64) -> PointSet {
        PointSet {
            points,
            tags,
            cube,
            seed,
            c_hom: default_c_hom(cube.dim()),
            c_vol: DEFAULT_C_VOL,
        }
    }

    pub fn with_constants(mut self, c_hom: u64, c_vol: u64) -> PointSet {
        self.c_hom = c_hom;
        self.c_vol = c_vol;
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn tags(&self) -> &[PointTag] {
        &self.tags
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn c_hom(&self) -> u64 {
        self.c_hom
    }

    pub fn c_vol(&self) -> u64 {
        self.c_vol
    }

    /// Depth of the finest dyadic cutting of this set's cube.
    pub fn dyadic_depth(&self) -> u32 {
        dyadic_depth(self.cube.side())
    }
}

fn is_prime(v: u64) -> bool {
    v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| v % d != 0)
}

/// Smallest odd prime `q > 2^I · a`, the common denominator of generated
/// offsets. Every coordinate carries a factor `q` in its denominator, so no
/// coordinate lies on a grid line of a cutting with `t <= 2^I`.
pub fn boundary_prime(side: u64) -> u64 {
    let bound = (1u64 << dyadic_depth(side)) * side;
    (bound + 1..).find(|&v| v % 2 == 1 && is_prime(v)).unwrap()
}

/// Checks that no coordinate lies on a cell boundary of any cutting with
/// resolution `t <= max_t`; returns the first offending `(point, axis)`.
pub fn first_boundary_hit(ps: &PointSet, max_t: u64) -> Option<(usize, usize)> {
    let a = ExactScalar::from(ps.cube.side());
    for (i, p) in ps.points.iter().enumerate() {
        for (axis, x) in p.coords().iter().enumerate() {
            // x·t/a is an integer for some t <= max_t iff den(x/a) <= max_t.
            if (x / &a).denom() <= BigInt::from(max_t) {
                return Some((i, axis));
            }
        }
    }
    None
}

fn jitter(rng: &mut ChaCha8Rng, q: u64) -> i64 {
    rng.random_range(q.div_ceil(4)..=3 * q / 4) as i64
}

/// One point in each of `count` unit cells of `[0,a]^n`, each inside the
/// middle half of its cell with offsets of denominator `q`.
fn lattice_points(cube: Cube, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let a = cube.side();
    let n = cube.dim();
    let total = (a as usize).pow(n as u32);
    let q = boundary_prime(a);
    let mut cells: Vec<usize> = sample(rng, total, count).into_vec();
    cells.sort_unstable();
    cells
        .into_iter()
        .map(|mut c| {
            let mut corner = vec![0u64; n];
            for slot in corner.iter_mut().rev() {
                *slot = (c % a as usize) as u64;
                c /= a as usize;
            }
            Point::new(
                corner
                    .iter()
                    .map(|&k| ExactScalar::ratio(k as i64 * q as i64 + jitter(rng, q), q as i64))
                    .collect(),
            )
        })
        .collect()
}

/// `N` points, one per unit cell of `[0,a]^n` with `a = ceil(N^{1/n})`.
pub fn perturbed_lattice(n: usize, count: usize, seed: u64) -> Result<PointSet, PointGenError> {
    if count == 0 || n == 0 {
        return Err(PointGenError::InvalidParameter("need n >= 1 and N >= 1".into()));
    }
    let mut a = (count as f64).powf(1.0 / n as f64).ceil() as u64;
    while (a as u128).pow(n as u32) < count as u128 {
        a += 1;
    }
    while a > 1 && ((a - 1) as u128).pow(n as u32) >= count as u128 {
        a -= 1;
    }
    let cube = Cube::new(a, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = lattice_points(cube, count, &mut rng);
    let tags = vec![PointTag::Lattice; points.len()];
    Ok(PointSet::from_parts(points, tags, cube, seed))
}

/// The grid `{0,…,m−1}^n + δ` with `δ = 1/(2q)`, in the cube of side `m`.
pub fn integer_grid(m: u64, n: usize, seed: u64) -> Result<PointSet, PointGenError> {
    if m < 2 || n == 0 {
        return Err(PointGenError::InvalidParameter("need m >= 2 and n >= 1".into()));
    }
    let cube = Cube::new(m, n)?;
    let q = boundary_prime(m) as i64;
    let total = (m as usize).pow(n as u32);
    let points: Vec<Point> = (0..total)
        .map(|mut c| {
            let mut idx = vec![0i64; n];
            for slot in idx.iter_mut().rev() {
                *slot = (c % m as usize) as i64;
                c /= m as usize;
            }
            Point::new(idx.iter().map(|&i| ExactScalar::ratio(2 * q * i + 1, 2 * q)).collect())
        })
        .collect();
    let tags = vec![PointTag::Grid; points.len()];
    Ok(PointSet::from_parts(points, tags, cube, seed))
}

/// Random rational in `(lo, hi)` with a denominator carrying the prime `q`.
fn random_between(rng: &mut ChaCha8Rng, lo: &ExactScalar, hi: &ExactScalar, q: u64) -> ExactScalar {
    let u = rng.random_range(1..q) as i64;
    lo + &(&(hi - lo) * &ExactScalar::ratio(u, q as i64))
}

fn sample_on(f: &Flat, cube: Cube, q: u64, rng: &mut ChaCha8Rng) -> Option<Point> {
    let zero = ExactScalar::zero();
    let a = ExactScalar::from(cube.side());
    match f {
        Flat::Line(l) => {
            // Drive the coordinate along the dominant direction axis.
            let d = l.direction();
            let k = (0..d.len()).max_by_key(|&i| d[i].abs()).unwrap();
            let x = random_between(rng, &zero, &a, q);
            let s = &(&x - l.base().coord(k)) / &d[k];
            Some(l.point_at(&s))
        }
        Flat::Plane(p) => {
            let nrm = p.normal();
            let k = (0..3).max_by_key(|&i| nrm[i].abs()).unwrap();
            let mut coords: Vec<ExactScalar> = (0..3).map(|_| random_between(rng, &zero, &a, q)).collect();
            let rest: ExactScalar = (0..3).filter(|&i| i != k).map(|i| &nrm[i] * &coords[i]).sum();
            coords[k] = &(p.offset() - &rest) / &nrm[k];
            Some(Point::new(coords))
        }
        _ => {
            let k = f.param_count()?;
            let spread = ExactScalar::from_int(8);
            let params: Vec<ExactScalar> = (0..k).map(|_| random_between(rng, &-&spread, &spread, q)).collect();
            f.rational_point(&params)
        }
    }
}

/// `per_flat` points sampled on each member plus `background` lattice points,
/// all strictly inside the cube and off every grid with `t <= 2^I`.
pub fn points_on_flats(
    family: &FlatFamily,
    per_flat: usize,
    background: usize,
    cube: Cube,
    seed: u64,
) -> Result<PointSet, PointGenError> {
    if family.ambient_dim() != cube.dim() && !family.is_empty() {
        return Err(PointGenError::InvalidParameter("family and cube dimensions differ".into()));
    }
    for (i, f) in family.members().iter().enumerate() {
        let ok = matches!(f, Flat::Line(_) | Flat::Plane(_)) || f.param_count().is_some();
        if !ok {
            return Err(PointGenError::UnparametrizableFlat(i));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = boundary_prime(cube.side());
    let max_t = 1u64 << dyadic_depth(cube.side());
    let a = ExactScalar::from(cube.side());
    let safe = |p: &Point| {
        cube.contains_open(p)
            && p.coords().iter().all(|x| (x / &a).denom() > BigInt::from(max_t))
    };
    let mut points = Vec::new();
    let mut tags = Vec::new();
    let mut seen = HashSet::new();
    for (i, f) in family.members().iter().enumerate() {
        let mut placed = 0;
        let mut attempts = 0;
        while placed < per_flat {
            attempts += 1;
            if attempts > 1000 * per_flat.max(1) {
                return Err(PointGenError::SamplingFailed(i));
            }
            let Some(p) = sample_on(f, cube, q, &mut rng) else {
                return Err(PointGenError::UnparametrizableFlat(i));
            };
            if !safe(&p) {
                continue;
            }
            placed += 1;
            if seen.insert(p.clone()) {
                points.push(p);
                tags.push(PointTag::OnFlat(i));
            }
        }
    }
    let total = (cube.side() as usize).pow(cube.dim() as u32);
    if background > total {
        return Err(PointGenError::InvalidParameter(format!(
            "background {background} exceeds the {total} unit cells"
        )));
    }
    for p in lattice_points(cube, background, &mut rng) {
        if seen.insert(p.clone()) {
            points.push(p);
            tags.push(PointTag::Background);
        }
    }
    Ok(PointSet::from_parts(points, tags, cube, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    /// Largest number of points in one integer-aligned unit cube.
    pub max_unit_occupancy: usize,
    /// Bound for arbitrary (shifted) unit cubes: `2^n` times the aligned value.
    pub shifted_occupancy_bound: usize,
    /// `a^n / N`.
    pub volume_ratio: f64,
    pub c_hom: u64,
    pub c_vol: u64,
    pub pass: bool,
}

/// Aligned unit-cube occupancy and cube-volume checks.
pub fn homogeneity_check(ps: &PointSet) -> HomogeneityReport {
    let mut counts: HashMap<Vec<BigInt>, usize> = HashMap::new();
    for p in &ps.points {
        let key: Vec<BigInt> = p.coords().iter().map(ExactScalar::floor).collect();
        *counts.entry(key).or_default() += 1;
    }
    let max_unit_occupancy = counts.values().copied().max().unwrap_or(0);
    let n = ps.dim();
    let vol = (ps.cube.side() as f64).powi(n as i32);
    let volume_ratio = if ps.is_empty() { f64::INFINITY } else { vol / ps.len() as f64 };
    let pass = max_unit_occupancy as u64 <= ps.c_hom
        && volume_ratio >= 0.5
        && volume_ratio <= 2.0 * ps.c_vol as f64;
    HomogeneityReport {
        max_unit_occupancy,
        shifted_occupancy_bound: max_unit_occupancy << n,
        volume_ratio,
        c_hom: ps.c_hom,
        c_vol: ps.c_vol,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dyadic_cutting, make_cutting};
    use crate::flats::line_through;

    #[test]
    fn prime_denominators() {
        // a = 2: I = 2, 2^I·a = 8, next odd prime 11.
        assert_eq!(boundary_prime(2), 11);
        // a = 3: I = 3, 24 -> 29.
        assert_eq!(boundary_prime(3), 29);
    }

    #[test]
    fn lattice_examples() {
        let ps = perturbed_lattice(2, 4, 5).unwrap();
        assert_eq!(ps.cube().side(), 2);
        assert_eq!(ps.len(), 4);
        let cells: HashSet<Vec<BigInt>> = ps
            .points()
            .iter()
            .map(|p| p.coords().iter().map(ExactScalar::floor).collect())
            .collect();
        assert_eq!(cells.len(), 4);
        assert!(ps.points().iter().all(|p| ps.cube().contains_open(p)));

        let ps = perturbed_lattice(3, 27, 9).unwrap();
        assert_eq!(ps.cube().side(), 3);
        assert!(homogeneity_check(&ps).shifted_occupancy_bound <= 8);
        assert_eq!(perturbed_lattice(3, 27, 9).unwrap(), ps);
        assert_ne!(perturbed_lattice(3, 27, 10).unwrap(), ps);
    }

    #[test]
    fn generated_points_avoid_all_boundaries() {
        for ps in [
            perturbed_lattice(2, 30, 1).unwrap(),
            perturbed_lattice(3, 20, 2).unwrap(),
            integer_grid(5, 2, 0).unwrap(),
        ] {
            let i = ps.dyadic_depth();
            let max_t = 1u64 << i;
            assert_eq!(first_boundary_hit(&ps, max_t), None);
            for t in 1..=max_t {
                let c = make_cutting(ps.cube(), t).unwrap();
                assert!(ps.points().iter().all(|p| c.locate(p).is_ok()));
            }
            // Finest dyadic cells hold at most one lattice point.
            if ps.tags()[0] == PointTag::Lattice {
                let c = dyadic_cutting(ps.cube(), i).unwrap();
                let mut seen = HashSet::new();
                for p in ps.points() {
                    assert!(seen.insert(c.locate(p).unwrap()));
                }
            }
        }
    }

    #[test]
    fn grid_examples() {
        let g = integer_grid(3, 2, 0).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.cube().side(), 3);
        let g = integer_grid(10, 2, 0).unwrap().with_constants(4, DEFAULT_C_VOL);
        let rep = homogeneity_check(&g);
        assert!(rep.pass);
        assert_eq!(rep.max_unit_occupancy, 1);
        let rep = homogeneity_check(&integer_grid(5, 2, 0).unwrap());
        assert_eq!(rep.volume_ratio, 1.0);
        assert!(rep.pass);
    }

    #[test]
    fn crowded_unit_cube_fails() {
        let pts: Vec<Point> = (1..=10).map(|k| Point::from_ratios(&[(k, 11), (k, 13)])).collect();
        let ps = PointSet::new(pts, Cube::new(3, 2).unwrap(), 0).unwrap().with_constants(4, 2);
        let rep = homogeneity_check(&ps);
        assert_eq!(rep.max_unit_occupancy, 10);
        assert!(!rep.pass);
    }

    #[test]
    fn points_on_flats_examples() {
        let cube = Cube::new(8, 2).unwrap();
        let l = line_through(&Point::from_ints(&[1, 1]), &Point::from_ints(&[2, 3])).unwrap();
        let fam = FlatFamily::new(vec![l.clone()], 2).unwrap();
        let ps = points_on_flats(&fam, 5, 0, cube, 4).unwrap();
        assert_eq!(ps.len(), 5);
        assert!(ps.points().iter().all(|p| l.contains(p)));

        let m = line_through(&Point::from_ints(&[1, 3]), &Point::from_ints(&[3, 1])).unwrap();
        let fam = FlatFamily::new(vec![l, m], 2).unwrap();
        let ps = points_on_flats(&fam, 3, 0, cube, 4).unwrap();
        assert!(ps.len() <= 7);
        for (p, tag) in ps.points().iter().zip(ps.tags()) {
            if let PointTag::OnFlat(i) = tag {
                assert!(fam.members()[*i].contains(p));
            }
        }
        assert_eq!(first_boundary_hit(&ps, 1 << dyadic_depth(8)), None);

        let quartic = crate::algebra::Poly::from_terms(
            2,
            [(vec![4, 0], ExactScalar::one()), (vec![0, 4], ExactScalar::one()), (vec![0, 0], ExactScalar::from_int(-1))],
        );
        let fam = FlatFamily::new(vec![Flat::implicit(vec![quartic], 2, 1).unwrap()], 17).unwrap();
        assert_eq!(
            points_on_flats(&fam, 3, 0, cube, 0),
            Err(PointGenError::UnparametrizableFlat(0))
        );
    }
}
