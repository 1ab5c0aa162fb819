//! Geometric object families (pseudolines and pseudoplanes) with exact
//! membership predicates.
//!
//! Every constructor returns a flat in canonical form, so two flats describing
//! the same set through the same kind of data compare equal bitwise:
//!
//! * lines store a primitive integer direction (first nonzero entry positive)
//!   and the unique base point whose coordinate along that first nonzero axis
//!   is zero;
//! * planes store a primitive integer normal, sign-normalized the same way,
//!   and the matching rational offset;
//! * circles and spheres store the center and the squared radius;
//! * implicit sets store their equations normalized to leading coefficient 1,
//!   deduplicated and sorted.

mod cells;
mod intersect;
mod typer;

use std::collections::HashSet;
use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::algebra::Poly;
use crate::exact::{cross3, dot, primitive_direction, ExactScalar, Point};

pub use cells::{meets_box, nonempty_cells, BoxTest, CellCount};
pub use intersect::{intersect_surfaces, intersection_cardinality, Cardinality, Intersection};
pub use typer::{check_type_r, rational_common_points, type_r_bound, TypeRReport, TypeRWitness};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlatError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the two points coincide")]
    CoincidentPoints,
    #[error("the three points are collinear")]
    CollinearPoints,
    #[error("zero direction or normal vector")]
    ZeroVector,
    #[error("squared radius must be positive")]
    NonPositiveRadius,
    #[error("{0} is not supported")]
    Unsupported(String),
    #[error("the two surfaces are equal")]
    EqualSurfaces,
    #[error("expected a 2-dimensional surface in 3-space")]
    NotASurface,
    #[error("implicit flat needs at least one nonzero equation")]
    NoEquations,
    #[error("family members must be distinct; member {0} repeats an earlier one")]
    DuplicateMember(usize),
    #[error("family members must share flat and ambient dimension (member {0} differs)")]
    MixedFamily(usize),
}

/// A line `{ base + s·direction }`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    base: Point,
    direction: Vec<ExactScalar>,
}

/// A plane `normal · x = offset` in ℝ³.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Plane {
    normal: Vec<ExactScalar>,
    offset: ExactScalar,
}

/// A circle (ℝ²) or sphere (ℝ³): `|x - center|² = radius_sq`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ball {
    center: Point,
    radius_sq: ExactScalar,
}

/// Common zero set of a list of polynomials.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implicit {
    equations: Vec<Poly>,
    ambient_dim: usize,
    flat_dim: usize,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flat {
    Line(Line),
    Plane(Plane),
    Circle(Ball),
    Sphere(Ball),
    Implicit(Implicit),
}

fn check_dim(expected: usize, found: usize) -> Result<(), FlatError> {
    if expected != found {
        return Err(FlatError::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn first_nonzero(v: &[ExactScalar]) -> usize {
    v.iter().position(|x| !x.is_zero()).expect("nonzero vector")
}

impl Line {
    /// Canonical line through `point` with direction `dir`.
    pub fn new(point: &Point, dir: &[ExactScalar]) -> Result<Line, FlatError> {
        check_dim(point.dim(), dir.len())?;
        let direction = primitive_direction(dir).ok_or(FlatError::ZeroVector)?;
        Ok(Line::from_primitive(point, direction))
    }

    /// `direction` must already be primitive and sign-normalized.
    pub(crate) fn from_primitive(point: &Point, direction: Vec<ExactScalar>) -> Line {
        let i0 = first_nonzero(&direction);
        let s = point.coord(i0) / &direction[i0];
        let base = point.offset(&-&s, &direction);
        Line { base, direction }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn direction(&self) -> &[ExactScalar] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        let i0 = first_nonzero(&self.direction);
        let s = p.coord(i0) / &self.direction[i0];
        p.coords()
            .iter()
            .zip(self.base.coords())
            .zip(&self.direction)
            .all(|((x, b), d)| *x == b + &(&s * d))
    }

    pub fn point_at(&self, s: &ExactScalar) -> Point {
        self.base.offset(s, &self.direction)
    }

    fn equations(&self) -> Vec<Poly> {
        let n = self.dim();
        let i0 = first_nonzero(&self.direction);
        let di = &self.direction[i0];
        (0..n)
            .filter(|&j| j != i0)
            .map(|j| {
                // d_i0 (x_j - b_j) - d_j (x_i0 - b_i0) = 0
                let mut a = vec![ExactScalar::zero(); n];
                a[j] = di.clone();
                a[i0] = -&self.direction[j];
                let c = &(di * self.base.coord(j)) - &(&self.direction[j] * self.base.coord(i0));
                Poly::linear(&a, &c)
            })
            .collect()
    }
}

impl Plane {
    /// Canonical plane `normal · x = offset`.
    pub fn new(normal: &[ExactScalar], offset: &ExactScalar) -> Result<Plane, FlatError> {
        check_dim(3, normal.len())?;
        let prim = primitive_direction(normal).ok_or(FlatError::ZeroVector)?;
        let i0 = first_nonzero(&prim);
        let scale = &prim[i0] / &normal[i0];
        Ok(Plane {
            offset: offset * &scale,
            normal: prim,
        })
    }

    pub fn through_point(normal: &[ExactScalar], p: &Point) -> Result<Plane, FlatError> {
        check_dim(3, p.dim())?;
        Plane::new(normal, &dot(normal, p.coords()))
    }

    pub fn normal(&self) -> &[ExactScalar] {
        &self.normal
    }

    pub fn offset(&self) -> &ExactScalar {
        &self.offset
    }

    pub fn contains(&self, p: &Point) -> bool {
        dot(&self.normal, p.coords()) == self.offset
    }

    fn equation(&self) -> Poly {
        Poly::linear(&self.normal, &self.offset)
    }

    /// A point on the plane and two independent integer vectors spanning it.
    pub fn frame(&self) -> (Point, [Vec<ExactScalar>; 2]) {
        let i0 = first_nonzero(&self.normal);
        let mut base = vec![ExactScalar::zero(); 3];
        base[i0] = &self.offset / &self.normal[i0];
        let axes: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let u = axes
            .iter()
            .map(|e| {
                let e: Vec<ExactScalar> = e.iter().map(|&v| ExactScalar::from_int(v)).collect();
                cross3(&self.normal, &e).to_vec()
            })
            .find(|v| v.iter().any(|x| !x.is_zero()))
            .expect("normal is nonzero");
        let v = cross3(&self.normal, &u).to_vec();
        (Point::new(base), [u, v])
    }
}

impl Ball {
    pub fn new(center: Point, radius_sq: ExactScalar) -> Result<Ball, FlatError> {
        if !radius_sq.is_positive() {
            return Err(FlatError::NonPositiveRadius);
        }
        Ok(Ball { center, radius_sq })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius_sq(&self) -> &ExactScalar {
        &self.radius_sq
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.squared_distance(p) == self.radius_sq
    }

    fn equation(&self) -> Poly {
        Poly::sphere(&self.center, &self.radius_sq)
    }

    /// Rational radius, when the squared radius is a rational square.
    pub fn rational_radius(&self) -> Option<ExactScalar> {
        let (n, d) = (self.radius_sq.numer(), self.radius_sq.denom());
        let (rn, rd) = (n.sqrt(), d.sqrt());
        (&rn * &rn == n && &rd * &rd == d).then(|| ExactScalar::from_big_parts(rn, rd))
    }
}

impl Implicit {
    pub fn new(
        equations: Vec<Poly>,
        ambient_dim: usize,
        flat_dim: usize,
    ) -> Result<Implicit, FlatError> {
        let mut eqs: Vec<Poly> = Vec::new();
        for e in equations {
            check_dim(ambient_dim, e.nvars())?;
            if e.is_zero() {
                continue;
            }
            let e = e.normalized();
            if !eqs.contains(&e) {
                eqs.push(e);
            }
        }
        if eqs.is_empty() {
            return Err(FlatError::NoEquations);
        }
        eqs.sort();
        Ok(Implicit {
            equations: eqs,
            ambient_dim,
            flat_dim,
        })
    }

    pub fn equations(&self) -> &[Poly] {
        &self.equations
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.equations.iter().all(|e| e.eval(p.coords()).is_zero())
    }
}

/// Canonical line through two distinct points.
pub fn line_through(p: &Point, q: &Point) -> Result<Flat, FlatError> {
    check_dim(p.dim(), q.dim())?;
    let dir = q.sub(p);
    let direction = primitive_direction(&dir).ok_or(FlatError::CoincidentPoints)?;
    Ok(Flat::Line(Line::from_primitive(p, direction)))
}

/// Canonical plane through three affinely independent points of ℝ³.
pub fn plane_through(p: &Point, q: &Point, s: &Point) -> Result<Flat, FlatError> {
    check_dim(3, p.dim())?;
    check_dim(3, q.dim())?;
    check_dim(3, s.dim())?;
    let n = cross3(&q.sub(p), &s.sub(p));
    let normal = primitive_direction(&n).ok_or(FlatError::CollinearPoints)?;
    let offset = dot(&normal, p.coords());
    Ok(Flat::Plane(Plane { normal, offset }))
}

impl Flat {
    pub fn circle(center: Point, radius_sq: ExactScalar) -> Result<Flat, FlatError> {
        check_dim(2, center.dim())?;
        Ok(Flat::Circle(Ball::new(center, radius_sq)?))
    }

    pub fn sphere(center: Point, radius_sq: ExactScalar) -> Result<Flat, FlatError> {
        check_dim(3, center.dim())?;
        Ok(Flat::Sphere(Ball::new(center, radius_sq)?))
    }

    pub fn plane(normal: &[ExactScalar], offset: &ExactScalar) -> Result<Flat, FlatError> {
        Ok(Flat::Plane(Plane::new(normal, offset)?))
    }

    pub fn line(point: &Point, dir: &[ExactScalar]) -> Result<Flat, FlatError> {
        Ok(Flat::Line(Line::new(point, dir)?))
    }

    pub fn implicit(equations: Vec<Poly>, ambient_dim: usize, flat_dim: usize) -> Result<Flat, FlatError> {
        Ok(Flat::Implicit(Implicit::new(equations, ambient_dim, flat_dim)?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Flat::Line(_) => "line",
            Flat::Plane(_) => "plane",
            Flat::Circle(_) => "circle",
            Flat::Sphere(_) => "sphere",
            Flat::Implicit(_) => "implicit",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Flat::Line(l) => l.dim(),
            Flat::Plane(_) | Flat::Sphere(_) => 3,
            Flat::Circle(_) => 2,
            Flat::Implicit(i) => i.ambient_dim,
        }
    }

    pub fn flat_dim(&self) -> usize {
        match self {
            Flat::Line(_) | Flat::Circle(_) => 1,
            Flat::Plane(_) | Flat::Sphere(_) => 2,
            Flat::Implicit(i) => i.flat_dim,
        }
    }

    /// Maximum degree of the defining equations.
    pub fn degree(&self) -> u32 {
        match self {
            Flat::Line(_) | Flat::Plane(_) => 1,
            Flat::Circle(_) | Flat::Sphere(_) => 2,
            Flat::Implicit(i) => i.equations.iter().map(Poly::degree).max().unwrap_or(1),
        }
    }

    /// Exact membership test.
    pub fn incident(&self, p: &Point) -> Result<bool, FlatError> {
        check_dim(self.ambient_dim(), p.dim())?;
        Ok(self.contains(p))
    }

    /// Membership without the dimension check.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Flat::Line(l) => l.contains(p),
            Flat::Plane(pl) => pl.contains(p),
            Flat::Circle(b) | Flat::Sphere(b) => b.contains(p),
            Flat::Implicit(i) => i.contains(p),
        }
    }

    /// Defining polynomial equations.
    pub fn equations(&self) -> Vec<Poly> {
        match self {
            Flat::Line(l) => l.equations(),
            Flat::Plane(p) => vec![p.equation()],
            Flat::Circle(b) | Flat::Sphere(b) => vec![b.equation()],
            Flat::Implicit(i) => i.equations.clone(),
        }
    }

    /// Number of rational parameters accepted by [`Flat::rational_point`],
    /// or `None` if no rational parametrization is available.
    pub fn param_count(&self) -> Option<usize> {
        match self {
            Flat::Line(_) => Some(1),
            Flat::Plane(_) => Some(2),
            Flat::Circle(b) => b.rational_radius().map(|_| 1),
            Flat::Sphere(b) => b.rational_radius().map(|_| 2),
            Flat::Implicit(_) => None,
        }
    }

    /// A rational point of the flat for the given parameters.
    pub fn rational_point(&self, params: &[ExactScalar]) -> Option<Point> {
        if Some(params.len()) != self.param_count() {
            return None;
        }
        match self {
            Flat::Line(l) => Some(l.point_at(&params[0])),
            Flat::Plane(p) => {
                let (base, [u, v]) = p.frame();
                Some(base.offset(&params[0], &u).offset(&params[1], &v))
            }
            Flat::Circle(b) => {
                let r = b.rational_radius()?;
                let u = &params[0];
                let one = ExactScalar::one();
                let den = &one + &u.square();
                let dir = [
                    &(&one - &u.square()) / &den,
                    &(&ExactScalar::from_int(2) * u) / &den,
                ];
                Some(b.center.offset(&r, &dir))
            }
            Flat::Sphere(b) => {
                let r = b.rational_radius()?;
                let (u, v) = (&params[0], &params[1]);
                let one = ExactScalar::one();
                let two = ExactScalar::from_int(2);
                let q = &u.square() + &v.square();
                let den = &one + &q;
                let dir = [&(&two * u) / &den, &(&two * v) / &den, &(&q - &one) / &den];
                Some(b.center.offset(&r, &dir))
            }
            Flat::Implicit(_) => None,
        }
    }

    /// One line of canonical coefficients, used by the flat-list export.
    pub fn canonical_text(&self) -> String {
        fn join(v: &[ExactScalar]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        }
        match self {
            Flat::Line(l) => format!("line {} ; {}", join(l.base.coords()), join(&l.direction)),
            Flat::Plane(p) => format!("plane {} ; {}", join(&p.normal), p.offset),
            Flat::Circle(b) => format!("circle {} ; {}", join(b.center.coords()), b.radius_sq),
            Flat::Sphere(b) => format!("sphere {} ; {}", join(b.center.coords()), b.radius_sq),
            Flat::Implicit(i) => {
                let eqs: Vec<String> = i
                    .equations
                    .iter()
                    .map(|e| {
                        e.terms()
                            .map(|(m, c)| {
                                let m: Vec<String> = m.iter().map(u32::to_string).collect();
                                format!("{c}*[{}]", m.join(","))
                            })
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                format!("implicit {} {} ; {}", i.ambient_dim, i.flat_dim, eqs.join(" ; "))
            }
        }
    }
}

impl fmt::Debug for Flat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flat::Line(l) => write!(f, "Line({:?} + s{:?})", l.base, l.direction),
            Flat::Plane(p) => write!(f, "Plane({:?}·x = {:?})", p.normal, p.offset),
            Flat::Circle(b) => write!(f, "Circle({:?}, r²={:?})", b.center, b.radius_sq),
            Flat::Sphere(b) => write!(f, "Sphere({:?}, r²={:?})", b.center, b.radius_sq),
            Flat::Implicit(i) => write!(f, "Implicit{:?}", i.equations),
        }
    }
}

/// A family of distinct flats sharing flat and ambient dimension, with its
/// declared type parameter `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatFamily {
    members: Vec<Flat>,
    r: usize,
    flat_dim: usize,
    ambient_dim: usize,
}

impl FlatFamily {
    pub fn new(members: Vec<Flat>, r: usize) -> Result<FlatFamily, FlatError> {
        let (flat_dim, ambient_dim) = members
            .first()
            .map_or((1, 2), |f| (f.flat_dim(), f.ambient_dim()));
        let mut seen = HashSet::with_capacity(members.len());
        for (i, m) in members.iter().enumerate() {
            if m.flat_dim() != flat_dim || m.ambient_dim() != ambient_dim {
                return Err(FlatError::MixedFamily(i));
            }
            if !seen.insert(m) {
                return Err(FlatError::DuplicateMember(i));
            }
        }
        Ok(FlatFamily {
            members,
            r,
            flat_dim,
            ambient_dim,
        })
    }

    /// An empty family of the given shape.
    pub fn empty(flat_dim: usize, ambient_dim: usize, r: usize) -> FlatFamily {
        FlatFamily {
            members: Vec::new(),
            r,
            flat_dim,
            ambient_dim,
        }
    }

    pub fn members(&self) -> &[Flat] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn flat_dim(&self) -> usize {
        self.flat_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Subfamily with the given member indices (kept in the given order).
    pub fn subfamily(&self, ids: &[usize]) -> FlatFamily {
        FlatFamily {
            members: ids.iter().map(|&i| self.members[i].clone()).collect(),
            r: self.r,
            flat_dim: self.flat_dim,
            ambient_dim: self.ambient_dim,
        }
    }
}

/// Exact common point of two lines, when they meet in exactly one point.
pub fn line_line_point(a: &Line, b: &Line) -> Option<Point> {
    if a.direction == b.direction || a.dim() != b.dim() {
        return None;
    }
    // a.base + s·da = b.base + u·db
    let n = a.dim();
    let rows: Vec<(Vec<ExactScalar>, ExactScalar)> = (0..n)
        .map(|i| {
            (
                vec![a.direction[i].clone(), -&b.direction[i]],
                b.base.coord(i) - a.base.coord(i),
            )
        })
        .collect();
    match crate::algebra::solve_affine(&rows, 2) {
        crate::algebra::AffineSolution::Solved { forms, free: 0 } => {
            Some(a.point_at(&forms[0].constant))
        }
        _ => None,
    }
}

/// Whether `x` is a rational square; used by samplers.
pub(crate) fn is_square(x: &ExactScalar) -> bool {
    if x.is_negative() {
        return false;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.abs().sqrt(), d.sqrt());
    &rn * &rn == n && &rd * &rd == d
}
