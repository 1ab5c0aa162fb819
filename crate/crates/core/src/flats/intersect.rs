//! Pairwise intersections: surfaces to curves, curves to point counts.

use serde::{Deserialize, Serialize};

use crate::algebra::{resultant_in_y, solve_affine, AffineForm, AffineSolution, Poly, UPoly};
use crate::exact::{cross3, dot, primitive_direction, ExactScalar, Point};

use super::{line_line_point, Ball, Flat, FlatError, Implicit, Line, Plane};

/// Result of intersecting two distinct surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Intersection {
    Curve(Flat),
    Empty,
}

impl Intersection {
    pub fn curve(&self) -> Option<&Flat> {
        match self {
            Intersection::Curve(f) => Some(f),
            Intersection::Empty => None,
        }
    }
}

/// Number of common points of two curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cardinality {
    Exact(usize),
    Infinite,
    /// The kinds are outside the exact elimination route; only a lower
    /// bound is known.
    AtLeast(usize),
}

fn is_surface(f: &Flat) -> bool {
    f.ambient_dim() == 3 && f.flat_dim() == 2
}

/// Intersection curve of two distinct surfaces of ℝ³ in canonical form.
pub fn intersect_surfaces(s: &Flat, t: &Flat) -> Result<Intersection, FlatError> {
    if !is_surface(s) || !is_surface(t) {
        return Err(FlatError::NotASurface);
    }
    if s == t {
        return Err(FlatError::EqualSurfaces);
    }
    Ok(match (s, t) {
        (Flat::Plane(a), Flat::Plane(b)) => plane_plane(a, b),
        (Flat::Plane(p), Flat::Sphere(b)) | (Flat::Sphere(b), Flat::Plane(p)) => plane_sphere(p, b),
        (Flat::Sphere(a), Flat::Sphere(b)) => sphere_sphere(a, b)?,
        _ => {
            let mut eqs = s.equations();
            eqs.extend(t.equations());
            Intersection::Curve(Flat::Implicit(Implicit::new(eqs, 3, 1)?))
        }
    })
}

fn plane_plane(a: &Plane, b: &Plane) -> Intersection {
    let dir = cross3(a.normal(), b.normal());
    let Some(dir) = primitive_direction(&dir) else {
        // Parallel and distinct.
        return Intersection::Empty;
    };
    // Point with coordinate 0 on the first nonzero axis of the direction;
    // that axis carries the nonzero minor of the normals, so Cramer's rule
    // on the other two axes applies.
    let i0 = dir.iter().position(|x| !x.is_zero()).unwrap();
    let (j, k) = ((i0 + 1) % 3, (i0 + 2) % 3);
    let (na, nb) = (a.normal(), b.normal());
    let det = &(&na[j] * &nb[k]) - &(&na[k] * &nb[j]);
    let mut coords = vec![ExactScalar::zero(); 3];
    coords[j] = &(&(a.offset() * &nb[k]) - &(&na[k] * b.offset())) / &det;
    coords[k] = &(&(&na[j] * b.offset()) - &(a.offset() * &nb[j])) / &det;
    Intersection::Curve(Flat::Line(Line::from_primitive(&Point::new(coords), dir)))
}

/// Circle `plane ∩ sphere`, stored as the plane together with the sphere
/// centered in the plane that has the circle as its equator. This pair is
/// determined by the circle alone.
fn plane_sphere(p: &Plane, b: &Ball) -> Intersection {
    let n = p.normal();
    let nn = dot(n, n);
    let e = &dot(n, b.center().coords()) - p.offset();
    let dist_sq = &e.square() / &nn;
    if dist_sq > *b.radius_sq() {
        return Intersection::Empty;
    }
    let foot = b.center().offset(&-&(&e / &nn), n);
    let r_sq = b.radius_sq() - &dist_sq;
    let eqs = vec![Poly::linear(n, p.offset()), Poly::sphere(&foot, &r_sq)];
    Intersection::Curve(Flat::Implicit(
        Implicit::new(eqs, 3, 1).expect("nonzero equations"),
    ))
}

fn sphere_sphere(a: &Ball, b: &Ball) -> Result<Intersection, FlatError> {
    let ca = a.center().coords();
    let cb = b.center().coords();
    let normal: Vec<ExactScalar> = cb.iter().zip(ca).map(|(y, x)| &ExactScalar::from_int(2) * &(y - x)).collect();
    if normal.iter().all(ExactScalar::is_zero) {
        // Concentric and distinct.
        return Ok(Intersection::Empty);
    }
    // |x-ca|² - ra = |x-cb|² - rb  ⇔  2(cb-ca)·x = |cb|² - |ca|² + ra - rb
    let offset = &(&(&dot(cb, cb) - &dot(ca, ca)) + a.radius_sq()) - b.radius_sq();
    let radical = Plane::new(&normal, &offset)?;
    Ok(plane_sphere(&radical, a))
}

/// Number of common points of two curves (flat_dim 1) in the same space.
///
/// Lines, circles and implicit curves are handled by exact elimination:
/// linear equations are solved, the remaining ones are substituted, and
/// the residual system in at most two unknowns is resolved with univariate
/// gcds or resultants and Sturm counting.
pub fn intersection_cardinality(v: &Flat, w: &Flat) -> Result<Cardinality, FlatError> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(FlatError::DimensionMismatch {
            expected: v.ambient_dim(),
            found: w.ambient_dim(),
        });
    }
    if v == w {
        return Ok(Cardinality::Infinite);
    }
    if let (Flat::Line(a), Flat::Line(b)) = (v, w) {
        if a.direction() == b.direction() {
            return Ok(Cardinality::Exact(0));
        }
        return Ok(Cardinality::Exact(line_line_point(a, b).map_or(0, |_| 1)));
    }
    let mut eqs = v.equations();
    eqs.extend(w.equations());
    Ok(count_solutions(&eqs, v.ambient_dim()))
}

/// Number of real solutions of a polynomial system in `n` unknowns.
pub(crate) fn count_solutions(eqs: &[Poly], n: usize) -> Cardinality {
    let mut rows = Vec::new();
    let mut nonlinear = Vec::new();
    for e in eqs {
        match e.linear_parts() {
            Some((a, c)) => rows.push((a, -&c)),
            None => nonlinear.push(e),
        }
    }
    let (forms, free) = match solve_affine(&rows, n) {
        AffineSolution::Inconsistent => return Cardinality::Exact(0),
        AffineSolution::Solved { forms, free } => (forms, free),
    };
    let mut polys: Vec<Poly> = Vec::new();
    for e in nonlinear {
        let p = e.substitute_affine(&forms);
        if p.is_zero() {
            continue;
        }
        if p.is_constant() {
            return Cardinality::Exact(0);
        }
        let p = p.normalized();
        if !polys.contains(&p) {
            polys.push(p);
        }
    }
    if free == 0 {
        return Cardinality::Exact(1);
    }
    if polys.is_empty() {
        return Cardinality::Infinite;
    }
    match (free, polys.len()) {
        (1, _) => {
            let g = polys
                .iter()
                .map(Poly::to_upoly)
                .reduce(|a, b| a.gcd(&b))
                .unwrap();
            Cardinality::Exact(g.count_real_roots())
        }
        (2, 2) => planar_pair(&polys[0], &polys[1]),
        (2, 1) if takes_both_signs(&polys[0]) => Cardinality::Infinite,
        _ => Cardinality::AtLeast(0),
    }
}

/// A bivariate polynomial taking both signs vanishes on a curve, since a
/// finite set cannot separate the plane. Probes a fixed logarithmic grid.
fn takes_both_signs(p: &Poly) -> bool {
    let mut probes = vec![ExactScalar::zero()];
    for e in -6..=12 {
        let v = if e < 0 {
            ExactScalar::ratio(1, 1 << -e)
        } else {
            ExactScalar::from_int(1 << e)
        };
        probes.push(-&v);
        probes.push(v);
    }
    let (mut neg, mut pos) = (false, false);
    for x in &probes {
        for y in &probes {
            match p.eval(&[x.clone(), y.clone()]).signum() {
                -1 => neg = true,
                1 => pos = true,
                _ => {}
            }
            if neg && pos {
                return true;
            }
        }
    }
    false
}

/// Real common zeros of two bivariate polynomials.
///
/// After the shear `x = x' - λy` with a generic λ, distinct common zeros
/// have distinct `x'`, so the distinct real roots of `Res_y` count them.
/// A λ is generic once the squarefree part of the resultant has maximal
/// degree; at most `C(d1·d2, 2)` values of λ are not.
fn planar_pair(f: &Poly, g: &Poly) -> Cardinality {
    let bezout = (f.degree() * g.degree()) as usize;
    let needed = bezout * bezout.saturating_sub(1) / 2 + 1;
    let mut best: Option<(usize, UPoly)> = None;
    let mut tried = 0;
    let mut lambda = 0i64;
    while tried < needed {
        let l = ExactScalar::from_int(lambda);
        lambda += 1;
        let shear = [
            AffineForm {
                constant: ExactScalar::zero(),
                coeffs: vec![ExactScalar::one(), -&l],
            },
            AffineForm {
                constant: ExactScalar::zero(),
                coeffs: vec![ExactScalar::zero(), ExactScalar::one()],
            },
        ];
        let (fs, gs) = (
            f.substitute_affine(&shear).coeffs_in_last(),
            g.substitute_affine(&shear).coeffs_in_last(),
        );
        let monic_in_y =
            |c: &[UPoly]| c.last().is_some_and(|lc| lc.degree() == Some(0));
        if !monic_in_y(&fs) || !monic_in_y(&gs) {
            continue;
        }
        tried += 1;
        let r = resultant_in_y(&fs, &gs);
        if r.is_zero() {
            return Cardinality::Infinite;
        }
        let sq = r.squarefree();
        let deg = sq.degree().unwrap_or(0);
        if best.as_ref().is_none_or(|(d, _)| deg > *d) {
            best = Some((deg, sq));
        }
        if deg == bezout {
            break;
        }
    }
    let (_, sq) = best.expect("some shear is admissible");
    Cardinality::Exact(sq.count_real_roots())
}
