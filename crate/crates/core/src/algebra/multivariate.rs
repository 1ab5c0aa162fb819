//! Sparse multivariate polynomials with rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::exact::{ExactScalar, Point};

use super::UPoly;

/// Monomial exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, ExactScalar>,
}

/// `constant + Σ coeffs[k] * u_k`, an affine form in new variables `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    pub constant: ExactScalar,
    pub coeffs: Vec<ExactScalar>,
}

/// Closed rational interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: ExactScalar,
    pub hi: ExactScalar,
}

impl Interval {
    pub fn new(lo: ExactScalar, hi: ExactScalar) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: ExactScalar) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }

    fn scale(&self, s: &ExactScalar) -> Interval {
        let (a, b) = (&self.lo * s, &self.hi * s);
        if a <= b {
            Interval::new(a, b)
        } else {
            Interval::new(b, a)
        }
    }

    /// Tight range of `x^e` over the interval.
    fn pow(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(ExactScalar::one());
        }
        let (a, b) = (self.lo.pow(e), self.hi.pow(e));
        if e % 2 == 1 || !self.lo.is_negative() {
            Interval::new(a, b)
        } else if !self.hi.is_positive() {
            Interval::new(b, a)
        } else {
            Interval::new(ExactScalar::zero(), a.max(b))
        }
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: ExactScalar) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The polynomial `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(m, ExactScalar::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, ExactScalar)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    /// `Σ a_i x_i - c`
    pub fn linear(coeffs: &[ExactScalar], c: &ExactScalar) -> Self {
        let n = coeffs.len();
        let mut p = Poly::constant(n, -c);
        for (i, a) in coeffs.iter().enumerate() {
            let mut m = vec![0; n];
            m[i] = 1;
            p.add_term(m, a.clone());
        }
        p
    }

    /// `|x - center|^2 - radius_sq`
    pub fn sphere(center: &Point, radius_sq: &ExactScalar) -> Self {
        let n = center.dim();
        let mut p = Poly::constant(n, -radius_sq);
        for i in 0..n {
            let xi = Poly::var(n, i).sub(&Poly::constant(n, center.coord(i).clone()));
            p = p.add(&xi.mul(&xi));
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                let v = e.get() + &c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn constant_term(&self) -> ExactScalar {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_default()
    }

    /// Coefficients of a degree ≤ 1 polynomial: `(a, b)` with `p = a·x + b`.
    pub fn linear_parts(&self) -> Option<(Vec<ExactScalar>, ExactScalar)> {
        if self.degree() > 1 {
            return None;
        }
        let mut a = vec![ExactScalar::zero(); self.nvars];
        for (m, c) in &self.terms {
            if let Some(i) = m.iter().position(|&e| e == 1) {
                a[i] = c.clone();
            }
        }
        Some((a, self.constant_term()))
    }

    /// Leading term under graded lexicographic order.
    fn leading(&self) -> Option<(&Monomial, &ExactScalar)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| {
                let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
                da.cmp(&db).then_with(|| a.cmp(b))
            })
    }

    /// Scales so that the graded-lex leading coefficient is 1.
    pub fn normalized(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    pub fn scale(&self, s: &ExactScalar) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&ExactScalar::from_int(-1)))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        assert_eq!(self.nvars, o.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(self.nvars, ExactScalar::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[ExactScalar]) -> ExactScalar {
        assert_eq!(x.len(), self.nvars);
        let mut acc = ExactScalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(m) {
                if e > 0 {
                    t = &t * &xi.pow(e);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Conservative range over a box (natural interval extension).
    pub fn eval_interval(&self, bx: &[Interval]) -> Interval {
        assert_eq!(bx.len(), self.nvars);
        let mut acc = Interval::point(ExactScalar::zero());
        for (m, c) in &self.terms {
            let mut t = Interval::point(ExactScalar::one());
            for (iv, &e) in bx.iter().zip(m) {
                if e > 0 {
                    t = t.mul(&iv.pow(e));
                }
            }
            acc = acc.add(&t.scale(c));
        }
        acc
    }

    /// Substitutes `x_i = forms[i](u)`; the result is a polynomial in `u`.
    pub fn substitute_affine(&self, forms: &[AffineForm]) -> Poly {
        assert_eq!(forms.len(), self.nvars);
        let k = forms.first().map_or(0, |f| f.coeffs.len());
        let images: Vec<Poly> = forms
            .iter()
            .map(|f| {
                let mut p = Poly::constant(k, f.constant.clone());
                for (j, c) in f.coeffs.iter().enumerate() {
                    p = p.add(&Poly::var(k, j).scale(c));
                }
                p
            })
            .collect();
        let mut out = Poly::zero(k);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(k, c.clone());
            for (img, &e) in images.iter().zip(m) {
                if e > 0 {
                    t = t.mul(&img.pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Univariate view of a one-variable polynomial.
    pub fn to_upoly(&self) -> UPoly {
        assert_eq!(self.nvars, 1);
        let d = self.degree() as usize;
        let mut c = vec![ExactScalar::zero(); d + 1];
        for (m, v) in &self.terms {
            c[m[0] as usize] = v.clone();
        }
        UPoly::new(c)
    }

    /// Bivariate polynomial in `(x, y)` viewed in `ℚ[x][y]`: entry `k` is the
    /// coefficient of `y^k`.
    pub fn coeffs_in_last(&self) -> Vec<UPoly> {
        assert_eq!(self.nvars, 2);
        let dy = self.terms.keys().map(|m| m[1]).max().unwrap_or(0) as usize;
        let dx = self.terms.keys().map(|m| m[0]).max().unwrap_or(0) as usize;
        let mut grid = vec![vec![ExactScalar::zero(); dx + 1]; dy + 1];
        for (m, c) in &self.terms {
            grid[m[1] as usize][m[0] as usize] = c.clone();
        }
        grid.into_iter().map(UPoly::new).collect()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·x{i}")?,
                    _ => write!(f, "·x{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// Determinant of a square matrix over `ℚ[x]` by cofactor expansion.
fn det(m: &[Vec<UPoly>]) -> UPoly {
    let n = m.len();
    match n {
        0 => UPoly::constant(ExactScalar::one()),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = UPoly::zero();
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<UPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][col].mul(&det(&minor));
                acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Sylvester resultant of `f, g ∈ ℚ[x][y]` with respect to `y`.
pub fn resultant_in_y(f: &[UPoly], g: &[UPoly]) -> UPoly {
    let df = f.len() - 1;
    let dg = g.len() - 1;
    let size = df + dg;
    if size == 0 {
        return UPoly::constant(ExactScalar::one());
    }
    let mut m = vec![vec![UPoly::zero(); size]; size];
    for row in 0..dg {
        for (k, c) in f.iter().rev().enumerate() {
            m[row][row + k] = c.clone();
        }
    }
    for row in 0..df {
        for (k, c) in g.iter().rev().enumerate() {
            m[dg + row][row + k] = c.clone();
        }
    }
    det(&m)
}
