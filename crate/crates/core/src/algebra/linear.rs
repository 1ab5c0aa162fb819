//! Exact Gaussian elimination for affine systems `A x = b`.

use crate::exact::ExactScalar;

use super::AffineForm;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffineSolution {
    Inconsistent,
    /// `x_i = forms[i](u)` with `free` parameters `u`.
    Solved { forms: Vec<AffineForm>, free: usize },
}

/// Solves `rows[k].0 · x = rows[k].1` over ℚ in `n` unknowns and returns
/// the solution set as an affine parametrization.
pub fn solve_affine(rows: &[(Vec<ExactScalar>, ExactScalar)], n: usize) -> AffineSolution {
    let mut m: Vec<Vec<ExactScalar>> = rows
        .iter()
        .map(|(a, b)| {
            assert_eq!(a.len(), n);
            let mut r = a.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=n {
                    let d = &f * &m[row][c];
                    m[r][c] = &m[r][c] - &d;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    if m[row..].iter().any(|r| !r[n].is_zero()) {
        return AffineSolution::Inconsistent;
    }
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let k = free_cols.len();
    let mut forms: Vec<AffineForm> = (0..n)
        .map(|_| AffineForm {
            constant: ExactScalar::zero(),
            coeffs: vec![ExactScalar::zero(); k],
        })
        .collect();
    for (j, &c) in free_cols.iter().enumerate() {
        forms[c].coeffs[j] = ExactScalar::one();
    }
    for (r, &pc) in pivots.iter().enumerate() {
        forms[pc].constant = m[r][n].clone();
        for (j, &c) in free_cols.iter().enumerate() {
            forms[pc].coeffs[j] = -&m[r][c];
        }
    }
    AffineSolution::Solved { forms, free: k }
}
