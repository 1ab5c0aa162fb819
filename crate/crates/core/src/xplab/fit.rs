//! Least squares on natural logs.

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, RunRecord, XplabError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    InK,
    InN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// `max y / x^slope` over the data.
    pub constant: f64,
    pub points: usize,
}

/// Fits `ln y = intercept + slope ln x` over the pairs with `y > 0`.
pub fn fit_exponent(data: &[(f64, f64)]) -> Result<Fit, XplabError> {
    let pts: Vec<(f64, f64)> = data
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(XplabError::InsufficientData { points: n });
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(XplabError::InsufficientData { points: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    let constant = data
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| y / x.powf(slope))
        .fold(0.0, f64::max);
    Ok(Fit {
        slope,
        stderr,
        intercept,
        constant,
        points: n,
    })
}

/// Default window `[3, max_rich / 2]`.
pub(crate) fn window_of(run: &RunRecord, window: Option<[usize; 2]>) -> (usize, usize) {
    match window {
        Some([lo, hi]) => (lo, hi),
        None => (3, run.max_rich() / 2),
    }
}

/// `(k, R(k))` for k in the window.
pub fn k_series(run: &RunRecord, window: Option<[usize; 2]>) -> Vec<(f64, f64)> {
    let (lo, hi) = window_of(run, window);
    (lo..=hi).map(|k| (k as f64, run.rich(k) as f64)).collect()
}

/// `(N, R(k))` across the runs of a sweep for a fixed k.
pub fn n_series(report: &ExperimentReport, k: usize) -> Vec<(f64, f64)> {
    report
        .runs
        .iter()
        .map(|r| (r.n_points as f64, r.rich(k) as f64))
        .collect()
}
