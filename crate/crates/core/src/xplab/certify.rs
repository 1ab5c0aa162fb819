//! Bound certificates for rich-flat profiles and the incidence bound.

use serde::{Deserialize, Serialize};

use super::fit::{fit_exponent, k_series, window_of};
use super::{ExperimentReport, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    /// Pseudolines of type r in ℝⁿ.
    #[serde(rename = "1.3")]
    Lines,
    /// Pseudoplanes in ℝ³ with type-r intersection curves.
    #[serde(rename = "1.5")]
    Planes,
    /// Incidence count derived from the line bound.
    #[serde(rename = "remark")]
    Incidences,
}

impl TheoremTag {
    pub fn label(self) -> &'static str {
        match self {
            TheoremTag::Lines => "1.3",
            TheoremTag::Planes => "1.5",
            TheoremTag::Incidences => "remark",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub theorem: TheoremTag,
    pub r: usize,
    pub n: usize,
    /// Exponent of k in the bound.
    pub exponent_theory: f64,
    /// Exponent of N in the bound.
    pub n_power: f64,
    /// Exponent of `ln N ln k`; zero when there is no log factor.
    pub polylog_power: f64,
    pub slope_fit: Option<f64>,
    pub slope_stderr: Option<f64>,
    /// Largest `R(k) k^e / (N^p polylog)` over the window of every run.
    pub constant: f64,
    pub c_limit: Option<f64>,
    /// Exponent x in the threshold `k >= C_thresh N^x`.
    pub threshold_exponent: f64,
    pub c_thresh: f64,
    /// `max over runs of max_rich / N^x`; any larger C_thresh passes.
    pub c_thresh_min: f64,
    pub threshold_ok: bool,
    pub window: Option<[usize; 2]>,
    pub verdict: Verdict,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl BoundCertificate {
    /// Also fails the verdict when the constant exceeds `limit`.
    pub fn with_limit(mut self, limit: Option<f64>) -> BoundCertificate {
        self.c_limit = limit;
        self.verdict = Verdict::from_bool(self.verdict_holds());
        self
    }

    fn verdict_holds(&self) -> bool {
        self.threshold_ok && self.constant.is_finite() && self.c_limit.is_none_or(|l| self.constant <= l)
    }
}

/// `(e, p, q)` for `R(k) <= C N^p (ln N ln k)^q / k^e`.
fn exponents(tag: TheoremTag, r: usize, n: usize) -> (f64, f64, f64) {
    let r = r as f64;
    match tag {
        TheoremTag::Lines => (n as f64 * (r - 1.0) + 1.0, r, 0.0),
        TheoremTag::Planes => (1.5 * r + 1.0, r + 1.0, 1.5 * r + 2.0),
        TheoremTag::Incidences => {
            let (a, _) = incidence_exponents(r as usize, n);
            (a, 0.0, 0.0)
        }
    }
}

/// Certifies a sweep against the bound named by `tag`. The threshold part
/// is an exact statement about the profiles; the constant and slope are
/// floating-point summaries.
pub fn certify_bound(
    report: &ExperimentReport,
    tag: TheoremTag,
    r: usize,
    n: usize,
    window: Option<[usize; 2]>,
    c_thresh: f64,
) -> BoundCertificate {
    let (e, p, q) = exponents(tag, r, n);
    let mut cert = BoundCertificate {
        theorem: tag,
        r,
        n,
        exponent_theory: e,
        n_power: p,
        polylog_power: q,
        slope_fit: None,
        slope_stderr: None,
        constant: 0.0,
        c_limit: None,
        threshold_exponent: 0.0,
        c_thresh,
        c_thresh_min: 0.0,
        threshold_ok: true,
        window,
        verdict: Verdict::Pass,
        config_hash: report.config_hash.clone(),
        seed: report.seed,
        version: VERSION.to_string(),
    };
    if tag == TheoremTag::Incidences {
        let check = incidence_bound_check(report, r, n);
        cert.constant = check.c_i;
        cert.verdict = check.verdict;
        return cert;
    }
    let x = match tag {
        TheoremTag::Planes => 2.0 / 3.0,
        _ => 1.0 / n as f64,
    };
    cert.threshold_exponent = x;
    for run in &report.runs {
        let big_n = run.n_points as f64;
        let bound = c_thresh * big_n.powf(x);
        // R(k) = 0 for every integer k >= bound iff max_rich < bound.
        if run.max_rich() as f64 >= bound {
            cert.threshold_ok = false;
        }
        cert.c_thresh_min = cert.c_thresh_min.max(run.max_rich() as f64 / big_n.powf(x));
        let (lo, hi) = window_of(run, window);
        for k in lo.max(2)..=hi {
            let rk = run.rich(k);
            if rk == 0 {
                continue;
            }
            let kf = k as f64;
            let polylog = (big_n.ln() * kf.ln()).powf(q);
            cert.constant = cert.constant.max(rk as f64 * kf.powf(e) / (big_n.powf(p) * polylog));
        }
    }
    if let Some(last) = report.runs.last() {
        if let Ok(f) = fit_exponent(&k_series(last, window)) {
            cert.slope_fit = Some(f.slope);
            cert.slope_stderr = Some(f.stderr);
        }
    }
    cert.verdict = Verdict::from_bool(cert.verdict_holds());
    cert
}

/// `(α, β)` with `α = n(r-1)/(n(r-1)+1)` and `β = r/(n(r-1)+1)`.
pub fn incidence_exponents(r: usize, n: usize) -> (f64, f64) {
    let s = (n * (r - 1)) as f64;
    (s / (s + 1.0), r as f64 / (s + 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceCheck {
    pub alpha: f64,
    pub beta: f64,
    /// `total / (M^α N^β + M + N)` per run.
    pub ratios: Vec<f64>,
    pub c_i: f64,
    pub verdict: Verdict,
}

pub fn incidence_bound_check(report: &ExperimentReport, r: usize, n: usize) -> IncidenceCheck {
    let (alpha, beta) = incidence_exponents(r, n);
    let ratios: Vec<f64> = report
        .runs
        .iter()
        .map(|run| {
            let (m, big_n) = (run.flats() as f64, run.n_points as f64);
            run.total_incidences() as f64 / (m.powf(alpha) * big_n.powf(beta) + m + big_n)
        })
        .collect();
    let c_i = ratios.iter().copied().fold(0.0, f64::max);
    IncidenceCheck {
        alpha,
        beta,
        ratios,
        c_i,
        verdict: Verdict::from_bool(c_i.is_finite()),
    }
}
