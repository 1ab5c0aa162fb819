//! CSV and SVG output. Identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::fit::{fit_exponent, k_series};
use super::{BoundCertificate, ExperimentReport, OutputPaths, XplabError};

/// Rows `scenario,N,M,k,rich_count,total_incidences,seed`, one per run and
/// threshold. An empty `k_values` means every k from 2 to the run's maximum.
pub fn profile_csv(report: &ExperimentReport, k_values: &[usize]) -> String {
    let mut out = String::from("scenario,N,M,k,rich_count,total_incidences,seed\n");
    for run in &report.runs {
        let ks: Vec<usize> = if k_values.is_empty() {
            (2..=run.max_rich()).collect()
        } else {
            k_values.to_vec()
        };
        for k in ks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                report.scenario.name(),
                run.n_points,
                run.flats(),
                k,
                run.rich(k),
                run.total_incidences(),
                report.seed
            );
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn certificate_csv(certs: &[BoundCertificate]) -> String {
    let mut out = String::from("theorem,r,n,exponent_theory,slope_fit,slope_stderr,C,verdict\n");
    for c in certs {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{},{},{:.6e},{}",
            c.theorem.label(),
            c.r,
            c.n,
            c.exponent_theory,
            opt(c.slope_fit),
            opt(c.slope_stderr),
            c.constant,
            c.verdict.as_str()
        );
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Log-log scatter of `R(k)` against k for every run, with the fitted line
/// of the largest run.
pub fn svg_plot(report: &ExperimentReport, cert: &BoundCertificate) -> String {
    let series: Vec<Vec<(f64, f64)>> = report
        .runs
        .iter()
        .map(|run| (2..=run.max_rich()).map(|k| (k as f64, run.rich(k) as f64)).filter(|p| p.1 > 0.0).collect())
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flatten().copied().collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="30" font-family="sans-serif" font-size="14">{} r={} n={}: R(k) vs k, theory slope -{:.2}</text>"#,
        cert.theorem.label(),
        cert.r,
        cert.n,
        cert.exponent_theory
    );
    if all.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let lx = |x: f64| x.ln();
    let (x0, x1) = all.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(lx(p.0)), b.max(lx(p.0))));
    let (y0, y1) = all.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(lx(p.1)), b.max(lx(p.1))));
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let px = |x: f64| MARGIN + (lx(x) - x0) / span(x0, x1) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (lx(y) - y0) / span(y0, y1) * (H - 2.0 * MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{MARGIN} {m} H{r} M{MARGIN} {m} V{MARGIN}" stroke="black" fill="none"/>"#,
        m = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">ln k</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" font-family="sans-serif" font-size="12">ln R</text>"#,
        H / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let shade = 40 + (160 * i / series.len().max(1));
        for &(x, y) in s {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="rgb({shade},{shade},200)"/>"#,
                px(x),
                py(y)
            );
        }
    }
    if let Some(last) = report.runs.last() {
        if let Ok(f) = fit_exponent(&k_series(last, cert.window)) {
            let (a, b) = (x0.exp(), x1.exp());
            let fy = |x: f64| (f.intercept + f.slope * x.ln()).exp();
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson"/>"#,
                px(a),
                py(fy(a)),
                px(b),
                py(fy(b))
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn write(path: &Path, contents: &str) -> Result<(), XplabError> {
    std::fs::write(path, contents).map_err(|source| XplabError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the profile CSV, the certificate CSV when there are certificates,
/// and one SVG per certificate when requested. Returns the written paths.
pub fn emit_outputs(
    report: &ExperimentReport,
    certs: &[BoundCertificate],
    k_values: &[usize],
    dir: &Path,
    paths: &OutputPaths,
) -> Result<Vec<PathBuf>, XplabError> {
    std::fs::create_dir_all(dir).map_err(|source| XplabError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let p = dir.join(&paths.profile_csv);
    write(&p, &profile_csv(report, k_values))?;
    written.push(p);
    if !certs.is_empty() {
        let p = dir.join(&paths.certificate_csv);
        write(&p, &certificate_csv(certs))?;
        written.push(p);
    }
    if paths.svg {
        for c in certs {
            let p = dir.join(format!("certificate_{}_r{}_k.svg", c.theorem.label(), c.r));
            write(&p, &svg_plot(report, c))?;
            written.push(p);
        }
    }
    Ok(written)
}
