//! Embedded oracle suite: small brute-force equivalences and invariant
//! checks, runnable from the command line.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{dyadic_cutting, make_cutting, Cube, ExactScalar, Point};
use crate::flats::{
    intersection_cardinality, line_through, nonempty_cells, Cardinality, Flat, FlatFamily, Line,
};
use crate::incidence::{build_incidences, spanned_lines, spanned_lines_incidences, spanned_planes_incidences};
use crate::pointgen::{homogeneity_check, integer_grid, perturbed_lattice};
use crate::prooflab::{good_tuples, index_lemma_check, ProofContext};
use crate::xplab::{run_rich_scaling, ExperimentConfig, Scenario};

/// Deliberate defects for exercising the suite itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// Skip the sign normalization of line directions.
    pub corrupt_canonical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub results: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let mark = if r.passed { "ok  " } else { "FAIL" };
            out.push_str(&format!("{mark} {}/{}", r.module, r.name));
            if !r.passed {
                out.push_str(&format!(": {}", r.detail));
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        out.push_str(&format!("{} checks, {} failed\n", self.results.len(), failed));
        out
    }
}

type CheckFn = fn(&Faults) -> Result<(), String>;

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("exact", "scalar-text-roundtrip", scalar_roundtrip),
    ("exact", "generated-points-avoid-boundaries", no_boundary_hits),
    ("flats", "line-canonical-form-unique", canonical_lines),
    ("flats", "line-cells-at-most-nt", line_cells),
    ("flats", "circle-pairs-share-at-most-two-points", circle_pairs),
    ("pointgen", "lattice-homogeneous", lattice_homogeneous),
    ("incidence", "profile-matches-all-pairs-scan", profile_vs_scan),
    ("prooflab", "good-pairs-match-brute-force", good_pairs),
    ("prooflab", "index-between-1-and-depth", index_lemma),
    ("xplab", "grid3-profile", grid3_profile),
];

/// Names of all checks as `module/name`.
pub fn check_names() -> Vec<String> {
    CHECKS.iter().map(|(m, n, _)| format!("{m}/{n}")).collect()
}

/// Runs every check whose `module/name` contains `filter`.
pub fn selftest(filter: Option<&str>, faults: &Faults) -> SelftestReport {
    let results = CHECKS
        .iter()
        .filter(|(m, n, _)| filter.is_none_or(|f| format!("{m}/{n}").contains(f)))
        .map(|&(module, name, f)| {
            let res = f(faults);
            CheckResult {
                module,
                name,
                passed: res.is_ok(),
                detail: res.err().unwrap_or_default(),
            }
        })
        .collect();
    SelftestReport { results }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scalar_roundtrip(_: &Faults) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = ExactScalar::ratio(rng.random_range(-10_000..10_000), rng.random_range(1..5000));
        let back: ExactScalar = x.to_string().parse().map_err(|e| format!("{x}: {e:?}"))?;
        ensure(back == x, || format!("{x} parsed back as {back}"))?;
    }
    Ok(())
}

fn no_boundary_hits(_: &Faults) -> Result<(), String> {
    let ps = perturbed_lattice(2, 50, 3).map_err(|e| e.to_string())?;
    for level in 0..=ps.dyadic_depth() {
        let c = dyadic_cutting(ps.cube(), level).map_err(|e| e.to_string())?;
        for p in ps.points() {
            c.locate(p).map_err(|e| format!("level {level}: {e}"))?;
        }
    }
    Ok(())
}

fn canonical_line(p: &Point, q: &Point, faults: &Faults) -> Flat {
    let l = line_through(p, q).expect("distinct points");
    if !faults.corrupt_canonical {
        return l;
    }
    let Flat::Line(line) = &l else { unreachable!() };
    // The faulty variant keeps the orientation of q - p.
    let raw: Vec<ExactScalar> = q.coords().iter().zip(p.coords()).map(|(a, b)| a - b).collect();
    if raw.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        let flipped: Vec<ExactScalar> = line.direction().iter().map(|x| -x).collect();
        Flat::Line(Line::from_primitive(line.base(), flipped))
    } else {
        l
    }
}

fn canonical_lines(faults: &Faults) -> Result<(), String> {
    let g = integer_grid(4, 2, 0).map_err(|e| e.to_string())?;
    let pts = g.points();
    let mut from_pairs: BTreeSet<Flat> = BTreeSet::new();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i != j {
                from_pairs.insert(canonical_line(&pts[i], &pts[j], faults));
            }
        }
    }
    let spanned = spanned_lines(&g).len();
    ensure(from_pairs.len() == spanned, || {
        format!("{} distinct canonical lines from ordered pairs, {spanned} spanned lines", from_pairs.len())
    })
}

fn random_line(rng: &mut ChaCha8Rng, n: usize) -> Flat {
    loop {
        let p = Point::new((0..n).map(|_| ExactScalar::ratio(rng.random_range(0..=97), 97)).collect());
        let d: Vec<ExactScalar> = (0..n).map(|_| ExactScalar::from_int(rng.random_range(-20..=20))).collect();
        if let Ok(l) = Flat::line(&p, &d) {
            return l;
        }
    }
}

fn line_cells(_: &Faults) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 3] {
        let cube = Cube::new(1, n).map_err(|e| e.to_string())?;
        for t in [4u64, 8] {
            let c = make_cutting(cube, t).map_err(|e| e.to_string())?;
            for _ in 0..40 {
                let l = random_line(&mut rng, n);
                let k = nonempty_cells(&l, &c).map_err(|e| e.to_string())?.count;
                ensure(k <= (n as u128) * t as u128, || format!("{} meets {k} cells at t={t}", l.canonical_text()))?;
            }
        }
    }
    Ok(())
}

fn circle_pairs(_: &Faults) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let mut c = || {
            Flat::circle(
                Point::from_ints(&[rng.random_range(-5..=5), rng.random_range(-5..=5)]),
                ExactScalar::from_int(rng.random_range(1..=30)),
            )
            .expect("positive radius")
        };
        let (a, b) = (c(), c());
        if a == b {
            continue;
        }
        match intersection_cardinality(&a, &b).map_err(|e| e.to_string())? {
            Cardinality::Exact(k) if k <= 2 => {}
            other => return Err(format!("{} and {}: {other:?}", a.canonical_text(), b.canonical_text())),
        }
    }
    Ok(())
}

fn lattice_homogeneous(_: &Faults) -> Result<(), String> {
    let rep = homogeneity_check(&perturbed_lattice(2, 100, 1).map_err(|e| e.to_string())?);
    ensure(rep.pass && rep.max_unit_occupancy <= 4, || format!("{rep:?}"))
}

fn profile_vs_scan(_: &Faults) -> Result<(), String> {
    let ps = perturbed_lattice(2, 30, 4).map_err(|e| e.to_string())?;
    let is = spanned_lines_incidences(&ps).map_err(|e| e.to_string())?;
    let fam: FlatFamily = is.flats().clone();
    let rebuilt = build_incidences(&ps, &fam).map_err(|e| e.to_string())?;
    let scan: Vec<usize> = fam
        .members()
        .iter()
        .map(|f| ps.points().iter().filter(|p| f.contains(p)).count())
        .collect();
    let got: Vec<usize> = rebuilt.point_ids().iter().map(Vec::len).collect();
    ensure(got == scan && is == rebuilt, || "incidence lists differ from the scan".into())
}

fn good_pairs(_: &Faults) -> Result<(), String> {
    let ps = perturbed_lattice(2, 40, 2).map_err(|e| e.to_string())?;
    let c = make_cutting(ps.cube(), 3).map_err(|e| e.to_string())?;
    let got = good_tuples(ps.points(), &c, 2).map_err(|e| e.to_string())?.total;
    let cells: Vec<_> = ps.points().iter().map(|p| c.locate(p).expect("interior")).collect();
    let mut brute = 0u128;
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            brute += u128::from(cells[i] == cells[j]);
        }
    }
    ensure(got == brute, || format!("good pairs {got}, brute force {brute}"))
}

fn index_lemma(_: &Faults) -> Result<(), String> {
    let ps = perturbed_lattice(3, 8, 1).map_err(|e| e.to_string())?;
    let is = spanned_planes_incidences(&ps).map_err(|e| e.to_string())?;
    let ctx = ProofContext::new(&ps, &is, 2).map_err(|e| e.to_string())?;
    let rep = index_lemma_check(&ctx).map_err(|e| e.to_string())?;
    ensure(rep.pass, || format!("{:?}", rep.violations))
}

fn grid3_profile(_: &Faults) -> Result<(), String> {
    let rep = run_rich_scaling(&ExperimentConfig::new(Scenario::GridLines, 2, vec![3])).map_err(|e| e.to_string())?;
    let run = &rep.runs[0];
    ensure(run.rich(2) == 20 && run.rich(3) == 8, || {
        format!("R(2) = {}, R(3) = {}", run.rich(2), run.rich(3))
    })
}
