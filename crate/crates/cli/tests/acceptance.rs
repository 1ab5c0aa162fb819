//! Acceptance suite. Run with
//! `cargo test -p pseudoflat-cli --test acceptance -- --nocapture`
//! to see one line per criterion.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pseudoflat_core::exact::{make_cutting, Cube, ExactScalar, Point};
use pseudoflat_core::flats::{
    check_type_r, intersection_cardinality, line_through, nonempty_cells, plane_through, Cardinality, Flat,
    FlatFamily,
};
use pseudoflat_core::incidence::{
    build_incidences, profile_csv, spanned_lines, spanned_planes, spanned_planes_incidences, IncidenceStructure,
    SizeHistogram,
};
use pseudoflat_core::pointgen::{integer_grid, perturbed_lattice, points_on_flats, PointSet};
use pseudoflat_core::prooflab::{
    admissible_triples, binomial, good_tuples, good_tuples_in_flat, index_lemma_check, pigeonhole_levels,
    select_level_l, theorem13_diagnostic, uniqueness_scan, ProofContext,
};
use pseudoflat_core::xplab::{
    certify_bound, fit_exponent, incidence_bound_check, k_series, run_rich_scaling, ExperimentConfig,
    ExperimentReport, Scenario, TheoremTag,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// R(k)·k³ ≤ (9/4)·N² on the grid sweep, checked as 4·R·k³ ≤ 9·N².
const C_GRID_NUM: u128 = 9;
const C_GRID_DEN: u128 = 4;
/// Largest observed ratio on the sweep is 0.8847 (m = 48, 64).
const C_INCIDENCE: f64 = 0.885;
/// Largest observed constant is 3.210e-4 (m = 4).
const C_PLANES: f64 = 3.22e-4;

const GRID_SIZES: [u64; 7] = [8, 12, 16, 24, 32, 48, 64];
const GRID_PLANE_SIZES: [u64; 4] = [4, 5, 6, 7];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

/// Lines spanned by the point set found by scanning every unprocessed pair
/// against the points. A pair (i, j) still unprocessed has no point before
/// i on its line, so the scan starts at i.
fn all_pairs_lines(ps: &PointSet) -> Vec<Vec<usize>> {
    let pts = ps.points();
    let n = pts.len();
    let mut done = vec![false; n * n];
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if done[i * n + j] {
                continue;
            }
            let l = line_through(&pts[i], &pts[j]).unwrap();
            let on: Vec<usize> = (i..n).filter(|&x| l.contains(&pts[x])).collect();
            for (a, &x) in on.iter().enumerate() {
                for &y in &on[a + 1..] {
                    done[x * n + y] = true;
                }
            }
            out.push(on);
        }
    }
    out.sort();
    out
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    let mut max_n = 0;
    for set in 0..30u64 {
        let dim = 2 + (set % 2) as usize;
        let count = rng.random_range(20..=200);
        let ps = perturbed_lattice(dim, count, 100 + set).unwrap();
        max_n = max_n.max(ps.len());
        let is = build_incidences(&ps, &spanned_lines(&ps)).unwrap();
        let oracle = all_pairs_lines(&ps);
        let oracle_profile = SizeHistogram::from_sizes(oracle.iter().map(Vec::len)).profile();
        let mut ours: Vec<Vec<usize>> = is.point_ids().to_vec();
        ours.sort();
        if profile_csv(&is.profile()) != profile_csv(&oracle_profile) || ours != oracle {
            mismatches.push(set);
        }
    }
    let t = start.elapsed();
    verdict(
        mismatches.is_empty() && within(t, 30),
        format!("30 sets, N <= {max_n}, mismatches {mismatches:?}, {:.1}s (< 30s)", t.as_secs_f64()),
    )
}

fn grid_sweep() -> (ExperimentReport, Duration) {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(Scenario::GridLines, 2, GRID_SIZES.to_vec());
    let report = run_rich_scaling(&cfg).unwrap();
    (report, start.elapsed())
}

fn criterion_2(report: &ExperimentReport, elapsed: Duration) -> Verdict {
    let mut problems = Vec::new();
    let mut worst = 0.0f64;
    let mut slopes = Vec::new();
    for run in &report.runs {
        let m = run.size as usize;
        let big_n = run.n_points as u128;
        if run.max_rich() > m {
            problems.push(format!("m={m}: max_rich {}", run.max_rich()));
        }
        for k in 3..=m {
            let rk = run.rich(k) as u128;
            let k3 = (k as u128).pow(3);
            worst = worst.max((rk * k3) as f64 / (big_n * big_n) as f64);
            if C_GRID_DEN * rk * k3 > C_GRID_NUM * big_n * big_n {
                problems.push(format!("m={m}, k={k}: R={rk}"));
            }
        }
        if m >= 32 {
            let fit = fit_exponent(&k_series(run, Some([3, m / 2]))).unwrap();
            slopes.push(format!("{m}:{:.3}", fit.slope));
            if fit.slope > -2.5 {
                problems.push(format!("m={m}: slope {:.3}", fit.slope));
            }
        }
    }
    let cert = certify_bound(report, TheoremTag::Lines, 2, 2, None, 2.0);
    if !cert.threshold_ok {
        problems.push(format!("threshold: c_thresh_min {:.3}", cert.c_thresh_min));
    }
    verdict(
        problems.is_empty() && within(elapsed, 120),
        format!(
            "max R·k³/N² = {worst:.4} (C = 9/4), slopes [{}], c_thresh_min {:.3}, {:.1}s (< 120s){}",
            slopes.join(" "),
            cert.c_thresh_min,
            elapsed.as_secs_f64(),
            if problems.is_empty() { String::new() } else { format!(", {problems:?}") }
        ),
    )
}

fn criterion_3(report: &ExperimentReport) -> Verdict {
    let check = incidence_bound_check(report, 2, 2);
    let exponents_ok = (check.alpha - 2.0 / 3.0).abs() < 1e-12 && (check.beta - 2.0 / 3.0).abs() < 1e-12;
    verdict(
        exponents_ok && check.ratios.iter().all(|&r| r <= C_INCIDENCE),
        format!("max ratio {:.4} (C_I = {C_INCIDENCE})", check.c_i),
    )
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    let coords: Vec<ExactScalar> = (0..dim)
        .map(|_| ExactScalar::ratio(rng.random_range(0..=997), 997))
        .collect();
    Point::new(coords)
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut lines: Vec<Flat> = Vec::new();
    for dim in [2, 3] {
        let mut made = 0;
        while made < 1000 {
            let (p, q) = (random_unit(&mut rng, dim), random_unit(&mut rng, dim));
            if let Ok(l) = line_through(&p, &q) {
                lines.push(l);
                made += 1;
            }
        }
    }
    let mut planes = Vec::new();
    while planes.len() < 500 {
        let (a, b, c) = (random_unit(&mut rng, 3), random_unit(&mut rng, 3), random_unit(&mut rng, 3));
        if let Ok(p) = plane_through(&a, &b, &c) {
            planes.push(p);
        }
    }
    let mut violations = 0;
    let mut checks = 0;
    for t in [4u64, 8, 16, 32] {
        for f in lines.iter().chain(&planes) {
            let dim = f.ambient_dim();
            let cutting = make_cutting(Cube::new(1, dim).unwrap(), t).unwrap();
            let cells = nonempty_cells(f, &cutting).unwrap();
            let cap = if f.flat_dim() == 1 { dim as u128 * t as u128 } else { 3 * (t as u128).pow(2) };
            checks += 1;
            if !cells.exact || cells.count > cap {
                violations += 1;
            }
        }
    }
    verdict(violations == 0, format!("{checks} flat/grid checks, {violations} violations"))
}

/// Common points of two distinct circles with integer centres and squared
/// radii, from the distance between centres alone.
fn circle_pair_oracle(c1: (i64, i64), r1: i64, c2: (i64, i64), r2: i64) -> usize {
    let d = (c1.0 - c2.0).pow(2) + (c1.1 - c2.1).pow(2);
    if d == 0 {
        return 0;
    }
    // d < (√r1 + √r2)² and d > (√r1 − √r2)², each compared through
    // u < 2√(r1 r2) ⇔ u < 0 or u² < 4 r1 r2.
    let cmp = |u: i64| {
        if u < 0 {
            std::cmp::Ordering::Less
        } else {
            (u * u).cmp(&(4 * r1 * r2))
        }
    };
    let outer = cmp(d - r1 - r2);
    let inner = cmp(r1 + r2 - d);
    use std::cmp::Ordering::*;
    match (outer, inner) {
        (Less, Less) => 2,
        (Equal, Less) | (Less, Equal) => 1,
        _ => 0,
    }
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut problems = Vec::new();
    let mut line_hits = [0usize; 2];
    let mut pairs = 0;
    while pairs < 500 {
        let mut pick = || Point::from_ints(&[rng.random_range(-4..=4), rng.random_range(-4..=4)]);
        let (a, b, c, d) = (pick(), pick(), pick(), pick());
        let (Ok(l1), Ok(l2)) = (line_through(&a, &b), line_through(&c, &d)) else { continue };
        if l1 == l2 {
            continue;
        }
        pairs += 1;
        match intersection_cardinality(&l1, &l2).unwrap() {
            Cardinality::Exact(c) if c <= 1 => line_hits[c] += 1,
            other => problems.push(format!("lines: {other:?}")),
        }
    }
    let mut circle_hits = [0usize; 3];
    let mut pairs = 0;
    while pairs < 500 {
        let mut pick = || {
            (
                (rng.random_range(-3..=3), rng.random_range(-3..=3)),
                rng.random_range(1..=10i64),
            )
        };
        let ((c1, r1), (c2, r2)) = (pick(), pick());
        if (c1, r1) == (c2, r2) {
            continue;
        }
        pairs += 1;
        let circle = |c: (i64, i64), r: i64| Flat::circle(Point::from_ints(&[c.0, c.1]), ExactScalar::from_int(r)).unwrap();
        let got = intersection_cardinality(&circle(c1, r1), &circle(c2, r2)).unwrap();
        let want = circle_pair_oracle(c1, r1, c2, r2);
        match got {
            Cardinality::Exact(c) if c == want && c <= 2 && c <= 4 => circle_hits[c] += 1,
            other => problems.push(format!("circles {c1:?},{r1} {c2:?},{r2}: {other:?}, oracle {want}")),
        }
    }
    let mut multiplicities = Vec::new();
    for m in [4u64, 8, 12, 16] {
        let family = spanned_lines(&integer_grid(m, 2, 0).unwrap());
        let rep = check_type_r(family.members(), 2, 400, m);
        multiplicities.push(format!("{m}:{}", rep.max_multiplicity));
        if rep.max_multiplicity != 1 || !rep.pass {
            problems.push(format!("grid {m}: multiplicity {}", rep.max_multiplicity));
        }
    }
    verdict(
        problems.is_empty(),
        format!(
            "line pairs meeting in 0/1 points {line_hits:?}, circle pairs in 0/1/2 {circle_hits:?}, \
             type-2 multiplicity by m [{}]{}",
            multiplicities.join(" "),
            if problems.is_empty() { String::new() } else { format!(", {problems:?}") }
        ),
    )
}

struct TupleInstance {
    name: String,
    ps: PointSet,
    is: IncidenceStructure,
    k: usize,
    r: usize,
}

fn tuple_instances() -> Vec<TupleInstance> {
    let mut out = Vec::new();
    for m in [6u64, 8, 10, 12, 14] {
        let ps = integer_grid(m, 2, 0).unwrap();
        let is = build_incidences(&ps, &spanned_lines(&ps)).unwrap();
        out.push(TupleInstance { name: format!("grid {m}"), ps, is, k: m as usize, r: 2 });
    }
    for (i, count) in [60usize, 90, 120, 150, 200].into_iter().enumerate() {
        let ps = perturbed_lattice(2, count, 60 + i as u64).unwrap();
        let is = build_incidences(&ps, &spanned_lines(&ps)).unwrap();
        out.push(TupleInstance { name: format!("lattice {count}"), ps, is, k: 3, r: 2 });
    }
    let cube = Cube::new(8, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..5u64 {
        let lines: BTreeSet<Flat> = (0..6)
            .map(|_| {
                // A prime denominator keeps axis-parallel lines off every grid.
                let base = Point::from_ratios(&[(rng.random_range(127..889), 127), (rng.random_range(127..889), 127)]);
                let dir = [ExactScalar::from_int(rng.random_range(-3..=3)), ExactScalar::from_int(rng.random_range(1..=3))];
                Flat::line(&base, &dir).unwrap()
            })
            .collect();
        let family = FlatFamily::new(lines.into_iter().collect(), 2).unwrap();
        let ps = points_on_flats(&family, 10, 20, cube, seed).unwrap();
        let is = build_incidences(&ps, &family).unwrap();
        out.push(TupleInstance { name: format!("planted lines {seed}"), ps, is, k: 8, r: 2 });
    }
    for seed in 0..5u64 {
        let circles: BTreeSet<Flat> = (0..4)
            .map(|_| {
                let centre = Point::from_ints(&[rng.random_range(3..=5), rng.random_range(3..=5)]);
                let radius = [1i64, 2, 3][rng.random_range(0..3)];
                Flat::circle(centre, ExactScalar::from_int(radius * radius)).unwrap()
            })
            .collect();
        let family = FlatFamily::new(circles.into_iter().collect(), 3).unwrap();
        let ps = points_on_flats(&family, 8, 15, cube, 50 + seed).unwrap();
        let is = build_incidences(&ps, &family).unwrap();
        out.push(TupleInstance { name: format!("planted circles {seed}"), ps, is, k: 6, r: 3 });
    }
    out
}

/// r-subsets of the points lying in one cell of the t-grid on the cube,
/// counted by enumerating every subset.
fn brute_good_tuples(ps: &PointSet, t: u64, r: usize) -> u128 {
    let side = ExactScalar::from_int(ps.cube().side() as i64);
    let scale = &ExactScalar::from_int(t as i64) / &side;
    let cells: Vec<Vec<String>> = ps
        .points()
        .iter()
        .map(|p| p.coords().iter().map(|x| (x * &scale).floor().to_string()).collect())
        .collect();
    let n = cells.len();
    let mut count = 0u128;
    let mut idx: Vec<usize> = (0..r).collect();
    if r > n {
        return 0;
    }
    loop {
        if idx.iter().all(|&i| cells[i] == cells[idx[0]]) {
            count += 1;
        }
        let Some(pos) = (0..r).rev().find(|&p| idx[p] < n - r + p) else { break };
        idx[pos] += 1;
        for q in pos + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
    count
}

fn criterion_6() -> Verdict {
    let instances = tuple_instances();
    let mut problems = Vec::new();
    for inst in &instances {
        let rep = theorem13_diagnostic(&inst.ps, &inst.is, inst.k, inst.r).unwrap();
        let cutting = make_cutting(inst.ps.cube(), rep.t).unwrap();
        let m = good_tuples(inst.ps.points(), &cutting, inst.r).unwrap().total;
        let per_cell: u128 = {
            let mut sizes: HashMap<u128, u64> = HashMap::new();
            for p in inst.ps.points() {
                *sizes.entry(cutting.cell_key(&cutting.locate(p).unwrap().index)).or_default() += 1;
            }
            sizes.values().map(|&c| binomial(c, inst.r as u64)).sum()
        };
        let brute = brute_good_tuples(&inst.ps, rep.t, inst.r);
        let rich = inst.is.rich_flats(inst.k).unwrap();
        let sum: u128 = rich
            .iter()
            .map(|&f| good_tuples_in_flat(inst.ps.points(), &cutting, &inst.is.flats().members()[f], inst.r).unwrap())
            .sum();
        let bound_holds = match rep.implied_bound {
            Some(b) => b >= rich.len() as u128,
            None => rich.is_empty(),
        };
        if m != per_cell || m != brute || m != rep.m_total || sum > m || sum != rep.sum_flat || !bound_holds {
            problems.push(format!(
                "{}: M={m} cells={per_cell} brute={brute} sum={sum} bound={:?} R={}",
                inst.name,
                rep.implied_bound,
                rich.len()
            ));
        }
    }
    verdict(
        problems.is_empty(),
        format!("{} instances{}", instances.len(), if problems.is_empty() { String::new() } else { format!(", {problems:?}") }),
    )
}

fn pencil_instance() -> (PointSet, IncidenceStructure) {
    let mut pts: Vec<Point> = (1..=5).map(|k| Point::from_ratios(&[(4 * k, 7), (1, 3), (1, 3)])).collect();
    pts.push(Point::from_ratios(&[(1, 3), (8, 3), (1, 3)]));
    pts.push(Point::from_ratios(&[(1, 3), (1, 3), (8, 3)]));
    let ps = PointSet::new(pts, Cube::new(4, 3).unwrap(), 0).unwrap();
    let is = build_incidences(&ps, &spanned_planes(&ps).unwrap()).unwrap();
    (ps, is)
}

fn criterion_7() -> Verdict {
    let mut instances = Vec::new();
    for count in [8usize, 27] {
        let ps = perturbed_lattice(3, count, 7).unwrap();
        let is = spanned_planes_incidences(&ps).unwrap();
        instances.push((format!("lattice {count}"), ps, is));
    }
    let (ps, is) = pencil_instance();
    instances.push(("pencil".to_string(), ps, is));

    let mut problems = Vec::new();
    let mut summary = Vec::new();
    let mut unique_cells = 0;
    for (name, ps, is) in &instances {
        let ctx = ProofContext::new(ps, is, 2).unwrap();
        let lemma = index_lemma_check(&ctx).unwrap();
        let table = pigeonhole_levels(&ctx, 3).unwrap();
        let sel = select_level_l(&ctx, &table);
        let adm = admissible_triples(&ctx, &table, &sel).unwrap();
        let uniq = uniqueness_scan(&ctx).unwrap();
        unique_cells += uniq.unique;
        let checks = [
            ("defining triple on every plane", lemma.rejected_flats.is_empty()),
            ("index lemma", lemma.pass),
            ("|S1| >= |S|/2I", table.pigeonhole_ok),
            ("level pigeonhole", sel.pigeonhole_ok),
            ("m 2^(l+1) >= k/4IL", sel.density_ok),
            ("M' >= |S2| m", adm.lower_bound_ok),
            ("unique cell curve", uniq.conflicting == 0),
        ];
        for (what, ok) in checks {
            if !ok {
                problems.push(format!("{name}: {what}"));
            }
        }
        summary.push(format!("{name}: {} planes, M'={} >= {}", ctx.family().len(), adm.m_prime, adm.lower_bound));
    }
    if unique_cells == 0 {
        problems.push("no aligned cell exercised".to_string());
    }
    verdict(
        problems.is_empty(),
        format!(
            "{}; {unique_cells} aligned cells with a unique curve{}",
            summary.join("; "),
            if problems.is_empty() { String::new() } else { format!(", {problems:?}") }
        ),
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(Scenario::GridPlanes, 3, GRID_PLANE_SIZES.to_vec());
    let report = run_rich_scaling(&cfg).unwrap();
    let cert = certify_bound(&report, TheoremTag::Planes, 2, 3, Some([4, 49]), 2.0);
    let elapsed = start.elapsed();
    let mut problems = Vec::new();
    for run in &report.runs {
        let m2 = (run.size * run.size) as usize;
        if run.max_rich() > m2 || run.rich(m2 + 1) != 0 {
            problems.push(format!("m={}: max_rich {}", run.size, run.max_rich()));
        }
    }
    if !cert.threshold_ok {
        problems.push("threshold".to_string());
    }
    if cert.constant > C_PLANES {
        problems.push(format!("constant {:.3e}", cert.constant));
    }
    verdict(
        problems.is_empty() && within(elapsed, 600),
        format!(
            "constant {:.3e} (frozen {C_PLANES:e}), c_thresh_min {:.3}, {:.1}s (< 600s){}",
            cert.constant,
            cert.c_thresh_min,
            elapsed.as_secs_f64(),
            if problems.is_empty() { String::new() } else { format!(", {problems:?}") }
        ),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "grid-lines.json",
            r#"{"scenario": "grid-lines", "sizes": [8, 12, 16, 24, 32, 48, 64],
                "certify": [{"theorem": "1.3", "r": 2}, {"theorem": "remark", "r": 2}]}"#,
        ),
        (
            "grid-planes.json",
            r#"{"scenario": "grid-planes", "n": 3, "sizes": [4, 5, 6, 7], "fit_window": [4, 49],
                "certify": [{"theorem": "1.5", "r": 2}]}"#,
        ),
        (
            "lattice-lines.json",
            r#"{"scenario": "lattice-lines", "sizes": [100, 200, 400], "seed": 3,
                "certify": [{"theorem": "1.3", "r": 2}]}"#,
        ),
    ];
    let mut problems = Vec::new();
    let mut compared = 0;
    for (name, json) in configs {
        let cfg = dir.path().join(name);
        std::fs::write(&cfg, json).unwrap();
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let out = dir.path().join(format!("{name}-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_pseudoflat"))
                .args(["run", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .args(["--threads", threads])
                .status()
                .unwrap();
            if status.code() != Some(0) {
                problems.push(format!("{name} --threads {threads}: exit {status}"));
            }
            outputs.push(csv_files(&out));
        }
        compared += outputs[0].len();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            problems.push(format!("{name}: CSVs differ"));
        }
    }
    verdict(
        problems.is_empty(),
        format!("{compared} CSV files identical across --threads 1 and 4{}", if problems.is_empty() { String::new() } else { format!(", {problems:?}") }),
    )
}

#[test]
fn acceptance() {
    let (report, sweep_time) = grid_sweep();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("oracle equivalence", Box::new(criterion_1)),
        ("grid sharpness", Box::new(|| criterion_2(&report, sweep_time))),
        ("incidence envelope", Box::new(|| criterion_3(&report))),
        ("rectifiability", Box::new(criterion_4)),
        ("type-r and intersection caps", Box::new(criterion_5)),
        ("good-tuple double count", Box::new(criterion_6)),
        ("index machinery", Box::new(criterion_7)),
        ("surface envelope", Box::new(criterion_8)),
        ("determinism", Box::new(criterion_9)),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!("[{}] {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
