use std::collections::HashSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use pseudoflat_core::exact::{dyadic_cutting, dyadic_depth, make_cutting, parent_cell, Cube, ExactScalar, Point};
use pseudoflat_core::flats::{intersect_surfaces, line_through, nonempty_cells, plane_through, Flat, Intersection};
use pseudoflat_core::incidence::{build_incidences_with, spanned_lines, spanned_lines_incidences, SizeHistogram};
use pseudoflat_core::pointgen::{integer_grid, perturbed_lattice};
use pseudoflat_core::prooflab::{binomial, good_tuples};
use pseudoflat_core::xplab::{
    certify_bound, fit_exponent, run_rich_scaling, ExperimentConfig, ExperimentReport, Scenario, TheoremTag,
};

const Q: i64 = 1009;
const SIDE: i64 = 4;

/// Coordinate in (0, SIDE) with denominator Q, never a multiple of SIDE/t
/// for any power of two t.
fn coord() -> impl Strategy<Value = ExactScalar> {
    (1..SIDE * Q)
        .prop_filter("off the integer lattice", |n| n % Q != 0)
        .prop_map(|n| ExactScalar::ratio(n, Q))
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), dim).prop_map(Point::new)
}

fn cube(dim: usize) -> Cube {
    Cube::new(SIDE as u64, dim).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn located_cell_contains_point_and_nests(p in (2usize..=3).prop_flat_map(point), level in 1u32..=5) {
        let dim = p.dim();
        let fine = dyadic_cutting(cube(dim), level).unwrap();
        let cell = fine.locate(&p).unwrap();
        for ((lo, hi), x) in fine.cell_bounds(&cell.index).iter().zip(p.coords()) {
            prop_assert!(lo < x && x < hi);
        }
        let coarse = dyadic_cutting(cube(dim), level - 1).unwrap();
        prop_assert_eq!(parent_cell(&cell).unwrap(), coarse.locate(&p).unwrap());
    }

    #[test]
    fn line_canonical_form_ignores_input_order(p in point(3), q in point(3)) {
        prop_assume!(p != q);
        let l = line_through(&p, &q).unwrap();
        prop_assert_eq!(&l, &line_through(&q, &p).unwrap());
        let two = ExactScalar::from_int(2);
        let r = Point::new(p.coords().iter().zip(q.coords()).map(|(a, b)| a + &(&two * &(b - a))).collect());
        prop_assert_eq!(&l, &line_through(&r, &p).unwrap());
    }

    #[test]
    fn plane_canonical_form_ignores_input_order(a in point(3), b in point(3), c in point(3)) {
        let Ok(s) = plane_through(&a, &b, &c) else { return Ok(()) };
        for (x, y, z) in [(&b, &a, &c), (&c, &b, &a), (&a, &c, &b), (&b, &c, &a), (&c, &a, &b)] {
            prop_assert_eq!(&s, &plane_through(x, y, z).unwrap());
        }
    }

    #[test]
    fn line_meets_at_most_nt_cells(dim in 2usize..=3, t in 1u64..=24, p in point(3), q in point(3)) {
        let (p, q) = (Point::new(p.coords()[..dim].to_vec()), Point::new(q.coords()[..dim].to_vec()));
        prop_assume!(p != q);
        let l = line_through(&p, &q).unwrap();
        let c = nonempty_cells(&l, &make_cutting(cube(dim), t).unwrap()).unwrap();
        prop_assert!(c.exact);
        prop_assert!(c.count <= dim as u128 * t as u128, "{} cells for t = {}", c.count, t);
    }

    #[test]
    fn plane_meets_at_most_3t2_cells(t in 1u64..=12, a in point(3), b in point(3), c in point(3)) {
        let Ok(s) = plane_through(&a, &b, &c) else { return Ok(()) };
        let n = nonempty_cells(&s, &make_cutting(cube(3), t).unwrap()).unwrap();
        prop_assert!(n.exact);
        prop_assert!(n.count <= 3 * (t as u128).pow(2));
    }

    #[test]
    fn plane_pair_curve_is_the_common_zero_set(
        pts in prop::collection::vec(point(3), 6),
        probe in point(3),
        s in -20i64..=20,
    ) {
        let (Ok(a), Ok(b)) = (plane_through(&pts[0], &pts[1], &pts[2]), plane_through(&pts[3], &pts[4], &pts[5])) else {
            return Ok(());
        };
        prop_assume!(a != b);
        let ab = intersect_surfaces(&a, &b).unwrap();
        prop_assert_eq!(&ab, &intersect_surfaces(&b, &a).unwrap());
        let Intersection::Curve(v) = ab else { return Ok(()) };
        prop_assert_eq!(v.contains(&probe), a.contains(&probe) && b.contains(&probe));
        let Flat::Line(l) = &v else { panic!("two planes meet in a line") };
        let on = l.point_at(&ExactScalar::ratio(s, 7));
        prop_assert!(a.contains(&on) && b.contains(&on));
    }

    #[test]
    fn perturbed_lattice_is_reproducible_and_separated(dim in 2usize..=3, count in 1usize..=60, seed in any::<u64>()) {
        let ps = perturbed_lattice(dim, count, seed).unwrap();
        prop_assert_eq!(&ps, &perturbed_lattice(dim, count, seed).unwrap());
        let depth = dyadic_depth(ps.cube().side());
        for t in 1..=1u64 << depth {
            let c = make_cutting(ps.cube(), t).unwrap();
            for p in ps.points() {
                prop_assert!(c.locate(p).is_ok(), "boundary hit at t = {}", t);
            }
        }
        let finest = dyadic_cutting(ps.cube(), depth).unwrap();
        let mut seen = HashSet::new();
        for p in ps.points() {
            prop_assert!(seen.insert(finest.locate(p).unwrap().index), "two points share a finest cell");
        }
    }

    #[test]
    fn incidences_do_not_depend_on_buckets(dim in 2usize..=3, count in 3usize..=50, seed in any::<u64>()) {
        let ps = perturbed_lattice(dim, count, seed).unwrap();
        let family = spanned_lines(&ps);
        let base = build_incidences_with(&ps, &family, 1).unwrap();
        for t in [4, 16] {
            prop_assert_eq!(&base, &build_incidences_with(&ps, &family, t).unwrap());
        }
        let sizes = SizeHistogram::from_sizes(base.point_ids().iter().map(Vec::len));
        prop_assert_eq!(base.total(), sizes.total_incidences());
        prop_assert_eq!(base.profile(), sizes.profile());
    }

    #[test]
    fn good_tuples_match_subset_enumeration(
        pts in prop::collection::vec(point(2), 1..30),
        t in 1u64..=6,
        r in 2usize..=3,
    ) {
        let cutting = make_cutting(cube(2), t).unwrap();
        let cells: Vec<Vec<u64>> = pts.iter().map(|p| cutting.locate(p).unwrap().index).collect();
        let n = pts.len();
        let mut brute = 0u128;
        for i in 0..n {
            for j in i + 1..n {
                if r == 2 {
                    brute += u128::from(cells[i] == cells[j]);
                    continue;
                }
                for k in j + 1..n {
                    brute += u128::from(cells[i] == cells[j] && cells[j] == cells[k]);
                }
            }
        }
        prop_assert_eq!(good_tuples(&pts, &cutting, r).unwrap().total, brute);
    }

    #[test]
    fn fit_recovers_power_law(slope in -4.0f64..-0.5, c in 1.0f64..1e6, len in 4usize..20) {
        let data: Vec<(f64, f64)> = (2..2 + len).map(|k| (k as f64, c * (k as f64).powf(slope))).collect();
        let fit = fit_exponent(&data).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 2.0 * fit.stderr + 1e-9, "{} vs {}", fit.slope, slope);
    }

    #[test]
    fn fit_error_is_bounded_by_noise(
        slope in -4.0f64..-0.5,
        noise in prop::collection::vec(-0.05f64..0.05, 8..20),
    ) {
        let data: Vec<(f64, f64)> = noise
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let k = (i + 2) as f64;
                (k, 100.0 * k.powf(slope) * e.exp())
            })
            .collect();
        let fit = fit_exponent(&data).unwrap();
        // OLS slope error is Σ (x_i − x̄) ε_i / Sxx with x = ln k.
        let xs: Vec<f64> = data.iter().map(|(k, _)| k.ln()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let cap = 0.05 * xs.iter().map(|x| (x - mean).abs()).sum::<f64>() / sxx;
        prop_assert!((fit.slope - slope).abs() <= cap + 1e-9);
    }
}

fn grid_lines_report() -> &'static ExperimentReport {
    static REPORT: OnceLock<ExperimentReport> = OnceLock::new();
    REPORT.get_or_init(|| run_rich_scaling(&ExperimentConfig::new(Scenario::GridLines, 2, vec![6, 9, 12, 16])).unwrap())
}

fn grid_planes_report() -> &'static ExperimentReport {
    static REPORT: OnceLock<ExperimentReport> = OnceLock::new();
    REPORT.get_or_init(|| run_rich_scaling(&ExperimentConfig::new(Scenario::GridPlanes, 3, vec![3, 4])).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn widening_the_window_never_lowers_the_constant(
        lo in 2usize..=8,
        width in 0usize..=8,
        grow_lo in 0usize..=2,
        grow_hi in 0usize..=8,
        planes in any::<bool>(),
    ) {
        let (report, tag, n) = if planes {
            (grid_planes_report(), TheoremTag::Planes, 3)
        } else {
            (grid_lines_report(), TheoremTag::Lines, 2)
        };
        let narrow = certify_bound(report, tag, 2, n, Some([lo, lo + width]), 2.0);
        let wide = certify_bound(report, tag, 2, n, Some([lo.saturating_sub(grow_lo).max(2), lo + width + grow_hi]), 2.0);
        prop_assert!(wide.constant >= narrow.constant);
        prop_assert_eq!(wide.exponent_theory, narrow.exponent_theory);
        prop_assert_eq!(wide.n_power, narrow.n_power);
        prop_assert_eq!(wide.polylog_power, narrow.polylog_power);
    }
}

#[test]
fn spanned_lines_have_no_duplicates_and_cover_every_pair() {
    for ps in [integer_grid(5, 2, 0).unwrap(), perturbed_lattice(3, 40, 2).unwrap()] {
        let is = spanned_lines_incidences(&ps).unwrap();
        let members = is.flats().members();
        let distinct: HashSet<&Flat> = members.iter().collect();
        assert_eq!(distinct.len(), members.len());
        let pts = ps.points();
        let mut covered = HashSet::new();
        for ids in is.point_ids() {
            for (a, &x) in ids.iter().enumerate() {
                for &y in &ids[a + 1..] {
                    assert!(covered.insert((x, y)), "pair ({x}, {y}) on two spanned lines");
                }
            }
        }
        assert_eq!(covered.len() as u128, binomial(pts.len() as u64, 2));
    }
}
