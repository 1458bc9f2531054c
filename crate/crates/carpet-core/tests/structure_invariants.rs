//! Structural invariants across modules, checked on random systems:
//! projection covers nest with depth, the line-coverage conditions imply
//! their weaker forms, certified separation yields a positive gap,
//! rational interval unions stay normalized and measure-exact, scale
//! indices respect the scale order, and slice covers sharpen with depth.

mod common;

use carpet_core::conditions::{
    check_h2, check_h2_double_prime, check_h2_prime, horizontal_projection,
};
use carpet_core::geometry::PointSet2D;
use carpet_core::interval::RatIntervalUnion;
use carpet_core::rat::{rat, rat_int, to_f64, Rat};
use carpet_core::Error;
use carpet_core::regularity::{certified_slice, exact_projection};
use carpet_core::scales::{n_lower_star, n_of, n_star, NOfOutcome};
use carpet_core::tangents::miniset;
use carpet_core::word::{PeriodicWord, Word};
use carpet_core::fixtures;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

const SLICE_BUDGET: u64 = 5_000_000;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Deeper outer projection covers are subsets of shallower ones: the
    /// union at depth m + 1 refines the union at depth m.
    #[test]
    fn projection_covers_nest(spec in common::small_spec(), depth in 1usize..=3) {
        let (outer, _) = horizontal_projection(&spec, depth);
        let (finer, _) = horizontal_projection(&spec, depth + 1);
        for (lo, hi) in finer.intervals() {
            prop_assert!(
                outer.covers_interval(lo, hi),
                "depth {} interval [{}, {}] escapes the depth {} cover",
                depth + 1, to_f64(lo), to_f64(hi), depth
            );
        }
    }

    /// Two hull images over every abscissa forces full coverage, so the
    /// projection is the whole extent and the weaker conditions follow.
    #[test]
    fn two_cover_condition_implies_weaker_forms(spec in common::small_spec()) {
        if check_h2(&spec).holds() {
            prop_assert!(check_h2_prime(&spec, 2).holds());
            prop_assert!(check_h2_double_prime(&spec).holds());
        }
    }

    #[test]
    fn certified_separation_has_positive_gap(spec in common::small_spec()) {
        if spec.ssc_certified() {
            prop_assert!(*spec.delta_lo() > rat_int(0));
        }
    }

    /// A depth-invariant projection is a fixed point of the outer cover
    /// iteration, so it sits inside the depth-1 cover.
    #[test]
    fn invariant_projection_refines_first_cover(spec in common::small_spec()) {
        if let Ok(proj) = exact_projection(&spec) {
            let (outer, _) = horizontal_projection(&spec, 1);
            for (lo, hi) in proj.intervals() {
                prop_assert!(outer.covers_interval(lo, hi));
            }
        }
    }
}

fn rat_pairs() -> impl Strategy<Value = Vec<(Rat, Rat)>> {
    prop::collection::vec((0i64..=24, 1i64..=24), 0..=8).prop_map(|raw| {
        raw.into_iter()
            .map(|(a, len)| (rat(a, 24), rat(a + len.min(24 - a).max(1), 24)))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn interval_union_stays_normalized(pairs in rat_pairs()) {
        let union = RatIntervalUnion::new(pairs.clone());
        let ivs = union.intervals();
        for w in ivs.windows(2) {
            prop_assert!(w[0].1 < w[1].0, "pieces out of order or touching");
        }
        for (lo, hi) in ivs {
            prop_assert!(lo <= hi);
        }
        for (lo, hi) in &pairs {
            prop_assert!(union.covers_interval(lo, hi), "input interval lost");
        }
    }

    /// The union and its complement within a window partition the window:
    /// their rational lengths sum to the window length exactly.
    #[test]
    fn complement_measures_are_exact(pairs in rat_pairs()) {
        let union = RatIntervalUnion::new(pairs);
        let (w0, w1) = (rat_int(0), rat_int(1));
        let mut total = rat_int(0);
        for (lo, hi) in union.intervals() {
            let a = if *lo < w0 { &w0 } else { lo };
            let b = if *hi > w1 { &w1 } else { hi };
            if a < b {
                total += b - a;
            }
        }
        for (lo, hi) in union.complement_within(&w0, &w1) {
            total += &hi - &lo;
        }
        prop_assert_eq!(total, rat_int(1));
    }
}

fn scale() -> impl Strategy<Value = Rat> {
    // Dyadic scales inside [alpha_bar^8, alpha_bar^3] for the two-column
    // system, where the index regime is understood.
    (4i64..=128).prop_map(|k| rat(k, 1024))
}

fn periodic_word() -> impl Strategy<Value = PeriodicWord> {
    (
        prop::collection::vec(1usize..=4, 0..=2),
        prop::collection::vec(1usize..=4, 1..=3),
    )
        .prop_map(|(prefix, cycle)| PeriodicWord::new(Word::new(prefix), Word::new(cycle)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Smaller scales can only be resolved later along the same coding:
    /// the scale index is nonincreasing in t wherever it is certified.
    #[test]
    fn scale_index_is_monotone(w in periodic_word(), t1 in scale(), t2 in scale()) {
        let spec = fixtures::two_column_carpet();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = n_of(&spec, &w, &lo, 6).unwrap();
        let b = n_of(&spec, &w, &hi, 6).unwrap();
        if let (NOfOutcome::Certified { n: n_lo, .. }, NOfOutcome::Certified { n: n_hi, .. }) = (a, b) {
            prop_assert!(n_lo >= n_hi, "n({}) = {} < n({}) = {}", to_f64(&lo), n_lo, to_f64(&hi), n_hi);
        }
    }

    /// Certified in-regime indices land between the two closed-form
    /// envelopes derived from the contraction extrema and the gap.
    #[test]
    fn scale_index_respects_envelopes(w in periodic_word(), t in scale()) {
        let spec = fixtures::two_column_carpet();
        if let Some(n) = n_of(&spec, &w, &t, 6).unwrap().certified_in_regime() {
            // Scales at or above alpha_under * delta_lo have an empty lower
            // index set, so the lower envelope is vacuous there.
            let lower = match n_lower_star(&spec, &t) {
                Ok(v) => v,
                Err(Error::EmptyIndexSet) => 0,
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error: {e:?}"))),
            };
            let upper = n_star(&spec, &t).unwrap();
            prop_assert!(lower <= n && n <= upper,
                "n = {} outside [{}, {}] at t = {}", n, lower, upper, to_f64(&t));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Deeper slice covers are built from nested sub-rectangles, so the
    /// height error shrinks and the cover stays inside the previous one.
    #[test]
    fn slice_covers_sharpen_with_depth(j in 0i64..=64, depth in 5usize..=6) {
        let spec = fixtures::two_column_carpet();
        let proj = exact_projection(&spec).unwrap();
        let x = rat(j, 64);
        let coarse = certified_slice(&spec, &x, depth, &proj, None, SLICE_BUDGET).unwrap();
        let fine = certified_slice(&spec, &x, depth + 1, &proj, None, SLICE_BUDGET).unwrap();
        prop_assert!(fine.max_rect_height <= coarse.max_rect_height);
        prop_assert!(coarse.rect_count >= 1);
        for (lo, hi) in fine.union.intervals() {
            prop_assert!(coarse.union.covers_interval(lo, hi));
        }
    }
}

fn unit_cloud() -> impl Strategy<Value = PointSet2D> {
    prop::collection::vec((0i32..=64, 0i32..=64), 1..=10).prop_map(|pts| {
        let points: Vec<(f64, f64)> =
            pts.into_iter().map(|(x, y)| (x as f64 / 64.0, y as f64 / 64.0)).collect();
        PointSet2D::new(points, 1e-3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Expanding homotheties clip into the unit square and keep exactly
    /// the transformed input points that land there.
    #[test]
    fn miniset_clips_exactly(
        s in unit_cloud(),
        lambda in prop_oneof![Just(1.0f64), Just(1.5), Just(2.0), Just(4.0)],
        zx in -3i32..=0,
        zy in -3i32..=0,
    ) {
        let z = (zx as f64 / 2.0, zy as f64 / 2.0);
        let out = miniset(&s, lambda, z).unwrap();
        let mut expected: Vec<(f64, f64)> = s
            .points
            .iter()
            .map(|&(x, y)| (lambda * x + z.0, lambda * y + z.1))
            .filter(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y))
            .collect();
        let mut got = out.points.clone();
        expected.sort_by(|p, q| p.partial_cmp(q).unwrap());
        got.sort_by(|p, q| p.partial_cmp(q).unwrap());
        prop_assert_eq!(got, expected);
        prop_assert!((out.resolution - lambda * s.resolution).abs() < 1e-15);
    }
}
