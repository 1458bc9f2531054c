//! Acceptance gate: ten end-to-end checks, one test per criterion, each
//! printing a single summary line (visible with --nocapture) and holding
//! its wall-clock budget. Tolerances and schedules are pinned here as
//! constants; changing them is a deliberate act, not a tuning knob.

use std::time::{Duration, Instant};

use carpet_core::conditions::{
    check_h1, check_h2, check_h2_double_prime, check_h2_prime, horizontal_projection,
};
use carpet_core::dimension::{assouad_estimate, microset_dimension_gap, minkowski_estimate};
use carpet_core::fixtures;
use carpet_core::geometry::{hausdorff_distance, PointSet2D};
use carpet_core::ifs::{CarpetSpec, SscStatus};
use carpet_core::interval::RatIntervalUnion;
use carpet_core::rat::{rat, rat_int, to_f64, Rat};
use carpet_core::rect::RatPoint;
use carpet_core::regularity::{exact_projection, verify_slice_regularity, SampleGrid};
use carpet_core::scales::verify_littlethings;
use carpet_core::tangents::{
    depth_for_resolution, fit_product_form, rescale_window, verify_epspatterns, Window,
};
use carpet_core::word::{PeriodicWord, Word};

fn finish(criterion: u32, started: Instant, budget: Duration, detail: &str) {
    let dt = started.elapsed();
    assert!(
        dt <= budget,
        "criterion {criterion} took {dt:?}, budget {budget:?}"
    );
    println!("criterion {criterion:2}: PASS in {dt:.2?} [{detail}]");
}

/// Level pairs for the two-scale estimate, shared by criteria 7 and 8.
const ASSOUAD_PAIRS: [(u32, u32); 8] =
    [(3, 5), (4, 6), (5, 7), (6, 8), (7, 9), (3, 9), (5, 9), (3, 7)];

// ---------------------------------------------------------------------
// 1. Gap-projection fixture: vertical-line coverage fails with an exact
//    witness interval, the closure variant holds, and the projection
//    cover is exactly [0, 3/5] u [4/5, 1] at every depth.
// ---------------------------------------------------------------------

#[test]
fn criterion_01_gap_fixture_conditions_and_projection() {
    let t0 = Instant::now();
    let spec = fixtures::gap_projection_carpet();

    let h2 = check_h2(&spec);
    assert!(!h2.holds(), "vertical-line coverage must fail");
    assert!(!h2.witnesses.is_empty());
    for (lo, hi) in &h2.witnesses {
        assert!(lo < hi);
        assert!(*lo >= rat(3, 5) && *hi <= rat(4, 5), "witness [{lo}, {hi}] outside (3/5, 4/5)");
    }

    assert!(check_h2_double_prime(&spec).holds(), "closure coverage must hold");

    let expected: Vec<(Rat, Rat)> =
        vec![(rat_int(0), rat(3, 5)), (rat(4, 5), rat_int(1))];
    for depth in 1..=4 {
        let (outer, gaps) = horizontal_projection(&spec, depth);
        assert_eq!(outer.intervals(), expected.as_slice(), "outer cover at depth {depth}");
        assert_eq!(gaps.intervals(), &[(rat(3, 5), rat(4, 5))], "gap at depth {depth}");
    }

    finish(1, t0, Duration::from_secs(1), "witness in (3/5,4/5); projection [0,3/5]u[4/5,1]");
}

// ---------------------------------------------------------------------
// 2. Two-column fixture: all structural conditions hold and separation is
//    certified at depth 1 with the exact rational gap 1/20.
// ---------------------------------------------------------------------

#[test]
fn criterion_02_two_column_conditions_and_separation() {
    let t0 = Instant::now();
    let spec = fixtures::two_column_carpet();

    assert!(check_h1(&spec).holds());
    assert!(check_h2(&spec).holds());
    assert!(check_h2_prime(&spec, 2).holds());
    assert_eq!(
        spec.ssc(),
        &SscStatus::Certified { depth: 1, delta_lo: rat(1, 20) }
    );

    finish(2, t0, Duration::from_secs(1), "H1,H2,H2' hold; gap 1/20 at depth 1");
}

// ---------------------------------------------------------------------
// 3. Scale-index sandwich: 100 (word, t) samples with t spanning
//    [alpha_bar^8, alpha_bar^3]; every certified sample passes the
//    sandwich and both height bounds, and at least 95 are certified.
// ---------------------------------------------------------------------

fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut out = rat_int(1);
    for _ in 0..e {
        out *= r;
    }
    out
}

#[test]
fn criterion_03_scale_index_sandwich_and_height_bounds() {
    let t0 = Instant::now();
    let spec = fixtures::two_column_carpet();

    // Eight mantissa steps per alpha_bar octave over exponents 3..8 give
    // 40 exact scales inside (alpha_bar^8, alpha_bar^3].
    let mut ts: Vec<Rat> = Vec::new();
    for e in 3..8u32 {
        let base = rat_pow(spec.alpha_bar(), e);
        for m in 1..=8i64 {
            ts.push(&base * rat(8 + m, 16));
        }
    }
    ts.sort();
    ts.dedup();
    assert_eq!(ts.len(), 40);
    let words: Vec<PeriodicWord> = (1..=spec.n_maps())
        .map(|i| PeriodicWord::new(Word::new([]), Word::new([i])))
        .collect();
    let samples: Vec<(PeriodicWord, Rat)> = (0..100)
        .map(|s| (words[s % words.len()].clone(), ts[(s / words.len()) % ts.len()].clone()))
        .collect();

    let reports = verify_littlethings(&spec, &samples, 6).expect("certified separation");
    assert_eq!(reports.len(), 100);
    let certified: Vec<_> = reports
        .iter()
        .filter(|r| r.n_exact.certified_in_regime().is_some())
        .collect();
    assert!(certified.len() >= 95, "only {}/100 certified", certified.len());
    for r in &certified {
        assert!(r.pass, "sandwich or height bound failed at t = {}", r.t);
    }

    finish(
        3,
        t0,
        Duration::from_secs(30),
        &format!("{}/100 certified, all pass", certified.len()),
    );
}

// ---------------------------------------------------------------------
// 4. Slice regularity: 20 abscissae spread through the projection by
//    length, depth 8, scale window [alpha_bar^6, alpha_bar^2] * diam;
//    porosity and perfectness estimates stay inside the certified bounds
//    on every slice.
// ---------------------------------------------------------------------

/// The i-th abscissa sits at covered-length fraction (2i+1)/2n.
fn rat_centers(u: &RatIntervalUnion, n: usize) -> Vec<Rat> {
    let ivs = u.intervals();
    let total: Rat = ivs.iter().map(|(lo, hi)| hi - lo).sum();
    (0..n)
        .map(|i| {
            let mut target = &total * rat(2 * i as i64 + 1, 2 * n as i64);
            for (lo, hi) in ivs {
                let len = hi - lo;
                if target <= len {
                    return lo + target;
                }
                target -= len;
            }
            ivs.last().expect("nonempty").1.clone()
        })
        .collect()
}

#[test]
fn criterion_04_slice_porosity_and_perfectness() {
    let t0 = Instant::now();
    let spec = fixtures::two_column_carpet();
    let xs = rat_centers(&exact_projection(&spec).unwrap(), 20);
    assert_eq!(xs.len(), 20);

    // scale_range None takes [alpha_bar^(depth-2), alpha_bar^2] * diam,
    // which at depth 8 is the pinned window.
    let reports = verify_slice_regularity(&spec, &xs, 8, None, &SampleGrid::default()).unwrap();
    assert_eq!(reports.len(), 20);
    for r in &reports {
        assert!(
            r.pass,
            "slice at x = {} failed: porosity {} vs bound {}, perfectness {} vs bound {}",
            r.x, r.porosity_const, r.porosity_bound, r.perfectness_const, r.perfectness_bound
        );
        assert!(r.porosity_violations.is_empty());
        assert!(r.perfectness_violations.is_empty());
    }

    finish(4, t0, Duration::from_secs(60), "20/20 slices inside both bounds");
}

// ---------------------------------------------------------------------
// 5. Split-model refinement: ten windows whose center abscissa sits a
//    hair past a dyadic column edge, so exactly one ending line of level
//    n+3 crosses the window. At K = 2 the model cannot see the line; at
//    K = 3, 4 it splits there. Every run holds the certified bound and
//    the K = 4 residual is strictly below the K = 2 residual.
// ---------------------------------------------------------------------

/// Center x = 2^-11 + 2^-(11+r): prefix stuffing picks the column bits,
/// the mid symbol plants the level-11 edge, the cycle fixes the tail.
fn near_edge_word(stuff: usize, mid: usize, r: usize, cycle: usize) -> PeriodicWord {
    let mut p = vec![stuff; 10];
    p.push(mid);
    p.extend(std::iter::repeat(stuff).take(r));
    PeriodicWord::new(Word::new(p), Word::new([cycle]))
}

#[test]
fn criterion_05_split_model_bound_and_strict_refinement() {
    let t0 = Instant::now();
    let spec = fixtures::two_column_carpet();
    let t = rat(1, 500_000);
    let windows: [(usize, usize, usize, usize); 10] = [
        (1, 2, 8, 2),
        (1, 2, 9, 2),
        (1, 2, 10, 2),
        (1, 4, 8, 2),
        (1, 4, 9, 2),
        (3, 2, 8, 2),
        (3, 2, 9, 2),
        (1, 2, 8, 4),
        (1, 2, 9, 4),
        (3, 4, 8, 4),
    ];

    let mut max_ratio: f64 = 0.0;
    for &(stuff, mid, r, cycle) in &windows {
        let word = near_edge_word(stuff, mid, r, cycle);
        let mut residuals = Vec::new();
        for k in [2usize, 3, 4] {
            let rep = verify_epspatterns(&spec, &word, &t, k, 12).unwrap();
            assert!(
                rep.pass,
                "window {stuff}/{mid}/{r}/{cycle} at K = {k}: residual {} above {} + {}",
                rep.residual, rep.bound, rep.slack
            );
            residuals.push(rep.residual);
        }
        assert!(
            residuals[2] < residuals[0],
            "window {stuff}/{mid}/{r}/{cycle}: K4 residual {} not below K2 residual {}",
            residuals[2],
            residuals[0]
        );
        max_ratio = max_ratio.max(residuals[2] / residuals[0]);
    }

    finish(
        5,
        t0,
        Duration::from_secs(120),
        &format!("10 windows, K4/K2 residual ratio <= {max_ratio:.2}"),
    );
}

// ---------------------------------------------------------------------
// 6. Product-form trend on column-edge windows: centers pi(1^p 2^inf)
//    on the vertical line x = 2^-p, scales alpha_bar^s for the pinned
//    schedule. The fitted split-product residual decreases along the
//    schedule up to the stated sampling slack, and the two fitted
//    vertical sets at the finest scale are nonempty and disjoint.
// ---------------------------------------------------------------------

#[test]
fn criterion_06_product_form_trend_on_center_line() {
    let t0 = Instant::now();
    let spec = fixtures::two_column_carpet();
    let schedule: [(u32, u32); 4] = [(3, 3), (4, 3), (5, 3), (6, 4)];

    let mut runs = Vec::new();
    for (s, p) in schedule {
        let center = RatPoint::new(rat(1, 1 << p), rat(5, 16) * rat(1, 5i64.pow(p)));
        let t = rat(1, 1 << s);
        let window = Window::new(center, t.clone(), 1.0).unwrap();
        let depth = depth_for_resolution(&spec, to_f64(&t), 1.0);
        let cloud = rescale_window(&spec, &window, depth).unwrap();
        let fit = fit_product_form(&cloud).unwrap();
        let slack = fit.sample_pitch * std::f64::consts::SQRT_2 / 2.0 + cloud.resolution;
        runs.push((s, fit, slack));
    }

    for pair in runs.windows(2) {
        let (s0, f0, k0) = (&pair[0].0, &pair[0].1, pair[0].2);
        let (s1, f1, k1) = (&pair[1].0, &pair[1].1, pair[1].2);
        assert!(
            f1.residual <= f0.residual + k0 + k1,
            "residual rose past slack from s = {s0} ({}) to s = {s1} ({})",
            f0.residual,
            f1.residual
        );
    }

    let finest = &runs.last().unwrap().1;
    assert!(!finest.c_left.is_empty() && !finest.c_right.is_empty());
    for &(a, b) in finest.c_left.intervals() {
        for &(c, d) in finest.c_right.intervals() {
            assert!(b < c || d < a, "fitted sides overlap: [{a},{b}] vs [{c},{d}]");
        }
    }

    let first = runs.first().unwrap().1.residual;
    let last = finest.residual;
    finish(
        6,
        t0,
        Duration::from_secs(120),
        &format!("residual {first:.4} -> {last:.4}, finest split disjoint"),
    );
}

// ---------------------------------------------------------------------
// 7. Dimension orderings: lower box slope <= upper box slope <= two-scale
//    value + 0.05 on three fixtures, with the known values for the
//    segment (1) and the full square (2) inside pinned tolerances.
// ---------------------------------------------------------------------

#[test]
fn criterion_07_dimension_orderings_and_known_values() {
    let t0 = Instant::now();
    let cases: [(&str, CarpetSpec, Option<(f64, f64)>); 3] = [
        ("segment", fixtures::segment_carpet(), Some((1.0, 0.1))),
        ("square", fixtures::square_carpet(), Some((2.0, 0.05))),
        ("two-column", fixtures::two_column_carpet(), None),
    ];
    let mut details = Vec::new();
    for (name, spec, known) in &cases {
        let mink = minkowski_estimate(spec, 3..=9).unwrap();
        let assouad = assouad_estimate(spec, &ASSOUAD_PAIRS).unwrap();
        assert!(
            mink.lower_slope <= mink.upper_slope + 1e-12,
            "{name}: slope bracket inverted"
        );
        assert!(
            mink.upper_slope <= assouad.value + 0.05,
            "{name}: upper box slope {} above two-scale {} + 0.05",
            mink.upper_slope,
            assouad.value
        );
        if let Some((want, tol)) = known {
            assert!(
                (mink.value - want).abs() <= *tol,
                "{name}: box value {} not within {tol} of {want}",
                mink.value
            );
        }
        details.push(format!("{name} {:.3}", mink.value));
    }

    finish(7, t0, Duration::from_secs(120), &details.join(", "));
}

// ---------------------------------------------------------------------
// 8. Localized exponent: the deepened best-window count slope stays
//    within 0.1 of the two-scale estimate on both count-structured
//    fixtures. Search over window levels 3..7 with budget depth 6,
//    deepening the top 24 candidates to relative level 11.
// ---------------------------------------------------------------------

#[test]
fn criterion_08_microset_slope_meets_two_scale_estimate() {
    let t0 = Instant::now();
    let mut details = Vec::new();
    for (name, spec) in [
        ("two-column", fixtures::two_column_carpet()),
        ("cantor-product", fixtures::cantor_product()),
    ] {
        let gap = microset_dimension_gap(&spec, 3..=7, 6, 11, 24).unwrap();
        assert!(
            gap.gap <= 0.1,
            "{name}: two-scale {} exceeds microset slope {} by {}",
            gap.assouad_value,
            gap.microset_slope,
            gap.gap
        );
        details.push(format!("{name} gap {:.3}", gap.gap));
    }

    finish(8, t0, Duration::from_secs(300), &details.join(", "));
}

// ---------------------------------------------------------------------
// 9. Determinism: every subcommand rerun with identical inputs writes
//    byte-identical report files.
// ---------------------------------------------------------------------

#[test]
fn criterion_09_reruns_are_byte_identical() {
    let t0 = Instant::now();
    let runs: [(&str, &[&str]); 6] = [
        ("check", &["check", "--preset", "two-column"]),
        (
            "render",
            &["render", "--preset", "wide-gap", "--depth", "3", "--endings", "--projection"],
        ),
        ("slice", &["slice", "--preset", "two-column", "--depth", "7", "--slices", "5"]),
        (
            "tangent",
            &["tangent", "--preset", "two-column", "--windows", "2", "--k", "2", "--cert-depth", "12"],
        ),
        ("dim", &["dim", "--preset", "two-column", "--lo", "3", "--hi", "7"]),
        ("scales", &["scales", "--preset", "two-column", "--samples", "10", "--cert-depth", "5"]),
    ];
    for (name, args) in runs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_carpet-lab"))
                .args(args)
                .arg("--out")
                .arg(d.path())
                .output()
                .expect("binary runs");
            assert_eq!(
                out.status.code(),
                Some(0),
                "{name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        let mut names: Vec<String> = std::fs::read_dir(dirs[0].path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(!names.is_empty(), "{name} wrote nothing");
        for f in &names {
            let a = std::fs::read(dirs[0].path().join(f)).unwrap();
            let b = std::fs::read(dirs[1].path().join(f)).expect("second run wrote the same files");
            assert_eq!(a, b, "{name}: {f} differs between reruns");
        }
    }

    finish(9, t0, Duration::from_secs(300), "6 subcommands, all report files identical");
}

// ---------------------------------------------------------------------
// 10. Metric axioms, exactly: on dyadic-grid point sets every pairwise
//     squared distance, and hence the squared Hausdorff value, is an
//     exact integer over 4096. Symmetry and identity are checked on the
//     returned f64s; the triangle inequality is decided in integer
//     arithmetic (sqrt(z) <= sqrt(x) + sqrt(y) iff z <= x + y or
//     (z-x-y)^2 <= 4xy), and the library value must equal the correctly
//     rounded square root of the exact value bit for bit.
// ---------------------------------------------------------------------

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Squared Hausdorff distance times 4096, exactly, for grid points k/64.
fn hausdorff_sq_4096(a: &[(i64, i64)], b: &[(i64, i64)]) -> i64 {
    let directed = |from: &[(i64, i64)], to: &[(i64, i64)]| -> i64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p.0 - q.0).pow(2) + (p.1 - q.1).pow(2))
                    .min()
                    .unwrap()
            })
            .max()
            .unwrap()
    };
    directed(a, b).max(directed(b, a))
}

fn sqrt_triangle_holds(x: i64, y: i64, z: i64) -> bool {
    let excess = z - x - y;
    excess <= 0 || excess * excess <= 4 * x * y
}

#[test]
fn criterion_10_hausdorff_metric_axioms_exact() {
    let t0 = Instant::now();
    let mut state: u64 = 0x5EED_CA9E_2026_0816;
    let grid_set = |state: &mut u64| -> Vec<(i64, i64)> {
        let n = 3 + (splitmix64(state) % 10) as usize;
        (0..n)
            .map(|_| {
                let x = (splitmix64(state) % 129) as i64 - 64;
                let y = (splitmix64(state) % 129) as i64 - 64;
                (x, y)
            })
            .collect()
    };
    let to_f64_set =
        |g: &[(i64, i64)]| PointSet2D::new(g.iter().map(|&(x, y)| (x as f64 / 64.0, y as f64 / 64.0)).collect(), 0.0);

    for trial in 0..1000 {
        let ga = grid_set(&mut state);
        let gb = grid_set(&mut state);
        let gc = grid_set(&mut state);
        let (a, b, c) = (to_f64_set(&ga), to_f64_set(&gb), to_f64_set(&gc));

        let dab = hausdorff_distance(&a, &b).unwrap();
        let dba = hausdorff_distance(&b, &a).unwrap();
        let dbc = hausdorff_distance(&b, &c).unwrap();
        let dac = hausdorff_distance(&a, &c).unwrap();
        assert_eq!(dab.to_bits(), dba.to_bits(), "trial {trial}: symmetry");
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0, "trial {trial}: identity");

        let x = hausdorff_sq_4096(&ga, &gb);
        let y = hausdorff_sq_4096(&gb, &gc);
        let z = hausdorff_sq_4096(&ga, &gc);
        assert!(sqrt_triangle_holds(x, y, z), "trial {trial}: triangle x={x} y={y} z={z}");

        // The f64 path must agree with the exact value: squared distances
        // here are integers below 2^16, exact in f64, so the library
        // output is the correctly rounded root of the true value.
        for (d, s) in [(dab, x), (dbc, y), (dac, z)] {
            assert_eq!(d.to_bits(), (s as f64 / 4096.0).sqrt().to_bits(), "trial {trial}");
        }
    }

    finish(10, t0, Duration::from_secs(60), "1000 triples: symmetry, identity, exact triangle");
}
