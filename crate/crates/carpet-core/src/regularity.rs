//! Porosity and uniform-perfectness measurement for vertical slices.
//!
//! Both quantities are sampled on 1-D interval unions. When the union is a
//! certified slice cover (every cover point within the cover resolution of a
//! true slice point, and the cover contains the slice), the violation flags
//! are one-sided: a raised flag exhibits a sample where the true slice
//! provably breaks the stated constant, and discretization alone can never
//! raise one.

use rayon::prelude::*;

use crate::conditions::horizontal_projection;
use crate::error::{Error, Result};
use crate::geometry::SliceCover;
use crate::ifs::CarpetSpec;
use crate::interval::{IntervalUnion1D, RatIntervalUnion};
use crate::rat::{rat_int, to_f64, Rat};

/// Nodes a single slice traversal may visit before giving up.
const SLICE_NODE_BUDGET: u64 = 5_000_000;

/// Depth cap for the projection-invariance search.
const PROJECTION_INVARIANCE_CAP: usize = 4;

/// Sampling density for the estimators.
#[derive(Debug, Clone, Copy)]
pub struct SampleGrid {
    /// Centers drawn from the set, spread by cumulative length.
    pub centers: usize,
    /// Radii, geometrically spaced across the scale range.
    pub radii: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self { centers: 48, radii: 12 }
    }
}

/// Centers spread through the union by cumulative length, at fractions
/// (i + 1/2)/n of the total. Degenerate unions fall back to endpoints.
pub fn sample_centers(s: &IntervalUnion1D, n: usize) -> Vec<f64> {
    assert!(n > 0, "at least one center");
    let total = s.total_len();
    let ivs = s.intervals();
    if ivs.is_empty() {
        return Vec::new();
    }
    if total <= 0.0 {
        return (0..n).map(|i| ivs[i % ivs.len()].0).collect();
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut target = (i as f64 + 0.5) / n as f64 * total;
        let mut placed = ivs.last().expect("nonempty").1;
        for &(lo, hi) in ivs {
            let len = hi - lo;
            if target <= len {
                placed = lo + target;
                break;
            }
            target -= len;
        }
        out.push(placed);
    }
    out
}

/// Radii geometrically spaced over [r_min, r_max], endpoints included.
pub fn sample_radii(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    assert!(n > 0 && r_min > 0.0 && r_min <= r_max, "positive ordered range");
    if n == 1 {
        return vec![r_max];
    }
    let ratio = r_max / r_min;
    (0..n)
        .map(|i| r_min * ratio.powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Largest hole fraction at one sample: radius of the biggest open interval
/// inside (x-r, x+r) disjoint from the set, divided by r. The center lies in
/// the set, so the fraction never reaches 1.
fn hole_fraction(s: &IntervalUnion1D, x: f64, r: f64) -> f64 {
    s.largest_hole_in_window(x, r) / (2.0 * r)
}

/// Infimum of the hole fraction over explicit samples.
pub fn porosity_at(s: &IntervalUnion1D, centers: &[f64], radii: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for &x in centers {
        for &r in radii {
            best = best.min(hole_fraction(s, x, r));
        }
    }
    best
}

/// Smallest admissible annulus constant over explicit samples: for each
/// (x, r) where the set escapes the window, the distance to the farthest
/// in-window point forces D >= r/f. Samples the set never escapes impose
/// nothing. Returns 1 when no sample is constrained, infinity when a
/// constrained window holds only the center itself.
pub fn perfectness_at(s: &IntervalUnion1D, centers: &[f64], radii: &[f64]) -> f64 {
    let mut worst: f64 = 1.0;
    for &x in centers {
        for &r in radii {
            if !s.escapes_window(x, r) {
                continue;
            }
            let f = s.max_dist_within_window(x, r).unwrap_or(0.0);
            worst = worst.max(if f > 0.0 { r / f } else { f64::INFINITY });
        }
    }
    worst
}

fn check_scale_range(
    s: &IntervalUnion1D,
    resolution: f64,
    scale_range: (f64, f64),
) -> Result<()> {
    if s.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (r_min, r_max) = scale_range;
    assert!(r_min > 0.0 && r_min <= r_max, "positive ordered scale range");
    if r_min <= resolution {
        return Err(Error::ResolutionTooCoarse { requested: r_min, resolution });
    }
    Ok(())
}

/// Sampled porosity constant of `s` across the scale range. `resolution` is
/// the certified one-sided error of `s` as a cover; the smallest radius must
/// exceed it. The returned value is an infimum over samples, so it can only
/// overestimate the true constant of `s` itself.
pub fn porosity_estimate(
    s: &IntervalUnion1D,
    resolution: f64,
    scale_range: (f64, f64),
    grid: &SampleGrid,
) -> Result<f64> {
    check_scale_range(s, resolution, scale_range)?;
    let centers = sample_centers(s, grid.centers);
    let radii = sample_radii(scale_range.0, scale_range.1, grid.radii);
    Ok(porosity_at(s, &centers, &radii))
}

/// Sampled uniform-perfectness constant of `s` across the scale range; a
/// maximum over samples, so it can only underestimate the true constant.
pub fn uniform_perfectness_estimate(
    s: &IntervalUnion1D,
    resolution: f64,
    scale_range: (f64, f64),
    grid: &SampleGrid,
) -> Result<f64> {
    check_scale_range(s, resolution, scale_range)?;
    let centers = sample_centers(s, grid.centers);
    let radii = sample_radii(scale_range.0, scale_range.1, grid.radii);
    Ok(perfectness_at(s, &centers, &radii))
}

/// Per-slice regularity measurements against the separation-derived
/// constants.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub x: f64,
    /// Sampled infimum hole fraction.
    pub porosity_const: f64,
    /// Sampled maximum annulus constant.
    pub perfectness_const: f64,
    pub scale_range: (f64, f64),
    /// min{delta_lo, 1}/4: every window should hold a hole this large.
    pub porosity_bound: f64,
    /// delta_lo^-1 * alpha_under^-(k+1): no window should demand more.
    pub perfectness_bound: f64,
    /// k: smallest integer with alpha_bar^k < delta_lo.
    pub gap_exponent: u32,
    /// Samples (x, r) where the true slice provably breaks the porosity
    /// bound, resolution slack already accounted for.
    pub porosity_violations: Vec<(f64, f64)>,
    /// Samples (x, r) where the true slice provably breaks the perfectness
    /// bound.
    pub perfectness_violations: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Certified violation sweep on a two-sided slice cover with resolution `h`.
///
/// Porosity: a true hole of radius p around a true center within h of the
/// sampled one shrinks to a cover hole of radius at least p - 2h inside the
/// window enlarged by h. So a cover hole radius below bound*r - 2h in the
/// enlarged window certifies a true sample below the bound.
///
/// Perfectness: cover material beyond r + 2h certifies the true slice
/// escapes the matched true window. Cover material filling the annulus
/// [r/D - h, r + h] around the sampled center is then necessary for the true
/// annulus [r/D, r] to hold anything; its absence certifies a violation.
fn violation_sweep(
    s: &IntervalUnion1D,
    h: f64,
    centers: &[f64],
    radii: &[f64],
    porosity_bound: f64,
    perfectness_bound: f64,
) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut poro = Vec::new();
    let mut perf = Vec::new();
    for &x in centers {
        for &r in radii {
            let hole_radius = s.largest_hole_in_window(x, r + h) / 2.0;
            if hole_radius < porosity_bound * r - 2.0 * h {
                poro.push((x, r));
            }
            if s.escapes_window(x, r + 2.0 * h) {
                let f = s.max_dist_within_window(x, r + h).unwrap_or(0.0);
                if f < r / perfectness_bound - h {
                    perf.push((x, r));
                }
            }
        }
    }
    (poro, perf)
}

/// Report for one already-sliced union; exposed so corrupted covers can be
/// fed through the same sweep the real pipeline uses.
pub fn regularity_report_for_union(
    s: &IntervalUnion1D,
    resolution: f64,
    x: f64,
    scale_range: (f64, f64),
    grid: &SampleGrid,
    porosity_bound: f64,
    perfectness_bound: f64,
    gap_exponent: u32,
) -> Result<RegularityReport> {
    check_scale_range(s, resolution, scale_range)?;
    let centers = sample_centers(s, grid.centers);
    let radii = sample_radii(scale_range.0, scale_range.1, grid.radii);
    let porosity_const = porosity_at(s, &centers, &radii);
    let perfectness_const = perfectness_at(s, &centers, &radii);
    let (porosity_violations, perfectness_violations) = violation_sweep(
        s,
        resolution,
        &centers,
        &radii,
        porosity_bound,
        perfectness_bound,
    );
    let pass = porosity_violations.is_empty() && perfectness_violations.is_empty();
    Ok(RegularityReport {
        x,
        porosity_const,
        perfectness_const,
        scale_range,
        porosity_bound,
        perfectness_bound,
        gap_exponent,
        porosity_violations,
        perfectness_violations,
        pass,
    })
}

/// Exact horizontal projection, certified by depth invariance: the depth-m
/// outer union equals the depth-(m+1) one, so it is invariant under the
/// induced 1-D system and must be the projection itself.
pub fn exact_projection(spec: &CarpetSpec) -> Result<RatIntervalUnion> {
    let mut prev = horizontal_projection(spec, 1).0;
    for m in 2..=PROJECTION_INVARIANCE_CAP + 1 {
        let next = horizontal_projection(spec, m).0;
        if prev.intervals() == next.intervals() {
            return Ok(prev);
        }
        prev = next;
    }
    Err(Error::Undecidable {
        detail: format!(
            "projection not depth-invariant within depth {}; slice covers cannot be certified two-sided",
            PROJECTION_INVARIANCE_CAP
        ),
    })
}

/// Depth-m slice cover keeping only rectangles whose cylinder really meets
/// the line: x pulled back through the cylinder's horizontal part must land
/// in the exact projection. Every kept rectangle then contains a true slice
/// point, making the cover two-sided within its resolution.
pub fn certified_slice(
    spec: &CarpetSpec,
    x: &Rat,
    depth: usize,
    proj: &RatIntervalUnion,
    y_window: Option<(&Rat, &Rat)>,
    node_budget: u64,
) -> Result<SliceCover> {
    if !proj.contains(x) {
        return Err(Error::EmptyInput);
    }
    let q = spec.q();
    let mut intervals: Vec<(Rat, Rat)> = Vec::new();
    let mut max_height = rat_int(0);
    let mut count = 0usize;
    let mut visited = 0u64;
    let mut work: Vec<(crate::ifs::AffineMap2D, usize)> =
        vec![(crate::ifs::AffineMap2D::identity(), 0)];
    while let Some((map, d)) = work.pop() {
        visited += 1;
        if visited > node_budget {
            return Err(Error::DepthBudgetExceeded { needed: visited, budget: node_budget });
        }
        let rect = map.apply_rect(q);
        if *x < rect.x0 || *x > rect.x1 {
            continue;
        }
        if let Some((w0, w1)) = y_window {
            if rect.y1 < *w0 || rect.y0 > *w1 {
                continue;
            }
        }
        if d == depth {
            let x_local = (x - &map.b1) / &map.a1;
            if !proj.contains(&x_local) {
                continue;
            }
            if rect.height() > max_height {
                max_height = rect.height();
            }
            intervals.push((rect.y0, rect.y1));
            count += 1;
            continue;
        }
        for m in spec.maps() {
            work.push((map.after(m), d + 1));
        }
    }
    Ok(SliceCover {
        union: RatIntervalUnion::new(intervals),
        max_rect_height: max_height,
        rect_count: count,
    })
}

/// Separation-derived constants: hole bound min{delta_lo, 1}/4, annulus
/// bound delta_lo^-1 * alpha_under^-(k+1), k smallest with alpha_bar^k
/// below delta_lo. Computed with the certified lower gap, which only
/// weakens both bounds, keeping every comparison honest.
pub fn regularity_bounds(spec: &CarpetSpec) -> (f64, f64, u32) {
    let delta_lo = spec.delta_lo().clone();
    let one = rat_int(1);
    let clamped = if delta_lo < one { delta_lo.clone() } else { one };
    let porosity_bound = to_f64(&(clamped / rat_int(4)));
    let mut k = 0u32;
    let mut pow = rat_int(1);
    while pow >= delta_lo {
        pow *= spec.alpha_bar();
        k += 1;
    }
    let mut perf = rat_int(1) / &delta_lo;
    for _ in 0..=k {
        perf = perf / spec.alpha_under();
    }
    (porosity_bound, to_f64(&perf), k)
}

/// Default scale window [alpha_bar^(depth-2), alpha_bar^2] * diam(Q): above
/// the bottom cutoff the cover error is negligible against r, below the top
/// one window truncation stays mild.
pub fn default_scale_range(spec: &CarpetSpec, depth: usize) -> Result<(f64, f64)> {
    if depth < 5 {
        return Err(Error::ScaleOutOfRange {
            t: depth as f64,
            reason: "default scale window needs slice depth at least 5",
        });
    }
    let diam = spec.q_f64().diam();
    let ab = spec.alpha_bar_f64();
    Ok((ab.powi(depth as i32 - 2) * diam, ab * ab * diam))
}

/// Slice-by-slice regularity check at the given abscissae. Requires a
/// certified separation gap and a depth-invariant projection; each slice is
/// the filtered two-sided cover, so raised flags are genuine violations.
pub fn verify_slice_regularity(
    spec: &CarpetSpec,
    abscissae: &[Rat],
    depth: usize,
    scale_range: Option<(f64, f64)>,
    grid: &SampleGrid,
) -> Result<Vec<RegularityReport>> {
    if !spec.ssc_certified() {
        return Err(Error::Undecidable {
            detail: "separation gap not certified; regularity bounds need a positive lower gap"
                .into(),
        });
    }
    let proj = exact_projection(spec)?;
    let range = match scale_range {
        Some(r) => r,
        None => default_scale_range(spec, depth)?,
    };
    let (p_bound, d_bound, k) = regularity_bounds(spec);
    abscissae
        .par_iter()
        .map(|x| {
            let cover = certified_slice(spec, x, depth, &proj, None, SLICE_NODE_BUDGET)?;
            regularity_report_for_union(
                &cover.to_f64(),
                to_f64(&cover.max_rect_height),
                to_f64(x),
                range,
                grid,
                p_bound,
                d_bound,
                k,
            )
        })
        .collect()
}

/// One CSV row per slice.
pub fn regularity_csv(reports: &[RegularityReport]) -> String {
    let mut out =
        String::from("x,porosity_est,porosity_bound,perfectness_est,perfectness_bound,pass\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.x, r.porosity_const, r.porosity_bound, r.perfectness_const, r.perfectness_bound, r.pass,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::rat;

    #[test]
    fn solid_interval_has_no_holes_and_unit_annulus_constant() {
        let s = IntervalUnion1D::new(vec![(0.0, 1.0)]);
        let centers = sample_centers(&s, 16);
        let radii = sample_radii(0.01, 0.2, 6);
        assert_eq!(porosity_at(&s, &centers, &radii), 0.0);
        // Window edges re-derive r by subtraction, so allow roundoff.
        let d = perfectness_at(&s, &centers, &radii);
        assert!((d - 1.0).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn isolated_point_forces_unbounded_annulus_constant() {
        let s = IntervalUnion1D::new(vec![(0.0, 0.0), (1.0, 1.0)]);
        let d = perfectness_at(&s, &[0.0], &[0.5]);
        assert!(d.is_infinite(), "window holds only the center, got {d}");
        // The hole on either side of the center spans half the window.
        let p = porosity_at(&s, &[0.0], &[0.5]);
        assert!((p - 0.5).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn two_clump_union_reports_the_witnessing_constant() {
        let s = IntervalUnion1D::new(vec![(0.0, 0.0), (0.5, 1.0)]);
        // Escapes the window, farthest in-window material at the center.
        let d = perfectness_at(&s, &[0.0], &[0.4]);
        assert!(d.is_infinite(), "got {d}");
        // At r = 0.6 the far clump enters the window and tames the constant.
        let d = perfectness_at(&s, &[0.0], &[0.6]);
        assert!((d - 1.0).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn scale_range_below_resolution_is_rejected() {
        let s = IntervalUnion1D::new(vec![(0.0, 1.0)]);
        let err = porosity_estimate(&s, 0.05, (0.01, 0.2), &SampleGrid::default());
        assert!(matches!(err, Err(Error::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn projection_invariance_certifies_both_fixture_projections() {
        let spec = fixtures::two_column_carpet();
        let proj = exact_projection(&spec).unwrap();
        assert_eq!(proj.intervals(), &[(rat(0, 1), rat(1, 1))]);

        let spec = fixtures::gap_projection_carpet();
        let proj = exact_projection(&spec).unwrap();
        assert_eq!(
            proj.intervals(),
            &[(rat(0, 1), rat(3, 5)), (rat(4, 5), rat(1, 1))]
        );
    }

    #[test]
    fn certified_slice_rejects_abscissae_in_projection_gaps() {
        let spec = fixtures::gap_projection_carpet();
        let proj = exact_projection(&spec).unwrap();
        let err = certified_slice(&spec, &rat(7, 10), 4, &proj, None, 1 << 20);
        assert!(matches!(err, Err(Error::EmptyInput)));
    }

    #[test]
    fn certified_slice_matches_plain_slice_on_full_projection() {
        // With a gap-free projection the filter never fires.
        let spec = fixtures::two_column_carpet();
        let proj = exact_projection(&spec).unwrap();
        let a = certified_slice(&spec, &rat(1, 4), 5, &proj, None, 1 << 22).unwrap();
        let b = crate::geometry::vertical_slice_rat(&spec, &rat(1, 4), 5, None, 1 << 22).unwrap();
        assert_eq!(a.union.intervals(), b.union.intervals());
        assert_eq!(a.rect_count, b.rect_count);
    }

    #[test]
    fn separation_constants_for_the_two_column_carpet() {
        let spec = fixtures::two_column_carpet();
        let (p, d, k) = regularity_bounds(&spec);
        // delta_lo = 1/20: hole bound 1/80, k = 5, annulus bound 20 * 5^6.
        assert!((p - 0.0125).abs() < 1e-15);
        assert_eq!(k, 5);
        assert!((d - 312500.0).abs() < 1e-6);
    }

    #[test]
    fn two_column_slices_meet_both_bounds() {
        let spec = fixtures::two_column_carpet();
        let xs = vec![rat(1, 4), rat(1, 2), rat(9, 10)];
        let reports =
            verify_slice_regularity(&spec, &xs, 8, None, &SampleGrid::default()).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.pass, "violations at x={}: {:?} {:?}", r.x, r.porosity_violations, r.perfectness_violations);
            assert!(
                r.porosity_const >= r.porosity_bound,
                "x={}: porosity {} below bound {}",
                r.x,
                r.porosity_const,
                r.porosity_bound
            );
            // Center in the set caps the hole fraction at one half.
            assert!(r.porosity_const <= 0.5);
            assert!(r.perfectness_const >= 1.0);
            assert!(r.perfectness_const <= r.perfectness_bound);
            // Blocks shrink by 1/5 per level with gaps three times their
            // size, so no window demands an annulus constant near 10.
            assert!(r.perfectness_const < 10.0, "x={}: {}", r.x, r.perfectness_const);
        }
    }

    #[test]
    fn gap_projection_slices_meet_both_bounds_inside_the_left_block() {
        let spec = fixtures::gap_projection_carpet();
        let xs = vec![rat(1, 10), rat(3, 10), rat(1, 2)];
        let reports =
            verify_slice_regularity(&spec, &xs, 8, None, &SampleGrid::default()).unwrap();
        for r in &reports {
            assert!(r.pass, "violations at x={}: {:?} {:?}", r.x, r.porosity_violations, r.perfectness_violations);
        }
        // delta_lo = 1/5, alpha_bar = 3/5: k = 4, annulus bound 5 * 6^5.
        assert_eq!(reports[0].gap_exponent, 4);
        assert!((reports[0].perfectness_bound - 38880.0).abs() < 1e-6);
        assert!((reports[0].porosity_bound - 0.05).abs() < 1e-15);
    }

    #[test]
    fn solid_fake_slice_raises_the_porosity_flag() {
        let s = IntervalUnion1D::new(vec![(0.0, 1.0)]);
        let r = regularity_report_for_union(
            &s,
            1e-9,
            0.5,
            (0.01, 0.1),
            &SampleGrid::default(),
            0.0125,
            312500.0,
            5,
        )
        .unwrap();
        assert!(!r.pass);
        assert!(!r.porosity_violations.is_empty());
        assert!(r.perfectness_violations.is_empty());
    }

    #[test]
    fn huge_gap_fake_slice_raises_the_perfectness_flag() {
        let s = IntervalUnion1D::new(vec![(0.0, 0.01), (0.99, 1.0)]);
        let r = regularity_report_for_union(
            &s,
            1e-9,
            0.5,
            (0.05, 0.2),
            &SampleGrid::default(),
            0.0125,
            20.0,
            5,
        )
        .unwrap();
        assert!(!r.pass);
        assert!(!r.perfectness_violations.is_empty());
    }

    #[test]
    fn deeper_covers_only_raise_porosity_within_the_coarse_resolution() {
        let spec = fixtures::two_column_carpet();
        let proj = exact_projection(&spec).unwrap();
        let x = rat(1, 4);
        let c7 = certified_slice(&spec, &x, 7, &proj, None, 1 << 22).unwrap();
        let c8 = certified_slice(&spec, &x, 8, &proj, None, 1 << 22).unwrap();
        let (u7, h7) = (c7.to_f64(), to_f64(&c7.max_rect_height));
        let u8 = c8.to_f64();
        let r_min = 0.02;
        let centers = sample_centers(&u8, 40);
        let radii = sample_radii(r_min, 0.2, 8);
        let p7 = porosity_at(&u7, &centers, &radii);
        let p8 = porosity_at(&u8, &centers, &radii);
        // Nested covers: holes only grow with depth, and by at most the
        // coarse resolution over the smallest radius.
        assert!(p8 >= p7 - 1e-12, "p7={p7} p8={p8}");
        assert!(p8 - p7 <= h7 / r_min + 1e-12, "p7={p7} p8={p8} h7={h7}");
        // Perfectness only grows with depth on the same samples; radii stay
        // below the span third, so every sample escapes in both covers.
        let d7 = perfectness_at(&u7, &centers, &radii);
        let d8 = perfectness_at(&u8, &centers, &radii);
        assert!(d8 >= d7 - 1e-12, "d7={d7} d8={d8}");
        assert!(d8 - d7 <= 1.0, "d7={d7} d8={d8}");
    }

    #[test]
    fn csv_has_one_row_per_slice() {
        let spec = fixtures::two_column_carpet();
        let xs = vec![rat(1, 4), rat(3, 4)];
        let reports =
            verify_slice_regularity(&spec, &xs, 6, Some((0.05, 0.3)), &SampleGrid::default())
                .unwrap();
        let csv = regularity_csv(&reports);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "x,porosity_est,porosity_bound,perfectness_est,perfectness_bound,pass"
        );
        assert!(lines[1].starts_with("0.25,"));
        assert!(lines[1].ends_with(",true"));
    }
}
