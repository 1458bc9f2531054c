//! Rescaled windows around attractor points, horizontal-ending analysis,
//! and product-form fitting.
//!
//! A window (center, t, R) stands for the homothety x -> (x - center)/t
//! clipped to the closed ball B(0, R). Clouds sample the attractor inside a
//! window at a stated resolution. The quantitative claim under test: inside
//! a small enough window the attractor is close to a product
//! (-inf, w] x C_left union [w, inf) x C_right, with w on the unique
//! ending line near the center and the residual controlled by the
//! separation gap.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{check_h1, check_h2};
use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, PointSet2D};
use crate::ifs::{CarpetSpec, FMap};
use crate::interval::IntervalUnion1D;
use crate::rat::{rat_int, to_f64, Rat};
use crate::rect::RatPoint;
use crate::regularity::{certified_slice, exact_projection};
use crate::scales::{coding_point, n_of, NOfOutcome};
use crate::word::PeriodicWord;

/// Nodes a cloud traversal may visit.
const CLOUD_NODE_BUDGET: u64 = 20_000_000;

/// Level-K rectangle budget for the global ending enumeration.
const ENDING_BUDGET: u64 = 4_000_000;

/// Candidate slices on each side of the split during the model search.
const SIDE_GRID: usize = 32;

/// A zoom target: center point, scale, and clip radius in rescaled units.
#[derive(Debug, Clone)]
pub struct Window {
    pub center: RatPoint,
    pub t: Rat,
    pub radius: f64,
}

impl Window {
    pub fn new(center: RatPoint, t: Rat, radius: f64) -> Result<Self> {
        if t <= rat_int(0) {
            return Err(Error::ScaleOutOfRange { t: to_f64(&t), reason: "scale must be positive" });
        }
        if !(radius >= 1.0) {
            return Err(Error::ScaleOutOfRange {
                t: radius,
                reason: "clip radius must be at least 1",
            });
        }
        Ok(Self { center, t, radius })
    }
}

/// Attractor sample inside a rescaled window.
#[derive(Debug, Clone)]
pub struct TangentCloud {
    pub points: Vec<(f64, f64)>,
    /// Certified Hausdorff fuzz to ((E - center)/t) within the ball, up to
    /// a band of the same width along the ball boundary.
    pub resolution: f64,
    pub radius: f64,
}

impl TangentCloud {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Smallest depth whose stated cloud resolution diam(Q) alpha_bar^d / t
/// meets the radius/100 precondition.
pub fn depth_for_resolution(spec: &CarpetSpec, t: f64, radius: f64) -> usize {
    let target = t * radius / 100.0;
    let mut size = spec.q_f64().diam();
    let mut d = 0usize;
    while size > target && d < 10_000 {
        size *= spec.alpha_bar_f64();
        d += 1;
    }
    d
}

/// Rescaled attractor sample in the window.
///
/// Cylinders are refined until their diameter drops below half the stated
/// resolution, then represented by their center. When the horizontal
/// projection is certified exact, a cylinder whose height alone is below
/// half the resolution is emitted as a horizontal run of samples across the
/// projected material instead; its interior never needs refining because
/// every abscissa in the projected image carries attractor points within
/// the cylinder height. Samples are deduplicated on a quarter-resolution
/// grid, keeping the total error within the stated resolution.
pub fn rescale_window(spec: &CarpetSpec, window: &Window, depth: usize) -> Result<TangentCloud> {
    let q = spec.q();
    if &window.t * &window.t >= q.diam_sq() {
        return Err(Error::ScaleOutOfRange {
            t: to_f64(&window.t),
            reason: "scale must stay below the bounding rectangle diameter",
        });
    }
    let t = to_f64(&window.t);
    let radius = window.radius;
    let res = spec.q_f64().diam() * spec.alpha_bar_f64().powi(depth as i32) / t;
    let permitted = radius / 100.0;
    if res > permitted {
        return Err(Error::ResolutionTooCoarse { requested: permitted, resolution: res });
    }

    // f64 projection image for the segment fast path; exactness of the
    // underlying union is certified, the conversion fuzz is far below res.
    let proj = exact_projection(spec)
        .ok()
        .map(|p| p.to_f64().intervals().to_vec());

    let (cx, cy) = window.center.to_f64();
    let ball = t * radius;
    // Material on the ball boundary survives f64 rounding in the prune.
    let prune_pad = res * t * 0.25;
    let stop = res * t / 2.0;
    let stop_sq = stop * stop;
    let pitch = res * t / (2.0 * std::f64::consts::SQRT_2);
    let cell = res / 4.0;

    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let emit = |px: f64, py: f64, seen: &mut HashSet<(i64, i64)>, points: &mut Vec<(f64, f64)>| {
        if px * px + py * py > radius * radius {
            return;
        }
        let key = ((px / cell).floor() as i64, (py / cell).floor() as i64);
        if seen.insert(key) {
            points.push((px, py));
        }
    };

    let q_f = spec.q_f64();
    let mut visited = 0u64;
    let mut work: Vec<FMap> = vec![FMap::identity()];
    while let Some(map) = work.pop() {
        visited += 1;
        if visited > CLOUD_NODE_BUDGET {
            return Err(Error::DepthBudgetExceeded {
                needed: visited,
                budget: CLOUD_NODE_BUDGET,
            });
        }
        let rect = map.apply_rect(&q_f);
        if rect.dist_to_point(cx, cy) > ball + prune_pad {
            continue;
        }
        let w = rect.width();
        let h = rect.height();
        if w * w + h * h <= stop_sq {
            let (mx, my) = rect.center();
            emit((mx - cx) / t, (my - cy) / t, &mut seen, &mut points);
            continue;
        }
        if let Some(ref proj_ivs) = proj {
            if h <= stop {
                let lo = rect.x0.max(cx - ball);
                let hi = rect.x1.min(cx + ball);
                if lo <= hi {
                    let my = 0.5 * (rect.y0 + rect.y1);
                    let steps = ((hi - lo) / pitch).ceil().max(1.0) as usize;
                    for i in 0..=steps {
                        let x = lo + (hi - lo) * i as f64 / steps as f64;
                        let x_local = (x - map.b1) / map.a1;
                        if proj_ivs.iter().any(|&(a, b)| a <= x_local && x_local <= b) {
                            emit((x - cx) / t, (my - cy) / t, &mut seen, &mut points);
                        }
                    }
                }
                continue;
            }
        }
        for m in spec.fmaps() {
            work.push(map.after(m));
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    Ok(TangentCloud { points, resolution: res, radius })
}

/// Horizontal-ending data at one construction level.
#[derive(Debug, Clone)]
pub struct EndingAnalysis {
    pub level: usize,
    /// Distinct left/right rectangle edges, sorted.
    pub ending_abscissae: Vec<Rat>,
    /// Smallest positive distance between distinct edges.
    pub delta_k: Rat,
    /// Scales below this keep at most one ending line per window; derived
    /// from the smallest m with delta_k * alpha_under >= 3 beta^m.
    pub t_k: Rat,
    pub m0: u32,
}

/// Enumerates the level-K rectangle edges and the admissible scale
/// threshold. Needs width dominance (beta < 1), otherwise no threshold
/// exists.
pub fn analyze_endings(spec: &CarpetSpec, level: usize) -> Result<EndingAnalysis> {
    let n = spec.n_maps() as u64;
    let count = n
        .checked_pow(level as u32)
        .filter(|&c| c <= ENDING_BUDGET)
        .ok_or(Error::DepthBudgetExceeded {
            needed: u64::MAX,
            budget: ENDING_BUDGET,
        })?;
    let _ = count;
    if *spec.beta() >= rat_int(1) {
        return Err(Error::Undecidable {
            detail: "height never falls below width; no admissible scale threshold".into(),
        });
    }

    let q = spec.q();
    let mut edges: BTreeSet<Rat> = BTreeSet::new();
    let mut work: Vec<(Rat, Rat, usize)> = vec![(rat_int(1), rat_int(0), 0)];
    while let Some((a, b, d)) = work.pop() {
        if d == level {
            let e0 = &a * &q.x0 + &b;
            let e1 = &a * &q.x1 + &b;
            edges.insert(e0.clone().min(e1.clone()));
            edges.insert(e0.max(e1));
            continue;
        }
        for m in spec.maps() {
            work.push((&a * &m.a1, &a * &m.b1 + &b, d + 1));
        }
    }
    let ending_abscissae: Vec<Rat> = edges.into_iter().collect();
    assert!(ending_abscissae.len() >= 2, "a nondegenerate rectangle has two edges");
    let delta_k = ending_abscissae
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .min()
        .expect("at least one gap");

    let gate = &delta_k * spec.alpha_under();
    let three = rat_int(3);
    let mut pow = spec.beta().clone();
    let mut m0 = 1u32;
    while gate < &three * &pow {
        pow *= spec.beta();
        m0 += 1;
        assert!(m0 < 10_000, "beta below one converges");
    }
    let mut t_k = spec.delta_lo().clone();
    for _ in 0..m0 {
        t_k *= spec.alpha_under();
    }
    Ok(EndingAnalysis { level, ending_abscissae, delta_k, t_k, m0 })
}

/// Distinct level-`level` rectangle edges inside [lo, hi], found by pruned
/// descent; levels far beyond the global enumeration budget stay cheap
/// because subtrees whose x-extent misses the window are dropped.
pub fn windowed_ending_abscissae(
    spec: &CarpetSpec,
    level: usize,
    lo: &Rat,
    hi: &Rat,
) -> Result<Vec<Rat>> {
    let q = spec.q();
    let mut edges: BTreeSet<Rat> = BTreeSet::new();
    let mut visited = 0u64;
    let mut work: Vec<(Rat, Rat, usize)> = vec![(rat_int(1), rat_int(0), 0)];
    while let Some((a, b, d)) = work.pop() {
        visited += 1;
        if visited > ENDING_BUDGET {
            return Err(Error::DepthBudgetExceeded { needed: visited, budget: ENDING_BUDGET });
        }
        let e0 = &a * &q.x0 + &b;
        let e1 = &a * &q.x1 + &b;
        let (x0, x1) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
        if &x1 < lo || &x0 > hi {
            continue;
        }
        if d == level {
            if &x0 >= lo {
                edges.insert(x0);
            }
            if &x1 <= hi {
                edges.insert(x1);
            }
            continue;
        }
        for m in spec.maps() {
            work.push((&a * &m.a1, &a * &m.b1 + &b, d + 1));
        }
    }
    Ok(edges.into_iter().collect())
}

/// Fitted split model for a cloud.
#[derive(Debug, Clone)]
pub struct ProductForm {
    pub w: f64,
    pub c_left: IntervalUnion1D,
    pub c_right: IntervalUnion1D,
    /// Symmetric Hausdorff distance between the cloud and the sampled
    /// model, both inside the ball.
    pub residual: f64,
    /// The model region is sampled at this pitch; its true distance to the
    /// cloud lies within residual +- pitch * sqrt(2)/2.
    pub sample_pitch: f64,
}

fn model_samples(
    w: f64,
    c_left: &IntervalUnion1D,
    c_right: &IntervalUnion1D,
    radius: f64,
    pitch: f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let side = |x_lo: f64, x_hi: f64, c: &IntervalUnion1D, out: &mut Vec<(f64, f64)>| {
        if x_lo > x_hi || c.is_empty() {
            return;
        }
        let xsteps = ((x_hi - x_lo) / pitch).ceil().max(1.0) as usize;
        for i in 0..=xsteps {
            let x = x_lo + (x_hi - x_lo) * i as f64 / xsteps as f64;
            for &(a, b) in c.intervals() {
                let ysteps = ((b - a) / pitch).ceil().max(1.0) as usize;
                for j in 0..=ysteps {
                    let y = a + (b - a) * j as f64 / ysteps as f64;
                    if x * x + y * y <= radius * radius {
                        out.push((x, y));
                    }
                }
            }
        }
    };
    side(-radius, w.min(radius), c_left, &mut out);
    side(w.max(-radius), radius, c_right, &mut out);
    out
}

fn split_sets(
    cloud: &TangentCloud,
    w: f64,
    margin: f64,
) -> (IntervalUnion1D, IntervalUnion1D) {
    let res = cloud.resolution;
    let left: Vec<(f64, f64)> = cloud
        .points
        .iter()
        .filter(|p| p.0 <= w - margin)
        .map(|p| (p.1 - res, p.1 + res))
        .collect();
    let right: Vec<(f64, f64)> = cloud
        .points
        .iter()
        .filter(|p| p.0 >= w + margin)
        .map(|p| (p.1 - res, p.1 + res))
        .collect();
    (IntervalUnion1D::new(left), IntervalUnion1D::new(right))
}

fn cloud_model_residual(cloud_pts: &[(f64, f64)], model_pts: Vec<(f64, f64)>) -> f64 {
    if model_pts.is_empty() {
        return f64::INFINITY;
    }
    let a = PointSet2D::new(cloud_pts.to_vec(), 0.0);
    let b = PointSet2D::new(model_pts, 0.0);
    hausdorff_distance(&a, &b).unwrap_or(f64::INFINITY)
}

/// Best split model over candidate abscissae: cloud x-coordinates
/// (deduplicated at half-resolution) plus sentinels past either ball edge
/// so a one-sided model is always available. Ties within 1e-12 go to the
/// smallest |w|, then the smaller w.
pub fn fit_product_form(cloud: &TangentCloud) -> Result<ProductForm> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let res = cloud.resolution;
    let radius = cloud.radius;
    let margin = 2.0 * res;
    let pitch = res.max(radius / 256.0);

    let quant = (res / 2.0).max(radius / 512.0);
    let mut cand: BTreeSet<i64> = cloud
        .points
        .iter()
        .map(|p| (p.0 / quant).round() as i64)
        .collect();
    cand.insert(((-radius - 3.0 * margin) / quant).round() as i64);
    cand.insert(((radius + 3.0 * margin) / quant).round() as i64);
    let candidates: Vec<f64> = cand.into_iter().map(|k| k as f64 * quant).collect();

    let scored: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&w| {
            let (c_left, c_right) = split_sets(cloud, w, margin);
            if c_left.is_empty() && c_right.is_empty() {
                return (f64::INFINITY, w);
            }
            let model = model_samples(w, &c_left, &c_right, radius, pitch);
            (cloud_model_residual(&cloud.points, model), w)
        })
        .collect();

    let best = scored
        .iter()
        .map(|&(r, _)| r)
        .fold(f64::INFINITY, f64::min);
    let mut w_best = f64::INFINITY;
    for &(r, w) in &scored {
        if r <= best + 1e-12 {
            let better = w.abs() < w_best.abs() - 1e-15
                || (w.abs() <= w_best.abs() + 1e-15 && w < w_best);
            if w_best.is_infinite() || better {
                w_best = w;
            }
        }
    }

    let (c_left, c_right) = split_sets(cloud, w_best, margin);
    let model = model_samples(w_best, &c_left, &c_right, radius, pitch);
    let residual = cloud_model_residual(&cloud.points, model);
    Ok(ProductForm { w: w_best, c_left, c_right, residual, sample_pitch: pitch })
}

/// Split-model verification record for one window.
#[derive(Debug, Clone, Serialize)]
pub struct TangentReport {
    pub center: (f64, f64),
    pub t: f64,
    pub k_level: usize,
    /// Certified cylinder-avoidance index of the window center.
    pub n: u64,
    /// Ending abscissae of level n + k_level meeting the window.
    pub lines_met: usize,
    /// Split abscissa, original units.
    pub w: f64,
    /// Chosen slice abscissae, original units; equal to w on the
    /// no-ending branch.
    pub u: f64,
    pub v: f64,
    /// Symmetric Hausdorff distance, rescaled units, between the cloud and
    /// the fitted slice product.
    pub residual: f64,
    /// alpha_bar^K / delta_lo, rescaled units.
    pub bound: f64,
    /// Total resolution slack: cloud fuzz, slice cover fuzz, model pitch.
    pub slack: f64,
    pub pass: bool,
    pub degenerate: bool,
    pub c_left: Vec<(f64, f64)>,
    pub c_right: Vec<(f64, f64)>,
}

struct RescaledSlice {
    union: IntervalUnion1D,
    fuzz: f64,
}

/// Rescaled vertical slice of the attractor at original abscissa u,
/// restricted to the window's vertical range.
fn rescaled_slice(
    spec: &CarpetSpec,
    proj: &crate::interval::RatIntervalUnion,
    u: &Rat,
    center: &RatPoint,
    t: &Rat,
    radius: f64,
    depth: usize,
) -> Result<RescaledSlice> {
    let pad = t * rat_int(2);
    let w0 = &center.y - &pad;
    let w1 = &center.y + &pad;
    let cover = certified_slice(spec, u, depth, proj, Some((&w0, &w1)), CLOUD_NODE_BUDGET)?;
    let t_f = to_f64(t);
    let cy = to_f64(&center.y);
    let ivs: Vec<(f64, f64)> = cover
        .union
        .intervals()
        .iter()
        .map(|(a, b)| ((to_f64(a) - cy) / t_f, (to_f64(b) - cy) / t_f))
        .filter(|&(a, b)| b >= -radius && a <= radius)
        .collect();
    Ok(RescaledSlice {
        union: IntervalUnion1D::new(ivs),
        fuzz: to_f64(&cover.max_rect_height) / t_f,
    })
}

/// Depth at which every cylinder height falls below `target`.
fn slice_depth_for(spec: &CarpetSpec, target: f64) -> usize {
    let a2_max: f64 = spec
        .fmaps()
        .iter()
        .map(|m| m.a2.abs())
        .fold(0.0, f64::max);
    let mut h = spec.q_f64().height();
    let mut d = 0usize;
    while h > target && d < 10_000 {
        h *= a2_max;
        d += 1;
    }
    d
}

fn directed_sup(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return f64::INFINITY;
    }
    let a = PointSet2D::new(from.to_vec(), 0.0);
    let b = PointSet2D::new(to.to_vec(), 0.0);
    // Hausdorff is symmetric; the directed value needs the larger set on
    // the `from` side only, so take the max formulation directly.
    let mut worst = 0.0f64;
    for &p in &a.points {
        let mut best = f64::INFINITY;
        for &q in &b.points {
            let d = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
            if d < best {
                best = d;
            }
        }
        worst = worst.max(best);
    }
    worst.sqrt()
}

/// One-sided score for the slice search on one side of the split: the
/// side's cloud against the side's model, falling back to the distance
/// from stray model material to the whole cloud.
fn side_score(cloud_side: &[(f64, f64)], cloud_all: &[(f64, f64)], model: &[(f64, f64)]) -> f64 {
    match (cloud_side.is_empty(), model.is_empty()) {
        (true, true) => 0.0,
        (true, false) => directed_sup(model, cloud_all),
        (false, true) => f64::INFINITY,
        (false, false) => {
            let a = PointSet2D::new(cloud_side.to_vec(), 0.0);
            let b = PointSet2D::new(model.to_vec(), 0.0);
            hausdorff_distance(&a, &b).unwrap_or(f64::INFINITY)
        }
    }
}

/// Split-model check for one window: locate the unique ending line of
/// level n + K near the center (or fall back to the center line), search
/// slice abscissae on both sides, and compare the sampled model against
/// the rescaled cloud. The certified statement: residual stays within
/// alpha_bar^K / delta_lo plus the stated resolution slack.
pub fn verify_epspatterns(
    spec: &CarpetSpec,
    word: &PeriodicWord,
    t: &Rat,
    k_level: usize,
    cert_depth: usize,
) -> Result<TangentReport> {
    if !spec.ssc_certified() {
        return Err(Error::Undecidable {
            detail: "separation gap not certified".into(),
        });
    }
    if !check_h1(spec).holds() {
        return Err(Error::Undecidable {
            detail: "width dominance fails; ending thresholds undefined".into(),
        });
    }
    if !check_h2(spec).holds() {
        return Err(Error::Undecidable {
            detail: "vertical-line coverage fails; split model not applicable".into(),
        });
    }
    let endings = analyze_endings(spec, k_level)?;
    if t >= &endings.t_k {
        return Err(Error::ScaleOutOfRange {
            t: to_f64(t),
            reason: "scale must lie below the ending separation threshold",
        });
    }
    let n = match n_of(spec, word, t, cert_depth)? {
        NOfOutcome::Certified { n, out_of_regime: false } => n,
        NOfOutcome::Certified { out_of_regime: true, .. } => {
            return Err(Error::Undecidable {
                detail: "window scale outside the avoidance regime".into(),
            })
        }
        NOfOutcome::Undecided { lower, upper } => {
            return Err(Error::Undecidable {
                detail: format!("avoidance index undecided in [{lower}, {upper}]; raise depth"),
            })
        }
    };

    let center = coding_point(spec, word)?;
    let level = n as usize + k_level;
    let lo = &center.x - t;
    let hi = &center.x + t;
    let lines = windowed_ending_abscissae(spec, level, &lo, &hi)?;
    if lines.len() > 1 {
        return Err(Error::Undecidable {
            detail: format!(
                "{} ending lines of level {} meet the window; threshold violated",
                lines.len(),
                level
            ),
        });
    }
    let degenerate = lines.is_empty();
    let w_rat = lines.first().cloned().unwrap_or_else(|| center.x.clone());

    let radius = 1.0;
    let depth = depth_for_resolution(spec, to_f64(t), radius);
    let window = Window::new(center.clone(), t.clone(), radius)?;
    let cloud = rescale_window(spec, &window, depth)?;
    let t_f = to_f64(t);
    let cx = to_f64(&center.x);
    let w_f = (to_f64(&w_rat) - cx) / t_f;

    let proj = exact_projection(spec)?;
    let slice_depth = slice_depth_for(spec, cloud.resolution * t_f / 2.0);

    let cloud_left: Vec<(f64, f64)> =
        cloud.points.iter().copied().filter(|p| p.0 <= w_f).collect();
    let cloud_right: Vec<(f64, f64)> =
        cloud.points.iter().copied().filter(|p| p.0 >= w_f).collect();
    let pitch = cloud.resolution.max(radius / 256.0);

    // Offsets shrink geometrically toward the split; slices at abscissae
    // outside the projection are genuinely empty and are skipped.
    let mut offsets: Vec<Rat> = Vec::new();
    if !degenerate {
        let mut off = t * rat(4, 5);
        for _ in 0..SIDE_GRID {
            offsets.push(off.clone());
            off = off * rat(4, 5);
        }
    }

    let mut slice_fuzz = 0.0f64;
    let eval_side = |side_cloud: &[(f64, f64)],
                         x_lo: f64,
                         x_hi: f64,
                         candidates: &[Rat],
                         slice_fuzz: &mut f64|
     -> Result<(Rat, IntervalUnion1D, f64)> {
        let mut best: Option<(f64, Rat, IntervalUnion1D)> = None;
        for u in candidates {
            if !proj.contains(u) {
                continue;
            }
            let sl = rescaled_slice(spec, &proj, u, &center, t, radius, slice_depth)?;
            let model = model_samples_one_sided(x_lo, x_hi, &sl.union, radius, pitch);
            let score = side_score(side_cloud, &cloud.points, &model);
            *slice_fuzz = slice_fuzz.max(sl.fuzz);
            let better = match &best {
                None => true,
                Some((s, _, _)) => score < *s,
            };
            if better {
                best = Some((score, u.clone(), sl.union));
            }
        }
        match best {
            Some((s, u, c)) => Ok((u, c, s)),
            None => Ok((w_rat.clone(), IntervalUnion1D::new(vec![]), {
                if side_cloud.is_empty() {
                    0.0
                } else {
                    f64::INFINITY
                }
            })),
        }
    };

    let left_candidates: Vec<Rat> = if degenerate {
        vec![w_rat.clone()]
    } else {
        offsets.iter().map(|o| &w_rat - o).collect()
    };
    let right_candidates: Vec<Rat> = if degenerate {
        vec![w_rat.clone()]
    } else {
        offsets.iter().map(|o| &w_rat + o).collect()
    };

    let (u, c_left, _) = eval_side(&cloud_left, -radius, w_f.min(radius), &left_candidates, &mut slice_fuzz)?;
    let (v, c_right, _) =
        eval_side(&cloud_right, w_f.max(-radius), radius, &right_candidates, &mut slice_fuzz)?;

    // Final symmetric residual at the chosen slices.
    let mut model = model_samples_one_sided(-radius, w_f.min(radius), &c_left, radius, pitch);
    model.extend(model_samples_one_sided(
        w_f.max(-radius),
        radius,
        &c_right,
        radius,
        pitch,
    ));
    let residual = cloud_model_residual(&cloud.points, model);

    let mut bound_rat = rat_int(1) / spec.delta_lo();
    for _ in 0..k_level {
        bound_rat *= spec.alpha_bar();
    }
    let bound = to_f64(&bound_rat);
    let slack = cloud.resolution + slice_fuzz + pitch * std::f64::consts::SQRT_2 / 2.0;
    if slack > bound {
        return Err(Error::Undecidable {
            detail: format!("resolution slack {slack} exceeds the certified bound {bound}; raise depth"),
        });
    }
    let pass = residual <= bound + slack;

    Ok(TangentReport {
        center: center.to_f64(),
        t: t_f,
        k_level,
        n,
        lines_met: lines.len(),
        w: to_f64(&w_rat),
        u: to_f64(&u),
        v: to_f64(&v),
        residual,
        bound,
        slack,
        pass,
        degenerate,
        c_left: c_left.intervals().to_vec(),
        c_right: c_right.intervals().to_vec(),
    })
}

fn model_samples_one_sided(
    x_lo: f64,
    x_hi: f64,
    c: &IntervalUnion1D,
    radius: f64,
    pitch: f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if x_lo > x_hi || c.is_empty() {
        return out;
    }
    let xsteps = ((x_hi - x_lo) / pitch).ceil().max(1.0) as usize;
    for i in 0..=xsteps {
        let x = x_lo + (x_hi - x_lo) * i as f64 / xsteps as f64;
        for &(a, b) in c.intervals() {
            let ysteps = ((b - a) / pitch).ceil().max(1.0) as usize;
            for j in 0..=ysteps {
                let y = a + (b - a) * j as f64 / ysteps as f64;
                if x * x + y * y <= radius * radius {
                    out.push((x, y));
                }
            }
        }
    }
    out
}

use crate::rat::rat;

/// Homothety lambda p + z clipped to the unit square.
pub fn miniset(s: &PointSet2D, lambda: f64, z: (f64, f64)) -> Result<PointSet2D> {
    if !(lambda >= 1.0) {
        return Err(Error::ScalingBelowOne);
    }
    let points: Vec<(f64, f64)> = s
        .points
        .iter()
        .map(|&(x, y)| (lambda * x + z.0, lambda * y + z.1))
        .filter(|&(x, y)| (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y))
        .collect();
    Ok(PointSet2D::new(points, lambda * s.resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::restricted_hausdorff;
    use crate::word::Word;

    fn pw(prefix: &[usize], cycle: &[usize]) -> PeriodicWord {
        PeriodicWord::new(Word::new(prefix.to_vec()), Word::new(cycle.to_vec()))
    }

    #[test]
    fn level_one_endings_of_the_two_column_carpet() {
        let spec = fixtures::two_column_carpet();
        let ea = analyze_endings(&spec, 1).unwrap();
        assert_eq!(ea.ending_abscissae, vec![rat_int(0), rat(1, 2), rat_int(1)]);
        assert_eq!(ea.delta_k, rat(1, 2));
        // delta alpha_under = 1/10, beta = 2/5: smallest m with
        // (5/2)^m >= 30 is 4, so the threshold is 0.2^4 * 0.05.
        assert_eq!(ea.m0, 4);
        assert_eq!(ea.t_k, rat(1, 12500));
    }

    #[test]
    fn deeper_levels_only_tighten_the_ending_gap() {
        let spec = fixtures::two_column_carpet();
        let e2 = analyze_endings(&spec, 2).unwrap();
        assert_eq!(e2.delta_k, rat(1, 4));
        assert_eq!(e2.m0, 5);
        assert_eq!(e2.t_k, rat(1, 62500));
        let mut prev = analyze_endings(&spec, 1).unwrap().delta_k;
        for k in 2..=4 {
            let next = analyze_endings(&spec, k).unwrap().delta_k;
            assert!(next <= prev, "gap grew at level {k}");
            prev = next;
        }
    }

    #[test]
    fn coincident_edges_are_merged() {
        // Four maps, two distinct x-extents: four distinct edges, not eight.
        let spec = fixtures::cantor_product();
        let edges = windowed_ending_abscissae(&spec, 1, &rat_int(0), &rat_int(1)).unwrap();
        assert_eq!(edges, vec![rat_int(0), rat(1, 4), rat(3, 4), rat_int(1)]);
        // Square boxes never leave the ending regime, so no threshold exists.
        assert!(matches!(analyze_endings(&spec, 1), Err(Error::Undecidable { .. })));
    }

    #[test]
    fn windowed_endings_match_the_global_enumeration() {
        let spec = fixtures::two_column_carpet();
        let all = windowed_ending_abscissae(&spec, 3, &rat(3, 10), &rat(4, 5)).unwrap();
        assert_eq!(all, vec![rat(3, 8), rat(1, 2), rat(5, 8), rat(3, 4)]);
    }

    #[test]
    fn unit_rescale_reproduces_the_attractor_corner() {
        let spec = fixtures::two_column_carpet();
        let w = Window::new(RatPoint::new(rat_int(0), rat_int(0)), rat_int(1), 1.0).unwrap();
        let depth = depth_for_resolution(&spec, 1.0, 1.0);
        let cloud = rescale_window(&spec, &w, depth).unwrap();
        assert!(!cloud.is_empty());
        assert!(cloud.resolution <= 0.01);
        for &(x, y) in &cloud.points {
            assert!(x * x + y * y <= 1.0 + 1e-12);
            assert!(x >= -cloud.resolution && y >= -cloud.resolution, "attractor stays in the first quadrant");
        }
        // The fixed point of the first map is in the window.
        let near_origin = cloud
            .points
            .iter()
            .any(|&(x, y)| x * x + y * y <= (2.0 * cloud.resolution).powi(2));
        assert!(near_origin);
    }

    #[test]
    fn zooming_a_cloud_matches_the_directly_rescaled_window() {
        let spec = fixtures::two_column_carpet();
        let center = RatPoint::new(rat_int(0), rat_int(0));
        let coarse = rescale_window(
            &spec,
            &Window::new(center.clone(), rat(1, 4), 1.0).unwrap(),
            depth_for_resolution(&spec, 0.25, 1.0),
        )
        .unwrap();
        let fine = rescale_window(
            &spec,
            &Window::new(center, rat(1, 8), 1.0).unwrap(),
            depth_for_resolution(&spec, 0.125, 1.0),
        )
        .unwrap();
        // Doubling coarse points approximates the finer window.
        let zoomed: Vec<(f64, f64)> = coarse
            .points
            .iter()
            .map(|&(x, y)| (2.0 * x, 2.0 * y))
            .filter(|&(x, y)| x * x + y * y <= 1.0)
            .collect();
        let a = PointSet2D::new(zoomed, 0.0);
        let b = PointSet2D::new(fine.points.clone(), 0.0);
        // Compare away from the clip boundary where either sample may omit
        // a band of its stated resolution.
        let d = restricted_hausdorff(&a, &b, (0.0, 0.0), 0.9).unwrap();
        let tol = 2.0 * coarse.resolution + fine.resolution + 1e-9;
        assert!(d <= tol, "zoom mismatch {d} > {tol}");
    }

    #[test]
    fn in_class_cloud_is_recovered() {
        // Exact product sample: left columns at y = +-1/2, right at y = 0.
        let mut pts = Vec::new();
        let step = 0.05;
        let n = (2.0 / step) as i32;
        for i in 0..=n {
            let x = -1.0 + i as f64 * step;
            for y in [-0.5, 0.5] {
                if x <= 0.0 && x * x + y * y <= 1.0 {
                    pts.push((x, y));
                }
            }
            if x >= 0.0 && x * x <= 1.0 {
                pts.push((x, 0.0));
            }
        }
        let cloud = TangentCloud { points: pts, resolution: step, radius: 1.0 };
        let fit = fit_product_form(&cloud).unwrap();
        assert!(fit.w.abs() <= 0.1, "split at {}", fit.w);
        assert!(fit.residual <= 3.0 * step, "residual {}", fit.residual);
        assert_eq!(fit.c_left.count(), 2);
        assert_eq!(fit.c_right.count(), 1);
        assert!(fit.c_left.contains(-0.5) && fit.c_left.contains(0.5));
        assert!(fit.c_right.contains(0.0));
    }

    #[test]
    fn splitless_cloud_breaks_ties_toward_the_center() {
        let mut pts = Vec::new();
        let step = 0.05;
        let n = (2.0 / step) as i32;
        for i in 0..=n {
            let x = -1.0 + i as f64 * step;
            if x * x + 0.09 <= 1.0 {
                pts.push((x, 0.3));
            }
        }
        let cloud = TangentCloud { points: pts, resolution: step, radius: 1.0 };
        let fit = fit_product_form(&cloud).unwrap();
        assert!(fit.residual <= 3.0 * step);
        assert!(fit.w.abs() <= 0.15, "tie-break failed: w = {}", fit.w);
        assert!(fit.c_left.contains(0.3));
        assert!(fit.c_right.contains(0.3));
    }

    #[test]
    fn center_line_window_splits_into_disjoint_vertical_sets() {
        // Window on the column boundary x = 1/8 at scale 2^-5: material on
        // either side comes from different row families.
        let spec = fixtures::two_column_carpet();
        let center = RatPoint::new(rat(1, 8), rat(1, 400));
        let w = Window::new(center, rat(1, 32), 1.0).unwrap();
        let depth = depth_for_resolution(&spec, 1.0 / 32.0, 1.0);
        let cloud = rescale_window(&spec, &w, depth).unwrap();
        let fit = fit_product_form(&cloud).unwrap();
        assert!(fit.w.abs() <= 0.1, "split at {}", fit.w);
        assert!(!fit.c_left.is_empty() && !fit.c_right.is_empty());
        for &(a, b) in fit.c_left.intervals() {
            for &(c, d) in fit.c_right.intervals() {
                assert!(b < c || d < a, "sides overlap: [{a},{b}] vs [{c},{d}]");
            }
        }
    }

    #[test]
    fn split_verification_at_the_corner_word() {
        let spec = fixtures::two_column_carpet();
        let word = pw(&[], &[1]);
        let t = rat(1, 500_000);
        let report = verify_epspatterns(&spec, &word, &t, 3, 8).unwrap();
        // Foreign rows at height 0.55 * 0.2^(n-1): level 9 is the first
        // meeting the 2e-6 ball around the origin.
        assert_eq!(report.n, 8);
        assert_eq!(report.lines_met, 1);
        assert_eq!(report.w, 0.0);
        assert!(!report.degenerate);
        assert!(report.c_left.is_empty(), "no material left of x = 0");
        assert!(!report.c_right.is_empty());
        assert!(report.pass, "residual {} above {} + {}", report.residual, report.bound, report.slack);
        assert!(report.residual <= 0.2, "residual {}", report.residual);
    }

    #[test]
    fn tighter_levels_shrink_the_certified_bound() {
        let spec = fixtures::two_column_carpet();
        let word = pw(&[], &[1]);
        let t = rat(1, 500_000);
        let r2 = verify_epspatterns(&spec, &word, &t, 2, 8).unwrap();
        let r4 = verify_epspatterns(&spec, &word, &t, 4, 8).unwrap();
        assert!(r4.bound < r2.bound);
        assert!((r2.bound - 5.0).abs() < 1e-12);
        assert!((r4.bound - 1.25).abs() < 1e-12);
        assert!(r2.pass && r4.pass);
    }

    #[test]
    fn interior_window_without_endings_takes_the_degenerate_branch() {
        let spec = fixtures::two_column_carpet();
        let word = pw(&[], &[1, 2]);
        let t = rat(1, 500_000);
        let report = verify_epspatterns(&spec, &word, &t, 3, 12).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.lines_met, 0);
        assert_eq!(report.u, report.w);
        assert_eq!(report.v, report.w);
        assert!(report.pass, "residual {} above {} + {}", report.residual, report.bound, report.slack);
    }

    #[test]
    fn scale_above_the_threshold_is_rejected() {
        let spec = fixtures::two_column_carpet();
        let word = pw(&[], &[1]);
        let err = verify_epspatterns(&spec, &word, &rat(1, 100), 3, 6);
        assert!(matches!(err, Err(Error::ScaleOutOfRange { .. })));
    }

    #[test]
    fn miniset_identity_and_clipping() {
        let s = PointSet2D::new(vec![(0.2, 0.3), (0.4, 0.1)], 0.01);
        let same = miniset(&s, 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(same.points, s.points);
        let doubled = miniset(&s, 2.0, (0.0, 0.0)).unwrap();
        assert_eq!(doubled.points, vec![(0.4, 0.6), (0.8, 0.2)]);
        let clipped = miniset(&s, 3.0, (0.0, 0.0)).unwrap();
        assert_eq!(clipped.points.len(), 1);
        let (x, y) = clipped.points[0];
        assert!((x - 0.6).abs() < 1e-12 && (y - 0.9).abs() < 1e-12);
        assert!(matches!(miniset(&s, 0.5, (0.0, 0.0)), Err(Error::ScalingBelowOne)));
    }

    #[test]
    fn miniset_composition_agrees_on_retained_points() {
        let s = PointSet2D::new(vec![(0.1, 0.05), (0.2, 0.15), (0.3, 0.4)], 0.0);
        let inner = miniset(&s, 2.0, (0.05, 0.0)).unwrap();
        let outer = miniset(&inner, 1.5, (0.1, 0.2)).unwrap();
        let direct = miniset(&s, 3.0, (0.175, 0.2)).unwrap();
        for p in &outer.points {
            assert!(
                direct.points.iter().any(|q| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12),
                "{p:?} missing from the direct composition"
            );
        }
    }
}
