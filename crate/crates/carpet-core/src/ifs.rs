//! Diagonal affine maps and the validated carpet specification.
//!
//! A `CarpetSpec` owns the maps plus every derived constant the rest of the
//! crate relies on: the exact bounding rectangle Q, the contraction extrema,
//! and certified two-sided bounds on the separation gap between first-level
//! images. All constants here are exact rationals; estimator modules take
//! f64 views and account for their own error.

use crate::error::{Error, Result};
use crate::rat::{rat_int, sqrt_lower, sqrt_upper, to_f64, Rat};
use crate::rect::{RatPoint, RatRect, Rect};
use crate::word::Word;
use num::{One, Signed, Zero};

/// Planar affine map (x, y) -> (a1 x + b1, a2 y + b2). Signed diagonal
/// entries are admitted; contraction ratios are their absolute values.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap2D {
    pub a1: Rat,
    pub a2: Rat,
    pub b1: Rat,
    pub b2: Rat,
}

impl AffineMap2D {
    pub fn new(a1: Rat, a2: Rat, b1: Rat, b2: Rat) -> Self {
        Self { a1, a2, b1, b2 }
    }

    /// Exact map from f64 entries (every finite f64 is rational).
    pub fn from_f64(a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        let r = |x: f64| Rat::from_float(x).expect("finite map entry");
        Self::new(r(a1), r(a2), r(b1), r(b2))
    }

    pub fn identity() -> Self {
        Self::new(Rat::one(), Rat::one(), Rat::zero(), Rat::zero())
    }

    pub fn alpha1(&self) -> Rat {
        self.a1.abs()
    }

    pub fn alpha2(&self) -> Rat {
        self.a2.abs()
    }

    pub fn apply(&self, p: &RatPoint) -> RatPoint {
        RatPoint::new(&self.a1 * &p.x + &self.b1, &self.a2 * &p.y + &self.b2)
    }

    /// Image of a rectangle; swaps extents where a sign flips.
    pub fn apply_rect(&self, r: &RatRect) -> RatRect {
        let (x0, x1) = {
            let u = &self.a1 * &r.x0 + &self.b1;
            let v = &self.a1 * &r.x1 + &self.b1;
            if u <= v { (u, v) } else { (v, u) }
        };
        let (y0, y1) = {
            let u = &self.a2 * &r.y0 + &self.b2;
            let v = &self.a2 * &r.y1 + &self.b2;
            if u <= v { (u, v) } else { (v, u) }
        };
        RatRect::new(x0, x1, y0, y1)
    }

    /// self after inner: (self . inner)(x) = self(inner(x)).
    pub fn after(&self, inner: &AffineMap2D) -> AffineMap2D {
        AffineMap2D::new(
            &self.a1 * &inner.a1,
            &self.a2 * &inner.a2,
            &self.a1 * &inner.b1 + &self.b1,
            &self.a2 * &inner.b2 + &self.b2,
        )
    }

    /// Unique fixed point, b/(1-a) per coordinate. Requires |a| < 1.
    pub fn fixed_point(&self) -> RatPoint {
        RatPoint::new(
            &self.b1 / (Rat::one() - &self.a1),
            &self.b2 / (Rat::one() - &self.a2),
        )
    }

    pub fn to_f64(&self) -> FMap {
        FMap {
            a1: to_f64(&self.a1),
            a2: to_f64(&self.a2),
            b1: to_f64(&self.b1),
            b2: to_f64(&self.b2),
        }
    }
}

/// f64 mirror of a composed map, for estimator-grade enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMap {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl FMap {
    pub fn identity() -> Self {
        Self { a1: 1.0, a2: 1.0, b1: 0.0, b2: 0.0 }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a1 * x + self.b1, self.a2 * y + self.b2)
    }

    pub fn apply_rect(&self, r: &Rect) -> Rect {
        let u = self.a1 * r.x0 + self.b1;
        let v = self.a1 * r.x1 + self.b1;
        let s = self.a2 * r.y0 + self.b2;
        let t = self.a2 * r.y1 + self.b2;
        Rect::new(u.min(v), u.max(v), s.min(t), s.max(t))
    }

    pub fn after(&self, inner: &FMap) -> FMap {
        FMap {
            a1: self.a1 * inner.a1,
            a2: self.a2 * inner.a2,
            b1: self.a1 * inner.b1 + self.b1,
            b2: self.a2 * inner.b2 + self.b2,
        }
    }
}

/// Outcome of the separation certification.
#[derive(Debug, Clone, PartialEq)]
pub enum SscStatus {
    /// First-level images proven pairwise disjoint: the depth-m rectangle
    /// covers of distinct images keep a positive gap.
    Certified { depth: usize, delta_lo: Rat },
    /// No positive gap found up to the inspected depth.
    Inconclusive { max_depth: usize },
}

/// Certified two-sided bounds on the first-level separation gap.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaBounds {
    /// Exact lower bound: min distance between depth-m rectangle covers of
    /// distinct first-level images. Rational and certified (rounded down
    /// when the witness gap is diagonal).
    pub lo: Rat,
    /// Upper bound: min distance between attractor points sampled from
    /// distinct first-level images, rounded up.
    pub hi: Rat,
}

#[derive(Debug, Clone)]
pub struct CarpetSpec {
    maps: Vec<AffineMap2D>,
    fmaps: Vec<FMap>,
    alpha_bar: Rat,
    alpha_under: Rat,
    beta: Rat,
    q: RatRect,
    q_f64: Rect,
    delta: DeltaBounds,
    ssc: SscStatus,
}

/// Depth cap for the default separation certification loop.
const DEFAULT_SSC_DEPTH_CAP: usize = 6;

/// Bits of precision for rational square-root rounding of gap distances.
const SQRT_BITS: u32 = 60;

impl CarpetSpec {
    pub fn maps(&self) -> &[AffineMap2D] {
        &self.maps
    }

    pub fn fmaps(&self) -> &[FMap] {
        &self.fmaps
    }

    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn alpha_bar(&self) -> &Rat {
        &self.alpha_bar
    }

    pub fn alpha_under(&self) -> &Rat {
        &self.alpha_under
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }

    pub fn alpha_bar_f64(&self) -> f64 {
        to_f64(&self.alpha_bar)
    }

    pub fn alpha_under_f64(&self) -> f64 {
        to_f64(&self.alpha_under)
    }

    pub fn q(&self) -> &RatRect {
        &self.q
    }

    pub fn q_f64(&self) -> Rect {
        self.q_f64
    }

    pub fn delta_bounds(&self) -> &DeltaBounds {
        &self.delta
    }

    pub fn delta_lo(&self) -> &Rat {
        &self.delta.lo
    }

    pub fn delta_lo_f64(&self) -> f64 {
        to_f64(&self.delta.lo)
    }

    pub fn ssc(&self) -> &SscStatus {
        &self.ssc
    }

    pub fn ssc_certified(&self) -> bool {
        matches!(self.ssc, SscStatus::Certified { .. })
    }

    /// Composed map of a finite word (empty word = identity).
    pub fn compose(&self, w: &Word) -> Result<AffineMap2D> {
        let mut acc = AffineMap2D::identity();
        for s in w.symbols() {
            let map = self.map_checked(s)?;
            acc = acc.after(map);
        }
        Ok(acc)
    }

    pub fn compose_f64(&self, w: &Word) -> Result<FMap> {
        let mut acc = FMap::identity();
        for s in w.symbols() {
            self.map_checked(s)?;
            acc = acc.after(&self.fmaps[s - 1]);
        }
        Ok(acc)
    }

    fn map_checked(&self, symbol: usize) -> Result<&AffineMap2D> {
        if symbol == 0 || symbol > self.maps.len() {
            return Err(Error::SymbolOutOfRange { symbol, n: self.maps.len() });
        }
        Ok(&self.maps[symbol - 1])
    }

    /// Construction rectangle of a word: the image of Q.
    pub fn cylinder_rect(&self, w: &Word) -> Result<RatRect> {
        Ok(self.compose(w)?.apply_rect(&self.q))
    }

    /// An exact attractor point: the fixed point of map 1 pushed through
    /// the word. Lies in the word's cylinder set.
    pub fn rep_point(&self, w: &Word) -> Result<RatPoint> {
        let anchor = self.maps[0].fixed_point();
        Ok(self.compose(w)?.apply(&anchor))
    }

    /// Certified separation bounds at the given cover depth.
    ///
    /// lo: min distance between the depth-m rectangle covers of distinct
    /// first-level images (a certified lower bound for the true gap).
    /// hi: min distance between exact attractor points of distinct
    /// first-level images (an upper bound; any point pair witnesses it).
    /// The point cloud depth is capped: hi is for reporting and stopping
    /// rules, not the certificate.
    pub fn separation_delta(&self, depth: usize) -> DeltaBounds {
        separation_delta_impl(&self.maps, &self.q, depth)
    }

    /// Scans depths 1..=max_depth and certifies at the first depth whose
    /// rectangle covers separate. The spec's own status was computed with
    /// the default policy at validation time.
    pub fn ssc_check(&self, max_depth: usize) -> SscStatus {
        for m in 1..=max_depth {
            let d = self.separation_delta(m);
            if d.lo.is_positive() {
                return SscStatus::Certified { depth: m, delta_lo: d.lo };
            }
        }
        SscStatus::Inconclusive { max_depth }
    }

    /// Copy with every map's translation scaled by the factor; the
    /// attractor and all its gaps scale alike. Offered for callers who
    /// want a particular diameter normalization; nothing here requires it.
    pub fn rescaled(&self, factor: &Rat) -> Result<CarpetSpec> {
        assert!(factor.is_positive(), "rescale factor must be positive");
        let maps = self
            .maps
            .iter()
            .map(|m| {
                AffineMap2D::new(
                    m.a1.clone(),
                    m.a2.clone(),
                    &m.b1 * factor,
                    &m.b2 * factor,
                )
            })
            .collect();
        validate_carpet(maps)
    }
}

/// Validates the map list and derives every certified constant.
pub fn validate_carpet(maps: Vec<AffineMap2D>) -> Result<CarpetSpec> {
    validate_carpet_with_depth_cap(maps, DEFAULT_SSC_DEPTH_CAP)
}

pub fn validate_carpet_with_depth_cap(
    maps: Vec<AffineMap2D>,
    ssc_depth_cap: usize,
) -> Result<CarpetSpec> {
    if maps.len() < 2 {
        return Err(Error::EmptySystem);
    }
    for (k, m) in maps.iter().enumerate() {
        for (axis, a) in [(1u8, &m.a1), (2u8, &m.a2)] {
            if a.is_zero() {
                return Err(Error::Degenerate { index: k + 1, axis });
            }
            if a.abs() >= Rat::one() {
                return Err(Error::NonContractive { index: k + 1, axis });
            }
        }
    }

    let alpha_bar = maps.iter().map(AffineMap2D::alpha1).max().unwrap();
    let alpha_under = maps.iter().map(AffineMap2D::alpha2).min().unwrap();
    let beta = maps
        .iter()
        .map(|m| m.alpha2() / m.alpha1())
        .max()
        .unwrap();

    let q = bounding_rect_exact(&maps)?;
    let q_f64 = q.to_f64();
    let fmaps = maps.iter().map(AffineMap2D::to_f64).collect();

    // Default certification policy: deepen until the covers separate, stop
    // early once cylinder size is well below the best point-pair gap seen
    // (at that point more depth cannot reveal a separation that point
    // samples already contradict), and cap the work.
    let diam_sq = q.diam_sq();
    let mut ssc = SscStatus::Inconclusive { max_depth: ssc_depth_cap };
    let mut delta = DeltaBounds { lo: Rat::zero(), hi: Rat::zero() };
    for m in 1..=ssc_depth_cap {
        let d = separation_delta_impl(&maps, &q, m);
        let certified = d.lo.is_positive();
        let hi = d.hi.clone();
        delta = d;
        if certified {
            ssc = SscStatus::Certified { depth: m, delta_lo: delta.lo.clone() };
            break;
        }
        // alpha_bar^m * diam(Q) < hi/4, compared in squares to stay exact.
        let scale = alpha_bar.pow(m as i32);
        let lhs_sq = &scale * &scale * &diam_sq;
        let rhs = hi / rat_int(4);
        if lhs_sq < &rhs * &rhs {
            ssc = SscStatus::Inconclusive { max_depth: m };
            break;
        }
    }

    Ok(CarpetSpec {
        maps,
        fmaps,
        alpha_bar,
        alpha_under,
        beta,
        q,
        q_f64,
        delta,
        ssc,
    })
}

/// Point cloud depth cap for the upper separation bound. Clouds are nested
/// across depths (appending symbol 1 fixes the anchor), so the bound stays
/// monotone even when capped.
const DELTA_HI_CLOUD_DEPTH: usize = 3;

fn separation_delta_impl(maps: &[AffineMap2D], q: &RatRect, depth: usize) -> DeltaBounds {
    let n = maps.len();
    let roots: Vec<BbNode> = maps
        .iter()
        .map(|m| BbNode { rect: m.apply_rect(q), map: m.clone(), depth: 1 })
        .collect();

    // Lower bound: branch-and-bound closest pair between the depth-m
    // rectangle covers of distinct first-level images. Subtree pairs whose
    // root gap already exceeds the best leaf gap are pruned.
    let mut best: Option<(Rat, Rat, Rat)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            bb_min_gap(maps, q, &roots[i], &roots[j], depth, &mut best);
        }
    }
    let lo = match best {
        Some((_, dx, dy)) if dx.is_zero() => dy,
        Some((_, dx, dy)) if dy.is_zero() => dx,
        Some((d2, _, _)) => sqrt_lower(&d2, SQRT_BITS),
        None => Rat::zero(),
    };

    // Upper bound: closest pair of exact attractor points across groups,
    // from clouds of capped depth.
    let cloud_depth = depth.min(DELTA_HI_CLOUD_DEPTH);
    let anchor = maps[0].fixed_point();
    let mut clouds: Vec<Vec<RatPoint>> = Vec::with_capacity(n);
    for first in maps {
        let mut pts = Vec::new();
        collect_points(maps, first.clone(), cloud_depth - 1, &anchor, &mut pts);
        clouds.push(pts);
    }
    let mut best_point_sq: Option<Rat> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            for pa in &clouds[i] {
                for pb in &clouds[j] {
                    let d2 = pa.dist_sq(pb);
                    if best_point_sq.as_ref().is_none_or(|b| d2 < *b) {
                        best_point_sq = Some(d2);
                    }
                }
            }
        }
    }
    let hi = match best_point_sq {
        Some(d2) => sqrt_upper(&d2, SQRT_BITS),
        None => Rat::zero(),
    };
    DeltaBounds { lo, hi }
}

struct BbNode {
    rect: RatRect,
    map: AffineMap2D,
    depth: usize,
}

/// Minimizes the squared gap between depth-`target` rectangles below two
/// cover nodes. `best` holds (gap squared, x gap, y gap) of the closest
/// leaf pair found so far; the gap of an ancestor pair lower-bounds all
/// its leaf pairs, which justifies pruning.
fn bb_min_gap(
    maps: &[AffineMap2D],
    q: &RatRect,
    a: &BbNode,
    b: &BbNode,
    target: usize,
    best: &mut Option<(Rat, Rat, Rat)>,
) {
    let (dx, dy) = a.rect.gaps_to_rect(&b.rect);
    let d2 = &dx * &dx + &dy * &dy;
    if let Some((bd2, _, _)) = best {
        if d2 >= *bd2 {
            return;
        }
    }
    if a.depth == target && b.depth == target {
        *best = Some((d2, dx, dy));
        return;
    }
    // Expand the shallower node; visit closer children first so the best
    // bound tightens early.
    let (expand, fixed) = if a.depth <= b.depth && a.depth < target {
        (a, b)
    } else {
        (b, a)
    };
    let mut children: Vec<(Rat, BbNode)> = maps
        .iter()
        .map(|m| {
            let cm = expand.map.after(m);
            let rect = cm.apply_rect(q);
            let (cdx, cdy) = rect.gaps_to_rect(&fixed.rect);
            let cd2 = &cdx * &cdx + &cdy * &cdy;
            (cd2, BbNode { rect, map: cm, depth: expand.depth + 1 })
        })
        .collect();
    children.sort_by(|x, y| x.0.cmp(&y.0));
    for (_, child) in &children {
        bb_min_gap(maps, q, child, fixed, target, best);
    }
}

fn collect_points(
    maps: &[AffineMap2D],
    acc: AffineMap2D,
    remaining: usize,
    anchor: &RatPoint,
    points: &mut Vec<RatPoint>,
) {
    if remaining == 0 {
        points.push(acc.apply(anchor));
        return;
    }
    for m in maps {
        collect_points(maps, acc.after(m), remaining - 1, anchor, points);
    }
}

/// Exact smallest invariant rectangle.
///
/// Each horizontal extent endpoint is attained at the fixed point of the
/// hull recursion by some (map, endpoint) pair; the recursion is a
/// contraction, so the fixed point is unique. All O((2N)^2) attainment
/// patterns are solved as rational linear systems and the candidate is
/// verified exactly against the recursion. Same for the vertical axis.
pub fn bounding_rect_exact(maps: &[AffineMap2D]) -> Result<RatRect> {
    let horiz: Vec<(Rat, Rat)> = maps.iter().map(|m| (m.a1.clone(), m.b1.clone())).collect();
    let vert: Vec<(Rat, Rat)> = maps.iter().map(|m| (m.a2.clone(), m.b2.clone())).collect();
    let (x0, x1) = invariant_extent_exact(&horiz).ok_or(Error::NoInvariantStart)?;
    let (y0, y1) = invariant_extent_exact(&vert).ok_or(Error::NoInvariantStart)?;
    Ok(RatRect::new(x0, x1, y0, y1))
}

/// Exact invariant extent [lo, hi] for 1-D maps x -> a x + b:
///   lo = min_i min(a_i lo + b_i, a_i hi + b_i),
///   hi = max_i max(a_i lo + b_i, a_i hi + b_i).
fn invariant_extent_exact(maps: &[(Rat, Rat)]) -> Option<(Rat, Rat)> {
    let n = maps.len();
    // Candidate patterns: lo attained by (i, e) and hi by (j, e'), where
    // e, e' pick which endpoint feeds the map.
    for i in 0..n {
        for e_lo in [false, true] {
            for j in 0..n {
                for e_hi in [false, true] {
                    if let Some((lo, hi)) = solve_extent_pattern(maps, i, e_lo, j, e_hi) {
                        if verify_extent(maps, &lo, &hi) {
                            return Some((lo, hi));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Solves lo = a_i * (e_lo ? hi : lo) + b_i, hi = a_j * (e_hi ? hi : lo) + b_j.
fn solve_extent_pattern(
    maps: &[(Rat, Rat)],
    i: usize,
    e_lo: bool,
    j: usize,
    e_hi: bool,
) -> Option<(Rat, Rat)> {
    let (ai, bi) = &maps[i];
    let (aj, bj) = &maps[j];
    let one = Rat::one();
    match (e_lo, e_hi) {
        (false, true) => {
            // Decoupled fixed points.
            Some((bi / (&one - ai), bj / (&one - aj)))
        }
        (false, false) => {
            let lo = bi / (&one - ai);
            let hi = aj * &lo + bj;
            Some((lo, hi))
        }
        (true, true) => {
            let hi = bj / (&one - aj);
            let lo = ai * &hi + bi;
            Some((lo, hi))
        }
        (true, false) => {
            // lo = a_i hi + b_i, hi = a_j lo + b_j.
            let denom = &one - ai * aj;
            if denom.is_zero() {
                return None;
            }
            let lo = (ai * bj + bi) / &denom;
            let hi = aj * &lo + bj;
            Some((lo, hi))
        }
    }
}

fn verify_extent(maps: &[(Rat, Rat)], lo: &Rat, hi: &Rat) -> bool {
    if lo > hi {
        return false;
    }
    let mut min: Option<Rat> = None;
    let mut max: Option<Rat> = None;
    for (a, b) in maps {
        for x in [lo, hi] {
            let v = a * x + b;
            if min.as_ref().is_none_or(|m| v < *m) {
                min = Some(v.clone());
            }
            if max.as_ref().is_none_or(|m| v > *m) {
                max = Some(v);
            }
        }
    }
    min.as_ref() == Some(lo) && max.as_ref() == Some(hi)
}

/// Float hull iteration, as an independently checkable variant of
/// [`bounding_rect_exact`]: iterates H -> hull(union of map images) from a
/// coarse invariant superset until the coordinatewise change drops below
/// tol, and reports the certified outer error tol / (1 - alpha_bar).
pub fn bounding_rect_iterated(maps: &[AffineMap2D], tol: f64) -> Result<(Rect, f64)> {
    if maps.is_empty() {
        return Err(Error::EmptySystem);
    }
    let fmaps: Vec<FMap> = maps.iter().map(AffineMap2D::to_f64).collect();
    let alpha_bar = maps
        .iter()
        .map(|m| to_f64(&m.alpha1()))
        .fold(0.0f64, f64::max);
    // Coarse invariant superset: |x| <= max|b| / (1 - max|a|) in each axis.
    let bx = fmaps.iter().map(|m| m.b1.abs()).fold(0.0f64, f64::max);
    let by = fmaps.iter().map(|m| m.b2.abs()).fold(0.0f64, f64::max);
    let ax = fmaps.iter().map(|m| m.a1.abs()).fold(0.0f64, f64::max);
    let ay = fmaps.iter().map(|m| m.a2.abs()).fold(0.0f64, f64::max);
    let mx = (bx / (1.0 - ax)).max(1.0);
    let my = (by / (1.0 - ay)).max(1.0);
    let mut h = Rect::new(-mx, mx, -my, my);
    for _ in 0..10_000 {
        let mut img: Option<Rect> = None;
        for m in &fmaps {
            let r = m.apply_rect(&h);
            img = Some(match img {
                None => r,
                Some(acc) => Rect::new(
                    acc.x0.min(r.x0),
                    acc.x1.max(r.x1),
                    acc.y0.min(r.y0),
                    acc.y1.max(r.y1),
                ),
            });
        }
        let next = img.expect("nonempty map list");
        let change = (next.x0 - h.x0)
            .abs()
            .max((next.x1 - h.x1).abs())
            .max((next.y0 - h.y0).abs())
            .max((next.y1 - h.y1).abs());
        h = next;
        if change < tol {
            return Ok((h, tol / (1.0 - alpha_bar)));
        }
    }
    Err(Error::NoInvariantStart)
}
