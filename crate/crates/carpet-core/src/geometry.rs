//! Point-set and slice geometry: attractor sampling, Hausdorff distances,
//! vertical slices, neighborhoods.
//!
//! Point sets are f64 with a stated resolution (certified Hausdorff error
//! to the set they stand in for). Slices are computed exactly and exposed
//! both as rational and f64 interval unions.

use crate::error::{Error, Result};
use crate::ifs::CarpetSpec;
use crate::interval::{IntervalUnion1D, RatIntervalUnion};
use crate::rat::{rat_from_f64, rat_int, Rat};
use rayon::prelude::*;

/// Finite planar sample with a certified Hausdorff error bound to the set
/// it represents.
#[derive(Debug, Clone)]
pub struct PointSet2D {
    pub points: Vec<(f64, f64)>,
    pub resolution: f64,
}

impl PointSet2D {
    pub fn new(points: Vec<(f64, f64)>, resolution: f64) -> Self {
        assert!(resolution >= 0.0, "resolution is an error bound");
        Self { points, resolution }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One representative point per depth-m word: the image of Q's center.
///
/// Every point of the attractor shares a depth-m cylinder with some sample,
/// so the two sets are within max cylinder diameter of each other. The
/// reported resolution bounds that by diam(Q) s^m with s the largest
/// contraction in either axis.
pub fn attractor_points(spec: &CarpetSpec, depth: usize, max_points: u64) -> Result<PointSet2D> {
    let n = spec.n_maps() as u64;
    let count = n
        .checked_pow(depth as u32)
        .ok_or(Error::DepthBudgetExceeded { needed: u64::MAX, budget: max_points })?;
    if count > max_points {
        return Err(Error::DepthBudgetExceeded { needed: count, budget: max_points });
    }

    let q = spec.q_f64();
    let (cx, cy) = q.center();
    let s = spec
        .fmaps()
        .iter()
        .map(|m| m.a1.abs().max(m.a2.abs()))
        .fold(0.0f64, f64::max);
    let resolution = q.diam() * s.powi(depth as i32);

    let mut points = Vec::with_capacity(count as usize);
    let mut stack = vec![(crate::ifs::FMap::identity(), 0usize)];
    while let Some((map, d)) = stack.pop() {
        if d == depth {
            points.push(map.apply(cx, cy));
            continue;
        }
        for m in spec.fmaps() {
            stack.push((map.after(m), d + 1));
        }
    }
    Ok(PointSet2D::new(points, resolution))
}

/// Past this many point pairs the directed distances switch from the
/// all-pairs scan to a bucket grid.
const BRUTE_FORCE_PAIR_LIMIT: u64 = 4_000_000;

/// Exact symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &PointSet2D, b: &PointSet2D) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(hausdorff_points(&a.points, &b.points))
}

fn hausdorff_points(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let d1 = directed_sup_sq(a, b);
    let d2 = directed_sup_sq(b, a);
    d1.max(d2).sqrt()
}

/// sup over `from` of the squared distance to `to`.
fn directed_sup_sq(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    let pairs = from.len() as u64 * to.len() as u64;
    if pairs <= BRUTE_FORCE_PAIR_LIMIT {
        from.par_iter()
            .map(|p| nearest_sq_scan(*p, to))
            .reduce(|| 0.0, f64::max)
    } else {
        let grid = BucketGrid::build(to);
        from.par_iter()
            .map(|p| grid.nearest_sq(*p, to))
            .reduce(|| 0.0, f64::max)
    }
}

fn nearest_sq_scan(p: (f64, f64), to: &[(f64, f64)]) -> f64 {
    to.iter()
        .map(|q| dist_sq(p, *q))
        .fold(f64::INFINITY, f64::min)
}

fn dist_sq(p: (f64, f64), q: (f64, f64)) -> f64 {
    let dx = p.0 - q.0;
    let dy = p.1 - q.1;
    dx * dx + dy * dy
}

/// Uniform bucket grid for nearest-point queries. The ring search stops
/// once every unvisited bucket is provably farther than the best hit, so
/// the result equals the all-pairs minimum exactly.
struct BucketGrid {
    cell: f64,
    x0: f64,
    y0: f64,
    cols: i64,
    rows: i64,
    buckets: Vec<Vec<u32>>,
}

impl BucketGrid {
    fn build(points: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in points {
            x0 = x0.min(*x);
            x1 = x1.max(*x);
            y0 = y0.min(*y);
            y1 = y1.max(*y);
        }
        let side = (points.len() as f64).sqrt().ceil().max(1.0);
        let cell = ((x1 - x0).max(y1 - y0) / side).max(f64::MIN_POSITIVE);
        let cols = (((x1 - x0) / cell).floor() as i64 + 1).max(1);
        let rows = (((y1 - y0) / cell).floor() as i64 + 1).max(1);
        let mut buckets = vec![Vec::new(); (cols * rows) as usize];
        for (k, (x, y)) in points.iter().enumerate() {
            let c = (((x - x0) / cell).floor() as i64).clamp(0, cols - 1);
            let r = (((y - y0) / cell).floor() as i64).clamp(0, rows - 1);
            buckets[(r * cols + c) as usize].push(k as u32);
        }
        Self { cell, x0, y0, cols, rows, buckets }
    }

    fn nearest_sq(&self, p: (f64, f64), points: &[(f64, f64)]) -> f64 {
        let pc = (((p.0 - self.x0) / self.cell).floor() as i64).clamp(0, self.cols - 1);
        let pr = (((p.1 - self.y0) / self.cell).floor() as i64).clamp(0, self.rows - 1);
        let mut best = f64::INFINITY;
        let max_ring = self.cols.max(self.rows);
        for ring in 0..=max_ring {
            // Any point in an unvisited bucket is at least (ring-1) cells
            // away from p's bucket, in every direction.
            if ring >= 2 {
                let safe = (ring - 1) as f64 * self.cell;
                if best <= safe * safe {
                    break;
                }
            }
            for r in (pr - ring)..=(pr + ring) {
                if r < 0 || r >= self.rows {
                    continue;
                }
                for c in (pc - ring)..=(pc + ring) {
                    if c < 0 || c >= self.cols {
                        continue;
                    }
                    if (r - pr).abs() != ring && (c - pc).abs() != ring {
                        continue;
                    }
                    for &idx in &self.buckets[(r * self.cols + c) as usize] {
                        best = best.min(dist_sq(p, points[idx as usize]));
                    }
                }
            }
        }
        best
    }
}

/// Hausdorff distance of the two sets clipped to a closed ball.
pub fn restricted_hausdorff(
    a: &PointSet2D,
    b: &PointSet2D,
    center: (f64, f64),
    radius: f64,
) -> Result<f64> {
    let r_sq = radius * radius;
    let clip = |s: &PointSet2D| -> Vec<(f64, f64)> {
        s.points
            .iter()
            .copied()
            .filter(|p| dist_sq(*p, center) <= r_sq)
            .collect()
    };
    let ca = clip(a);
    let cb = clip(b);
    if ca.is_empty() || cb.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(hausdorff_points(&ca, &cb))
}

/// Exact outer cover of the vertical slice through x: y-extents of the
/// depth-m construction rectangles whose x-extent contains x, with
/// endpoint membership closed on both sides.
#[derive(Debug, Clone)]
pub struct SliceCover {
    pub union: RatIntervalUnion,
    /// Largest height among contributing rectangles: the one-sided
    /// Hausdorff error of the cover to the true slice.
    pub max_rect_height: Rat,
    pub rect_count: usize,
}

impl SliceCover {
    pub fn to_f64(&self) -> IntervalUnion1D {
        self.union.to_f64()
    }
}

/// Depth-m slice cover at an exact abscissa. `y_window`, when set, prunes
/// rectangles whose y-extent misses the closed window; deep slices inside
/// a known band stay cheap that way. The node budget caps visited
/// cylinders.
pub fn vertical_slice_rat(
    spec: &CarpetSpec,
    x: &Rat,
    depth: usize,
    y_window: Option<(&Rat, &Rat)>,
    node_budget: u64,
) -> Result<SliceCover> {
    let q = spec.q();
    let mut intervals: Vec<(Rat, Rat)> = Vec::new();
    let mut max_height = rat_int(0);
    let mut count = 0usize;
    let mut visited = 0u64;
    // Work items carry both axis parts of the composed map.
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

/// f64 convenience wrapper over [`vertical_slice_rat`]; the abscissa is
/// taken at its exact f64 value.
pub fn vertical_slice(
    spec: &CarpetSpec,
    x: f64,
    depth: usize,
    node_budget: u64,
) -> Result<IntervalUnion1D> {
    let xr = rat_from_f64(x).ok_or(Error::ScaleOutOfRange { t: x, reason: "abscissa must be finite" })?;
    Ok(vertical_slice_rat(spec, &xr, depth, None, node_budget)?.to_f64())
}

/// Closed eps-fattening of an interval union.
pub fn epsilon_neighborhood_intervals(s: &IntervalUnion1D, eps: f64) -> Result<IntervalUnion1D> {
    if !(eps >= 0.0) {
        return Err(Error::NegativeEpsilon);
    }
    Ok(s.fatten(eps))
}

/// eps-neighborhood of a represented set, in the only form a point sample
/// can carry it: same points, resolution enlarged by eps.
pub fn epsilon_neighborhood_points(s: &PointSet2D, eps: f64) -> Result<PointSet2D> {
    if !(eps >= 0.0) {
        return Err(Error::NegativeEpsilon);
    }
    Ok(PointSet2D::new(s.points.clone(), s.resolution + eps))
}
