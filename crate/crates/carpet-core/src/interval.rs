//! Finite unions of closed intervals on the line.
//!
//! Two flavors: `RatIntervalUnion` keeps exact rational endpoints and backs
//! the condition sweeps and projection outer approximations; `IntervalUnion1D`
//! is the f64 view used by slice estimators and tangent fits. Both are kept
//! canonical: sorted, disjoint, with touching intervals merged.

use crate::rat::{to_f64, Rat};

#[derive(Debug, Clone, PartialEq)]
pub struct RatIntervalUnion {
    intervals: Vec<(Rat, Rat)>,
}

impl RatIntervalUnion {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn new(mut pairs: Vec<(Rat, Rat)>) -> Self {
        pairs.retain(|(lo, hi)| lo <= hi);
        pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.intervals.iter().any(|(lo, hi)| lo <= x && x <= hi)
    }

    /// True iff [lo, hi] sits inside a single member interval. Members are
    /// disjoint with gaps of positive width, so an interval covered by the
    /// union is covered by one member.
    pub fn covers_interval(&self, lo: &Rat, hi: &Rat) -> bool {
        let idx = self.intervals.partition_point(|(a, _)| a <= lo);
        if idx == 0 {
            return false;
        }
        let (a, b) = &self.intervals[idx - 1];
        a <= lo && hi <= b
    }

    /// Adds one interval, keeping the union canonical.
    pub fn insert(&mut self, lo: Rat, hi: Rat) {
        if lo > hi {
            return;
        }
        let mut pairs = std::mem::take(&mut self.intervals);
        pairs.push((lo, hi));
        *self = Self::new(pairs);
    }

    /// Open gaps of positive width between `lo` and `hi` not covered by the
    /// union. Returned as endpoint pairs; the gaps themselves are open.
    pub fn complement_within(&self, lo: &Rat, hi: &Rat) -> Vec<(Rat, Rat)> {
        let mut gaps = Vec::new();
        let mut cursor = lo.clone();
        for (a, b) in &self.intervals {
            if b < lo {
                continue;
            }
            if a > hi {
                break;
            }
            if *a > cursor {
                gaps.push((cursor.clone(), a.clone()));
            }
            if *b > cursor {
                cursor = b.clone();
            }
        }
        if cursor < *hi {
            gaps.push((cursor, hi.clone()));
        }
        gaps.retain(|(a, b)| a < b);
        gaps
    }

    pub fn to_f64(&self) -> IntervalUnion1D {
        IntervalUnion1D::new(
            self.intervals
                .iter()
                .map(|(lo, hi)| (to_f64(lo), to_f64(hi)))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion1D {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion1D {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn new(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.retain(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi);
        pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn total_len(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Closed eps-fattening, canonicalized. eps must be nonnegative.
    pub fn fatten(&self, eps: f64) -> Self {
        assert!(eps >= 0.0, "negative fattening radius");
        Self::new(
            self.intervals
                .iter()
                .map(|&(lo, hi)| (lo - eps, hi + eps))
                .collect(),
        )
    }

    /// Distance from x to the union; None when empty.
    pub fn dist_to(&self, x: f64) -> Option<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| {
                if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                }
            })
            .min_by(|a, b| a.partial_cmp(b).expect("finite"))
    }

    /// Length of the largest open subinterval of (x-r, x+r) disjoint from
    /// the union. Gaps truncated by the window edges count.
    pub fn largest_hole_in_window(&self, x: f64, r: f64) -> f64 {
        let (wlo, whi) = (x - r, x + r);
        let mut best: f64 = 0.0;
        let mut cursor = wlo;
        for &(lo, hi) in &self.intervals {
            if hi < wlo {
                continue;
            }
            if lo > whi {
                break;
            }
            if lo > cursor {
                best = best.max(lo.min(whi) - cursor);
            }
            cursor = cursor.max(hi);
        }
        if cursor < whi {
            best = best.max(whi - cursor);
        }
        best
    }

    /// Largest |s - x| over points s of the union inside [x-r, x+r];
    /// None when the window misses the union entirely.
    pub fn max_dist_within_window(&self, x: f64, r: f64) -> Option<f64> {
        let (wlo, whi) = (x - r, x + r);
        let mut best: Option<f64> = None;
        for &(lo, hi) in &self.intervals {
            let clo = lo.max(wlo);
            let chi = hi.min(whi);
            if clo > chi {
                continue;
            }
            let cand = (clo - x).abs().max((chi - x).abs());
            best = Some(best.map_or(cand, |b: f64| b.max(cand)));
        }
        best
    }

    /// True when part of the union lies outside [x-r, x+r].
    pub fn escapes_window(&self, x: f64, r: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| lo < x - r || hi > x + r)
    }

    /// True when the union meets the closed annulus [x-r, x+r] minus the
    /// open ball of radius r/d around x.
    pub fn meets_annulus(&self, x: f64, r: f64, d: f64) -> bool {
        let inner = r / d;
        self.intervals.iter().any(|&(lo, hi)| {
            // Intersect with [x-r, x-inner] or [x+inner, x+r].
            let left = lo.max(x - r) <= hi.min(x - inner);
            let right = lo.max(x + inner) <= hi.min(x + r);
            left || right
        })
    }
}
