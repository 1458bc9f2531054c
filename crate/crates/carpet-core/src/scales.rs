//! Scale indices and their certified sandwich.
//!
//! For a scale t and an infinite code 𝚒, three indices matter: the largest
//! depth whose cylinders are still provably farther apart than t, the
//! smallest depth whose cylinders are already thinner than t, and between
//! them the exact depth n(𝚒,t) up to which every other cylinder of that
//! level avoids the closed ball B(π(𝚒), t). Everything here is decided in
//! exact rational arithmetic: a certified verdict cannot flip.

use crate::error::{Error, Result};
use crate::ifs::{AffineMap2D, CarpetSpec};
use crate::rat::{to_f64, Rat};
use crate::rect::RatPoint;
use crate::word::{PeriodicWord, Word};
use num::{One, Signed};

/// Exact coding-map image of an eventually periodic word: the cycle's
/// fixed point pushed through the preperiod.
pub fn coding_point(spec: &CarpetSpec, word: &PeriodicWord) -> Result<RatPoint> {
    let pre = spec.compose(&word.prefix)?;
    let cyc = spec.compose(&word.cycle)?;
    Ok(pre.apply(&cyc.fixed_point()))
}

fn check_scale(spec: &CarpetSpec, t: &Rat) -> Result<()> {
    let _ = spec;
    if !t.is_positive() || *t >= Rat::one() {
        return Err(Error::ScaleOutOfRange {
            t: to_f64(t),
            reason: "scale must lie strictly between 0 and 1",
        });
    }
    Ok(())
}

/// min{ n ≥ 1 : alpha_bar^n < t }. Strict inequality.
pub fn n_star(spec: &CarpetSpec, t: &Rat) -> Result<u64> {
    check_scale(spec, t)?;
    let a = spec.alpha_bar();
    let mut p = a.clone();
    let mut n = 1u64;
    while p >= *t {
        p *= a;
        n += 1;
    }
    Ok(n)
}

/// max{ n ≥ 1 : alpha_under^n · delta_lo > t }, with the certified lower
/// separation bound standing in for the true gap. The certified index is
/// at most the ideal one, which keeps the sandwich conservative.
pub fn n_lower_star(spec: &CarpetSpec, t: &Rat) -> Result<u64> {
    check_scale(spec, t)?;
    let a = spec.alpha_under();
    let d = spec.delta_lo();
    let mut p = a * d;
    if p <= *t {
        return Err(Error::EmptyIndexSet);
    }
    let mut n = 1u64;
    loop {
        let next = &p * a;
        if next <= *t {
            return Ok(n);
        }
        p = next;
        n += 1;
    }
}

/// Outcome of the exact cylinder-avoidance scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NOfOutcome {
    /// n(𝚒,t) decided exactly. `out_of_regime` marks n = 0: already the
    /// first level has a foreign cylinder meeting the ball, so t is too
    /// large for the index to exist as a max over {1, 2, ...}.
    Certified { n: u64, out_of_regime: bool },
    /// Some level could not be decided at this certification depth; the
    /// true index lies in [lower, upper]. Raising cert_depth shrinks it.
    Undecided { lower: u64, upper: u64 },
}

impl NOfOutcome {
    pub fn certified_in_regime(&self) -> Option<u64> {
        match self {
            NOfOutcome::Certified { n, out_of_regime: false } => Some(*n),
            _ => None,
        }
    }
}

/// Per-level verdict of the avoidance decision.
enum LevelVerdict {
    /// Every other level-n cylinder set provably avoids the closed ball.
    Avoids,
    /// Some other level-n cylinder set provably meets the closed ball.
    Meets,
    /// Rectangle covers at this certification depth cannot tell.
    Unknown,
}

/// Exact n(𝚒,t): the largest n such that every level-n cylinder set other
/// than the code's own avoids the closed ball B(π(𝚒), t).
///
/// The property is inherited downward (a level-n cylinder is a union of
/// level-(n+1) ones), so levels are scanned upward from 1: the index is
/// the last good level before the first bad one. Avoidance of a candidate
/// is certified through its depth-(n + cert_depth) rectangle cover;
/// meeting is certified by an exact attractor point inside the ball.
/// π(𝚒) itself is exact, so there is no localization slack anywhere.
pub fn n_of(
    spec: &CarpetSpec,
    word: &PeriodicWord,
    t: &Rat,
    cert_depth: usize,
) -> Result<NOfOutcome> {
    check_scale(spec, t)?;
    let center = coding_point(spec, word)?;
    let t_sq = t * t;
    // The scan is capped a little above the theoretical ceiling; under the
    // separation hypotheses the first bad level appears by then.
    let cap = n_star(spec, t)? + 4;

    let mut last_good = 0u64;
    let mut first_bad: Option<u64> = None;
    let mut saw_unknown = false;
    for n in 1..=cap {
        match decide_level(spec, word, &center, &t_sq, n as usize, cert_depth)? {
            LevelVerdict::Avoids => last_good = n,
            LevelVerdict::Meets => {
                first_bad = Some(n);
                break;
            }
            LevelVerdict::Unknown => {
                saw_unknown = true;
            }
        }
    }

    match first_bad {
        Some(bad) if !saw_unknown || last_good == bad - 1 => Ok(NOfOutcome::Certified {
            n: bad - 1,
            out_of_regime: bad == 1,
        }),
        Some(bad) => Ok(NOfOutcome::Undecided { lower: last_good, upper: bad - 1 }),
        None => Ok(NOfOutcome::Undecided { lower: last_good, upper: cap }),
    }
}

fn decide_level(
    spec: &CarpetSpec,
    word: &PeriodicWord,
    center: &RatPoint,
    t_sq: &Rat,
    n: usize,
    cert_depth: usize,
) -> Result<LevelVerdict> {
    let target: Vec<usize> = (0..n).map(|k| word.symbol_at(k)).collect();
    // Candidates: level-n words other than the target whose rectangle
    // meets the ball. Subtrees whose rectangle already avoids it are
    // pruned as certified-avoiding.
    let mut candidates: Vec<AffineMap2D> = Vec::new();
    let mut stack: Vec<(AffineMap2D, usize, bool)> = vec![(AffineMap2D::identity(), 0, true)];
    while let Some((map, d, on_target_path)) = stack.pop() {
        if d > 0 {
            let rect = map.apply_rect(spec.q());
            if rect.dist_sq_to_point(center) > *t_sq {
                continue;
            }
        }
        if d == n {
            if !on_target_path {
                candidates.push(map);
            }
            continue;
        }
        for (k, m) in spec.maps().iter().enumerate() {
            let child_on_target = on_target_path && (k + 1) == target[d];
            stack.push((map.after(m), d + 1, child_on_target));
        }
    }

    let mut unknown = false;
    for cand in candidates {
        match decide_candidate(spec, &cand, center, t_sq, cert_depth) {
            LevelVerdict::Meets => return Ok(LevelVerdict::Meets),
            LevelVerdict::Unknown => unknown = true,
            LevelVerdict::Avoids => {}
        }
    }
    Ok(if unknown { LevelVerdict::Unknown } else { LevelVerdict::Avoids })
}

/// Decides one surviving candidate by refining inside it.
///
/// Meets: some attractor point (a representative of any refinement node)
/// lies in the closed ball. Avoids: every refinement leaf rectangle stays
/// outside. Leaves that keep straddling the boundary leave the candidate
/// unknown.
fn decide_candidate(
    spec: &CarpetSpec,
    cand: &AffineMap2D,
    center: &RatPoint,
    t_sq: &Rat,
    cert_depth: usize,
) -> LevelVerdict {
    let anchor = spec.maps()[0].fixed_point();
    let mut all_leaves_avoid = true;
    let mut stack: Vec<(AffineMap2D, usize)> = vec![(cand.clone(), 0)];
    while let Some((map, d)) = stack.pop() {
        let rect = map.apply_rect(spec.q());
        if rect.dist_sq_to_point(center) > *t_sq {
            continue;
        }
        if map.apply(&anchor).dist_sq(center) <= *t_sq {
            return LevelVerdict::Meets;
        }
        if d == cert_depth {
            all_leaves_avoid = false;
            continue;
        }
        for m in spec.maps() {
            stack.push((map.after(m), d + 1));
        }
    }
    if all_leaves_avoid {
        LevelVerdict::Avoids
    } else {
        LevelVerdict::Unknown
    }
}

/// One verified sample of the scale-index sandwich and the cylinder
/// height bounds.
#[derive(Debug, Clone)]
pub struct ScaleReport {
    pub t: Rat,
    /// 𝚒 restricted to the certified index (empty when out of regime).
    pub prefix: Word,
    /// None when no level satisfies the lower-index inequality at this t.
    pub n_lower: Option<u64>,
    pub n_exact: NOfOutcome,
    pub n_upper: u64,
    /// Vertical contraction of the prefix map, when certified in regime.
    pub ratio: Option<Rat>,
    /// alpha_under · t, the certified lower bound for the ratio.
    pub lo_bound: Rat,
    /// delta_lo^{-1} · t, the certified upper bound for the ratio.
    pub hi_bound: Rat,
    pub pass: bool,
}

/// Verifies the sandwich n_lower ≤ n(𝚒,t) ≤ n_upper and the two-sided
/// height bound alpha_under·t ≤ alpha2(𝚒|_t) ≤ delta_lo^{-1}·t on each
/// sample. Requires a certified separation gap; the reported verdicts are
/// exact rational comparisons.
pub fn verify_littlethings(
    spec: &CarpetSpec,
    samples: &[(PeriodicWord, Rat)],
    cert_depth: usize,
) -> Result<Vec<ScaleReport>> {
    verify_littlethings_with_delta(spec, samples, cert_depth, spec.delta_lo())
}

/// Same verification against an explicit separation lower bound. Exists
/// so harnesses can demonstrate that a corrupted bound is caught.
pub fn verify_littlethings_with_delta(
    spec: &CarpetSpec,
    samples: &[(PeriodicWord, Rat)],
    cert_depth: usize,
    delta_lo: &Rat,
) -> Result<Vec<ScaleReport>> {
    if !spec.ssc_certified() {
        return Err(Error::Undecidable {
            detail: "separation gap is not certified for this system".into(),
        });
    }
    if !delta_lo.is_positive() {
        return Err(Error::Undecidable { detail: "separation bound must be positive".into() });
    }
    let mut reports = Vec::with_capacity(samples.len());
    for (word, t) in samples {
        let n_upper = n_star(spec, t)?;
        let n_lower = match n_lower_star(spec, t) {
            Ok(n) => Some(n),
            Err(Error::EmptyIndexSet) => None,
            Err(e) => return Err(e),
        };
        let n_exact = n_of(spec, word, t, cert_depth)?;
        let lo_bound = spec.alpha_under() * t;
        let hi_bound = t / delta_lo;
        let (prefix, ratio, pass) = match &n_exact {
            NOfOutcome::Certified { n, out_of_regime: false } => {
                let prefix = word.prefix_of(*n as usize);
                let map = spec.compose(&prefix)?;
                let ratio = map.alpha2();
                let sandwich = n_lower.map_or(true, |lo| lo <= *n) && *n <= n_upper;
                let heights = lo_bound <= ratio && ratio <= hi_bound;
                (prefix, Some(ratio), sandwich && heights)
            }
            _ => (Word::empty(), None, false),
        };
        reports.push(ScaleReport {
            t: t.clone(),
            prefix,
            n_lower,
            n_exact,
            n_upper,
            ratio,
            lo_bound,
            hi_bound,
            pass,
        });
    }
    Ok(reports)
}

/// CSV rows for a report batch:
/// t,prefix,n_lower,n_exact,n_upper,ratio,lo_bound,hi_bound,pass.
pub fn scale_reports_csv(reports: &[ScaleReport]) -> String {
    let mut out = String::from("t,prefix,n_lower,n_exact,n_upper,ratio,lo_bound,hi_bound,pass\n");
    for r in reports {
        let n_exact = match &r.n_exact {
            NOfOutcome::Certified { n, out_of_regime: false } => n.to_string(),
            NOfOutcome::Certified { out_of_regime: true, .. } => "out-of-regime".into(),
            NOfOutcome::Undecided { lower, upper } => format!("[{lower};{upper}]"),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            to_f64(&r.t),
            r.prefix,
            r.n_lower.map_or_else(|| "-".into(), |n| n.to_string()),
            n_exact,
            r.n_upper,
            r.ratio.as_ref().map_or_else(|| "-".into(), |x| to_f64(x).to_string()),
            to_f64(&r.lo_bound),
            to_f64(&r.hi_bound),
            r.pass,
        ));
    }
    out
}
