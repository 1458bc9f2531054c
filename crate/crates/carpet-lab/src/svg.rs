//! Hand-rolled SVG renderer for construction rectangles and overlays.
//!
//! All geometry arrives as exact rationals and is converted to pixels
//! here, with fixed three-decimal formatting so identical inputs yield
//! byte-identical documents.

use carpet_core::ifs::CarpetSpec;
use carpet_core::interval::RatIntervalUnion;
use carpet_core::rat::{to_f64, Rat};
use carpet_core::rect::RatRect;
use carpet_core::word::Word;
use carpet_core::Result;

const CANVAS_W: f64 = 1000.0;
/// Pixel height used when the carpet is flat on one axis.
const DEGENERATE_EXTENT: f64 = 8.0;
const STRIP_GAP: f64 = 14.0;
const STRIP_H: f64 = 10.0;

pub struct Overlays {
    /// Vertical lines at these abscissae, drawn over the full height.
    pub ending_lines: Vec<Rat>,
    /// Projection bar under the canvas: covered segments and certified
    /// gaps between them.
    pub projection: Option<(RatIntervalUnion, RatIntervalUnion)>,
}

impl Overlays {
    pub fn none() -> Self {
        Self { ending_lines: Vec::new(), projection: None }
    }
}

struct Frame {
    x0: f64,
    y1: f64,
    sx: f64,
    sy: f64,
    h: f64,
}

impl Frame {
    fn new(q: &RatRect) -> Self {
        let x0 = to_f64(&q.x0);
        let y1 = to_f64(&q.y1);
        let w = to_f64(&q.x1) - x0;
        let h = y1 - to_f64(&q.y0);
        let sx = if w > 0.0 { CANVAS_W / w } else { CANVAS_W };
        let px_h = if h > 0.0 { h * sx } else { DEGENERATE_EXTENT };
        let sy = if h > 0.0 { px_h / h } else { 0.0 };
        Self { x0, y1, sx, sy, h: px_h }
    }

    fn px(&self, x: f64) -> f64 {
        (x - self.x0) * self.sx
    }

    /// SVG y grows downward, carpet y grows upward.
    fn py(&self, y: f64) -> f64 {
        (self.y1 - y) * self.sy
    }
}

fn fmt(v: f64) -> String {
    // Negative zero prints as 0.000 so reruns cannot differ over a sign
    // the geometry does not have.
    let r = if v == 0.0 { 0.0 } else { v };
    format!("{r:.3}")
}

/// Grey fill darkening with level, light at the top of the hierarchy.
fn shade(level: usize, max_level: usize) -> String {
    let span = max_level.max(1) as i64;
    let v = 232 - 164 * level as i64 / span;
    format!("#{0:02x}{0:02x}{0:02x}", v as u8)
}

/// Construction rectangles of every level 1..=depth, or Q alone at depth
/// zero, with optional ending-line and projection overlays. The exact
/// element contract: depth 0 emits one rect; depth d emits
/// k + k^2 + ... + k^d rects.
pub fn render(spec: &CarpetSpec, depth: usize, overlays: &Overlays) -> Result<String> {
    let q = spec.q();
    let frame = Frame::new(q);
    let strip = overlays.projection.is_some();
    let total_h = frame.h + if strip { STRIP_GAP + STRIP_H } else { 0.0 };

    let mut body = String::new();
    if depth == 0 {
        push_rect(&mut body, &frame, q, &shade(0, 0));
    } else {
        for level in 1..=depth {
            let mut digits = vec![1usize; level];
            loop {
                let w = Word::new(digits.iter().copied());
                let r = spec.cylinder_rect(&w)?;
                push_rect(&mut body, &frame, &r, &shade(level, depth));
                let mut i = 0;
                loop {
                    if i == digits.len() {
                        break;
                    }
                    digits[i] += 1;
                    if digits[i] <= spec.n_maps() {
                        break;
                    }
                    digits[i] = 1;
                    i += 1;
                }
                if digits.iter().all(|&d| d == 1) {
                    break;
                }
            }
        }
    }

    // Q outline as a path, kept out of the rect census on purpose.
    body.push_str(&format!(
        "<path d=\"M {} {} H {} V {} H {} Z\" fill=\"none\" stroke=\"#222\" stroke-width=\"1\"/>\n",
        fmt(frame.px(to_f64(&q.x0))),
        fmt(frame.py(to_f64(&q.y1))),
        fmt(frame.px(to_f64(&q.x1))),
        fmt(frame.py(to_f64(&q.y0)).max(1.0)),
        fmt(frame.px(to_f64(&q.x0))),
    ));

    for x in &overlays.ending_lines {
        let px = fmt(frame.px(to_f64(x)));
        body.push_str(&format!(
            "<line class=\"ending\" x1=\"{px}\" y1=\"0\" x2=\"{px}\" y2=\"{}\" \
             stroke=\"#b34700\" stroke-width=\"1.2\" stroke-dasharray=\"7 4\"/>\n",
            fmt(frame.h),
        ));
    }

    if let Some((outer, gaps)) = &overlays.projection {
        let y = fmt(frame.h + STRIP_GAP + STRIP_H / 2.0);
        for (lo, hi) in outer.intervals() {
            body.push_str(&format!(
                "<line class=\"projection\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" \
                 stroke=\"#111\" stroke-width=\"{STRIP_H}\"/>\n",
                fmt(frame.px(to_f64(lo))),
                fmt(frame.px(to_f64(hi))),
            ));
        }
        for (lo, hi) in gaps.intervals() {
            body.push_str(&format!(
                "<line class=\"gap\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" \
                 stroke=\"#d03030\" stroke-width=\"{}\"/>\n",
                fmt(frame.px(to_f64(lo))),
                fmt(frame.px(to_f64(hi))),
                fmt(STRIP_H / 3.0),
            ));
        }
    }

    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\">\n{body}</svg>\n",
        fmt(CANVAS_W),
        fmt(total_h.max(1.0)),
    ))
}

fn push_rect(out: &mut String, frame: &Frame, r: &RatRect, fill: &str) {
    let x = frame.px(to_f64(&r.x0));
    let y = frame.py(to_f64(&r.y1));
    let w = (to_f64(&r.x1) - to_f64(&r.x0)) * frame.sx;
    let h = (to_f64(&r.y1) - to_f64(&r.y0)) * frame.sy;
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" \
         stroke=\"#1a1a1a\" stroke-width=\"0.4\"/>\n",
        fmt(x),
        fmt(y),
        // Degenerate extents still get a visible sliver.
        fmt(w.max(0.75)),
        fmt(h.max(0.75)),
    ));
}
