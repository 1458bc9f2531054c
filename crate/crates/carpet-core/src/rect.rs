//! Axis-aligned rectangles, in exact rational and f64 flavors.
//!
//! Rectangles are closed sets. Distances between rectangles are computed
//! componentwise (gap in x, gap in y), so squared distances stay rational.

use crate::rat::{to_f64, Rat};
use num::Zero;

#[derive(Debug, Clone, PartialEq)]
pub struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RatPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        Self { x, y }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.x), to_f64(&self.y))
    }

    pub fn dist_sq(&self, other: &RatPoint) -> Rat {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatRect {
    pub x0: Rat,
    pub x1: Rat,
    pub y0: Rat,
    pub y1: Rat,
}

impl RatRect {
    pub fn new(x0: Rat, x1: Rat, y0: Rat, y1: Rat) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1, "degenerate rectangle bounds");
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> Rat {
        &self.x1 - &self.x0
    }

    pub fn height(&self) -> Rat {
        &self.y1 - &self.y0
    }

    pub fn diam_sq(&self) -> Rat {
        let w = self.width();
        let h = self.height();
        &w * &w + &h * &h
    }

    pub fn center(&self) -> RatPoint {
        let two = Rat::from_integer(2.into());
        RatPoint::new((&self.x0 + &self.x1) / &two, (&self.y0 + &self.y1) / &two)
    }

    pub fn contains(&self, p: &RatPoint) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }

    pub fn hull(&self, other: &RatRect) -> RatRect {
        RatRect {
            x0: self.x0.clone().min(other.x0.clone()),
            x1: self.x1.clone().max(other.x1.clone()),
            y0: self.y0.clone().min(other.y0.clone()),
            y1: self.y1.clone().max(other.y1.clone()),
        }
    }

    /// One-dimensional gap between [a0,a1] and [b0,b1]; zero when they meet.
    fn gap(a0: &Rat, a1: &Rat, b0: &Rat, b1: &Rat) -> Rat {
        if b0 > a1 {
            b0 - a1
        } else if a0 > b1 {
            a0 - b1
        } else {
            Rat::zero()
        }
    }

    pub fn dist_sq_to_point(&self, p: &RatPoint) -> Rat {
        let dx = Self::gap(&self.x0, &self.x1, &p.x, &p.x);
        let dy = Self::gap(&self.y0, &self.y1, &p.y, &p.y);
        &dx * &dx + &dy * &dy
    }

    pub fn dist_sq_to_rect(&self, other: &RatRect) -> Rat {
        let dx = Self::gap(&self.x0, &self.x1, &other.x0, &other.x1);
        let dy = Self::gap(&self.y0, &self.y1, &other.y0, &other.y1);
        &dx * &dx + &dy * &dy
    }

    /// The componentwise gaps themselves; exact distance is representable
    /// precisely when one of them is zero.
    pub fn gaps_to_rect(&self, other: &RatRect) -> (Rat, Rat) {
        (
            Self::gap(&self.x0, &self.x1, &other.x0, &other.x1),
            Self::gap(&self.y0, &self.y1, &other.y0, &other.y1),
        )
    }

    pub fn to_f64(&self) -> Rect {
        Rect {
            x0: to_f64(&self.x0),
            x1: to_f64(&self.x1),
            y0: to_f64(&self.y0),
            y1: to_f64(&self.y1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1, "degenerate rectangle bounds");
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diam(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn gap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
        if b0 > a1 {
            b0 - a1
        } else if a0 > b1 {
            a0 - b1
        } else {
            0.0
        }
    }

    pub fn dist_to_point(&self, x: f64, y: f64) -> f64 {
        let dx = Self::gap(self.x0, self.x1, x, x);
        let dy = Self::gap(self.y0, self.y1, y, y);
        dx.hypot(dy)
    }

    pub fn intersects_disk(&self, cx: f64, cy: f64, r: f64) -> bool {
        self.dist_to_point(cx, cy) <= r
    }
}
