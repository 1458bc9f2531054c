//! Reference systems used by tests, presets, and the CLI.
//!
//! Entries are exact rationals; every derived constant asserted in tests
//! (bounding rectangle, separation gap, contraction extrema) was worked
//! out by hand from these values.

use crate::ifs::{validate_carpet, AffineMap2D, CarpetSpec};
use crate::rat::rat;

/// Four maps in two columns of width 1/2, rows of height 1/5, on the unit
/// square. Separation gap certifies to exactly 1/20 at depth 1. The
/// horizontal projection fills [0, 1], every vertical line meets two
/// first-level images, and rows are strictly wider than tall.
pub fn two_column_carpet() -> CarpetSpec {
    let maps = vec![
        AffineMap2D::new(rat(1, 2), rat(1, 5), rat(0, 1), rat(0, 1)),
        AffineMap2D::new(rat(1, 2), rat(1, 5), rat(1, 2), rat(1, 4)),
        AffineMap2D::new(rat(1, 2), rat(1, 5), rat(0, 1), rat(11, 20)),
        AffineMap2D::new(rat(1, 2), rat(1, 5), rat(1, 2), rat(4, 5)),
    ];
    validate_carpet(maps).expect("fixture is valid")
}

/// Four maps, two of them reflected, whose horizontal projection is the
/// two-segment set [0, 3/5] union [4/5, 1]. Vertical lines through the gap
/// (3/5, 4/5) miss every first-level image, yet every line that does meet
/// the attractor's projection meets at least two second-level images.
pub fn gap_projection_carpet() -> CarpetSpec {
    let maps = vec![
        AffineMap2D::new(rat(-3, 5), rat(1, 3), rat(3, 5), rat(0, 1)),
        AffineMap2D::new(rat(3, 5), rat(1, 3), rat(0, 1), rat(2, 5)),
        AffineMap2D::new(rat(-1, 5), rat(1, 6), rat(1, 1), rat(0, 1)),
        AffineMap2D::new(rat(1, 5), rat(1, 6), rat(4, 5), rat(2, 5)),
    ];
    validate_carpet(maps).expect("fixture is valid")
}

/// Same system with the second map translated by (2/5, 0) instead of
/// (0, 2/5). Kept for comparison: its horizontal projection degenerates
/// to a different shape and the two-segment property above fails.
pub fn gap_projection_carpet_printed_offsets() -> CarpetSpec {
    let maps = vec![
        AffineMap2D::new(rat(-3, 5), rat(1, 3), rat(3, 5), rat(0, 1)),
        AffineMap2D::new(rat(3, 5), rat(1, 3), rat(2, 5), rat(0, 1)),
        AffineMap2D::new(rat(-1, 5), rat(1, 6), rat(1, 1), rat(0, 1)),
        AffineMap2D::new(rat(1, 5), rat(1, 6), rat(4, 5), rat(2, 5)),
    ];
    validate_carpet(maps).expect("fixture is valid")
}

/// Product of two middle-half Cantor sets. Box counts are known in closed
/// form: at even dyadic level 2k each factor occupies 2^(k+1) - 1 cells,
/// at odd level 2k+1 it occupies 3 * 2^k - 1, and the plane count is the
/// square. Dimension is exactly 1.
pub fn cantor_product() -> CarpetSpec {
    let maps = vec![
        AffineMap2D::new(rat(1, 4), rat(1, 4), rat(0, 1), rat(0, 1)),
        AffineMap2D::new(rat(1, 4), rat(1, 4), rat(3, 4), rat(0, 1)),
        AffineMap2D::new(rat(1, 4), rat(1, 4), rat(0, 1), rat(3, 4)),
        AffineMap2D::new(rat(1, 4), rat(1, 4), rat(3, 4), rat(3, 4)),
    ];
    validate_carpet(maps).expect("fixture is valid")
}

/// The unit segment [0, 1] x {0} as a two-map system. Dyadic box counts
/// are exactly 2^n; every dimension estimator must return 1.
pub fn segment_carpet() -> CarpetSpec {
    let maps = vec![
        AffineMap2D::new(rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1)),
        AffineMap2D::new(rat(1, 2), rat(1, 2), rat(1, 2), rat(0, 1)),
    ];
    validate_carpet(maps).expect("fixture is valid")
}

/// The full unit square as four quadrant maps. Dyadic box counts are
/// exactly 4^n; every dimension estimator must return 2.
pub fn square_carpet() -> CarpetSpec {
    let maps = vec![
        AffineMap2D::new(rat(1, 2), rat(1, 2), rat(0, 1), rat(0, 1)),
        AffineMap2D::new(rat(1, 2), rat(1, 2), rat(1, 2), rat(0, 1)),
        AffineMap2D::new(rat(1, 2), rat(1, 2), rat(0, 1), rat(1, 2)),
        AffineMap2D::new(rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)),
    ];
    validate_carpet(maps).expect("fixture is valid")
}
