//! Shared random-system generator for the property tests.

#![allow(dead_code)]

use carpet_core::ifs::{validate_carpet, AffineMap2D, CarpetSpec};
use carpet_core::rat::{rat, rat_int, Rat};
use proptest::prelude::*;

/// Signed contraction factors no stronger than 1/5 and no weaker than 1/2.
/// Keeping the modulus at or below 1/2 caps the certified counting depth,
/// so brute-force word enumeration in the oracles stays small.
fn factor() -> impl Strategy<Value = Rat> {
    prop_oneof![
        Just(rat(1, 2)),
        Just(rat(1, 3)),
        Just(rat(1, 4)),
        Just(rat(1, 5)),
        Just(rat(-1, 2)),
        Just(rat(-1, 3)),
        Just(rat(-1, 4)),
    ]
}

/// Offset placing the image of [0, 1] inside [0, 1] for the given signed
/// factor, parameterized by a twelfth of the admissible segment.
fn offset_for(a: &Rat, k: i64) -> Rat {
    let zero = rat_int(0);
    let lo = if *a < zero { -a.clone() } else { zero.clone() };
    let hi = rat_int(1) - if *a > zero { a.clone() } else { zero };
    &lo + (&hi - &lo) * rat(k, 12)
}

fn map_strategy() -> impl Strategy<Value = AffineMap2D> {
    (factor(), 0i64..=12, factor(), 0i64..=12).prop_map(|(a1, k1, a2, k2)| {
        let b1 = offset_for(&a1, k1);
        let b2 = offset_for(&a2, k2);
        AffineMap2D::new(a1, a2, b1, b2)
    })
}

/// Random diagonal system of two or three maps sending the unit square
/// into itself. Every such system validates.
pub fn small_spec() -> impl Strategy<Value = CarpetSpec> {
    prop::collection::vec(map_strategy(), 2..=3)
        .prop_map(|maps| validate_carpet(maps).expect("sampled maps stay inside the unit square"))
}
