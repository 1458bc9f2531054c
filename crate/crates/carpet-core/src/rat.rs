//! Exact rational scalars.
//!
//! Every certified quantity in this crate (bounding rectangles, separation
//! gaps, sweep endpoints, scale-index decisions) is computed in `Rat`
//! arithmetic so that verdicts never flip due to floating-point noise.
//! `f64` views exist only for estimators whose error is accounted for
//! separately (dimension slopes, Hausdorff residuals, renderings).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Exact rational n/d. Panics on d = 0.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact value of a finite f64. Every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn to_f64(x: &Rat) -> f64 {
    // BigRational::to_f64 is None only for values outside the f64 range,
    // which certified quantities in (0, diam Q] never reach.
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses a decimal literal ("0.25", "-3", "1e-3", "2.5E2") into the exact
/// rational it denotes. Unlike going through f64, "0.2" becomes 1/5.
pub fn rat_from_decimal_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().ok()?;
            (&s[..pos], exp)
        }
        None => (s, 0i64),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let num: BigInt = joined.parse().ok()?;
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if shift >= 0 {
        Rat::from_integer(num * ten.pow(shift as u32))
    } else {
        Rat::new(num, ten.pow((-shift) as u32))
    };
    Some(if sign < 0 { -value } else { value })
}

/// Largest rational r with r^2 <= x, correct to within 2^-bits relative
/// error. Used to turn exact squared distances into certified lower bounds
/// on distances.
pub fn sqrt_lower(x: &Rat, bits: u32) -> Rat {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Rat::zero();
    }
    // Start from the f64 sqrt, then correct until r^2 <= x < (r(1+eps))^2.
    let approx = to_f64(x).sqrt();
    let mut r = rat_from_f64(approx).unwrap_or_else(Rat::one);
    if r.is_negative() || r.is_zero() {
        r = Rat::one();
    }
    // Newton steps in exact arithmetic give an upper bound after one step
    // from above; iterate a few times for accuracy, then shift below.
    for _ in 0..4 {
        if r.is_zero() {
            break;
        }
        r = (&r + x / &r) / rat_int(2);
    }
    // Newton from above converges from above: r^2 >= x now (up to the f64
    // seed being below sqrt(x), which one step fixes). Walk down to a
    // certified lower bound.
    let eps = Rat::new(BigInt::one(), BigInt::one() << bits);
    let step = Rat::one() - &eps;
    let mut lo = r * &step;
    while &lo * &lo > *x {
        lo *= &step;
    }
    lo
}

/// Certified upper bound counterpart of [`sqrt_lower`].
pub fn sqrt_upper(x: &Rat, bits: u32) -> Rat {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Rat::zero();
    }
    let lo = sqrt_lower(x, bits);
    let eps = Rat::new(BigInt::one(), BigInt::one() << bits);
    let step = Rat::one() + eps;
    let mut hi = lo * &step;
    while &hi * &hi < *x {
        hi *= &step;
    }
    hi
}
