//! JSON input format for carpet systems.
//!
//! ```json
//! { "maps": [ { "a1": -0.6, "a2": {"num": 1, "den": 3}, "b1": 0.6, "b2": 0 }, ... ] }
//! ```
//!
//! Scalars are either JSON numbers or explicit {num, den} fractions. JSON
//! numbers are read as the exact rational their decimal text denotes, not
//! as the nearest f64: "0.2" means 1/5. This relies on serde_json keeping
//! the original token (arbitrary_precision).

use crate::error::{Error, Result};
use crate::ifs::{validate_carpet, AffineMap2D, CarpetSpec};
use crate::rat::{rat_from_decimal_str, Rat};
use num::BigInt;
use num::Zero;
use serde_json::Value;

/// Parses the JSON text and validates the system it describes.
pub fn parse_carpet_json(text: &str) -> Result<CarpetSpec> {
    let maps = parse_maps_json(text)?;
    validate_carpet(maps)
}

/// Parses the JSON text into raw maps without validation.
pub fn parse_maps_json(text: &str) -> Result<Vec<AffineMap2D>> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::InputParse(format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::InputParse("top level must be an object".into()))?;
    let maps_val = obj
        .get("maps")
        .ok_or_else(|| Error::InputParse("missing \"maps\" array".into()))?;
    let arr = maps_val
        .as_array()
        .ok_or_else(|| Error::InputParse("\"maps\" must be an array".into()))?;
    let mut maps = Vec::with_capacity(arr.len());
    for (k, entry) in arr.iter().enumerate() {
        let m = entry
            .as_object()
            .ok_or_else(|| Error::InputParse(format!("maps[{k}] must be an object")))?;
        let field = |name: &str| -> Result<Rat> {
            let v = m
                .get(name)
                .ok_or_else(|| Error::InputParse(format!("maps[{k}] missing \"{name}\"")))?;
            scalar_from_value(v)
                .ok_or_else(|| Error::InputParse(format!("maps[{k}].{name} is not a number")))
        };
        maps.push(AffineMap2D::new(
            field("a1")?,
            field("a2")?,
            field("b1")?,
            field("b2")?,
        ));
    }
    Ok(maps)
}

fn scalar_from_value(v: &Value) -> Option<Rat> {
    match v {
        // Number::to_string reproduces the literal's decimal text under
        // arbitrary_precision, so this round-trip is exact.
        Value::Number(n) => rat_from_decimal_str(&n.to_string()),
        Value::Object(o) => {
            let num = o.get("num")?;
            let den = o.get("den")?;
            let num: BigInt = num.as_str().map_or_else(
                || num.to_string().parse().ok(),
                |s| s.parse().ok(),
            )?;
            let den: BigInt = den.as_str().map_or_else(
                || den.to_string().parse().ok(),
                |s| s.parse().ok(),
            )?;
            if den.is_zero() {
                return None;
            }
            Some(Rat::new(num, den))
        }
        _ => None,
    }
}

/// Serializes maps in the same format, fractions kept exact.
pub fn maps_to_json(maps: &[AffineMap2D]) -> String {
    let frac = |r: &Rat| {
        serde_json::json!({
            "num": r.numer().to_string(),
            "den": r.denom().to_string(),
        })
    };
    let arr: Vec<Value> = maps
        .iter()
        .map(|m| {
            serde_json::json!({
                "a1": frac(&m.a1),
                "a2": frac(&m.a2),
                "b1": frac(&m.b1),
                "b2": frac(&m.b2),
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "maps": arr })).unwrap()
}
