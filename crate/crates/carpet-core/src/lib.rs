//! Certified geometry for horizontal self-affine carpets.
//!
//! The crate builds carpets from diagonal affine systems, certifies their
//! structural conditions, and measures the quantitative geometry that those
//! conditions force: slice porosity and perfectness, scale-index sandwiches,
//! ending structure of tangent windows, and box/Assouad-type dimension
//! estimates.
//!
//! Exact rational arithmetic backs everything labelled certified; f64
//! estimators state their resolution and carry it into their tolerances.

pub mod error;
pub mod rat;
pub mod rect;
pub mod interval;
pub mod word;
pub mod ifs;
pub mod input;
pub mod conditions;
pub mod geometry;
pub mod scales;
pub mod regularity;
pub mod tangents;
pub mod dimension;
pub mod fixtures;

pub use error::{Error, Result};
