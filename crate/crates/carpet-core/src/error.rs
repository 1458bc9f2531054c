//! Crate-wide error type. Variants map one-to-one onto the failure modes
//! of the public operations; callers match on them to distinguish bad input
//! from exhausted budgets from genuinely undecidable certifications.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("an IFS needs at least two maps")]
    EmptySystem,

    #[error("map {index} is not contractive (|a{axis}| >= 1)")]
    NonContractive { index: usize, axis: u8 },

    #[error("map {index} is degenerate (a{axis} = 0)")]
    Degenerate { index: usize, axis: u8 },

    #[error("symbol {symbol} outside 1..={n}")]
    SymbolOutOfRange { symbol: usize, n: usize },

    #[error("no invariant starting rectangle found for the hull iteration")]
    NoInvariantStart,

    #[error("scale {t} outside the admissible range {reason}")]
    ScaleOutOfRange { t: f64, reason: &'static str },

    #[error("no index satisfies the defining inequality at this scale")]
    EmptyIndexSet,

    #[error("certification undecidable: {detail}")]
    Undecidable { detail: String },

    #[error("enumeration needs {needed} words, budget is {budget}")]
    DepthBudgetExceeded { needed: u64, budget: u64 },

    #[error("requested scale {requested} is below the certified resolution {resolution}")]
    ResolutionTooCoarse { requested: f64, resolution: f64 },

    #[error("operation requires a nonempty point set")]
    EmptyInput,

    #[error("a clipped set is empty inside the ball")]
    EmptyIntersection,

    #[error("negative fattening radius")]
    NegativeEpsilon,

    #[error("homothety coefficient must be at least 1")]
    ScalingBelowOne,

    #[error("tangent cloud is empty")]
    EmptyCloud,

    #[error("the bounding rectangle is not certified")]
    UncertifiedHull,

    #[error("input parse error: {0}")]
    InputParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
