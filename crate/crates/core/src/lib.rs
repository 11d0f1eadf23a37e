//! Evaluation and certification of bounds on the incomplete Bessel integral
//! `∫₀ˣ e^{-γt} t^μ I_{ν+n}(t) dt`.
//!
//! The numerical core is generic over [`Real`] (`f64` and `f32`); the
//! verifier works in `f64`. The aliases below name the `f64` forms.

// `!(a > b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod bounds;
pub mod error;
pub mod oracle;
pub mod quad;
pub mod real;
pub mod scaled;
pub mod verifier;

pub use bounds::{BoundId, Direction};
pub use error::{Error, Result};
pub use oracle::Identity;
pub use real::Real;
pub use verifier::{CheckReport, Verdict};

pub type ScaledValue = scaled::Scaled<f64>;
pub type ScaledValue32 = scaled::Scaled<f32>;
pub type IntegralSpec = oracle::IntegralSpec<f64>;
pub type QuadResult = oracle::QuadResult<f64>;
pub type Point = bounds::Point<f64>;
pub type BoundEval = bounds::BoundEval<f64>;
