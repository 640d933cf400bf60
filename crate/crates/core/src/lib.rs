//! Places, heights, adelic vector bundles, Siegel lemmas and explicit lower
//! bounds for linear forms in logarithms over number fields.
//!
//! The crate is `no_std` and only needs `alloc`. Archimedean quantities are
//! returned as rigorous ball enclosures; finite-place quantities are exact.

#![no_std]

extern crate alloc;

pub mod arith;
pub mod baker;
pub mod bundle;
pub mod ball;
pub mod error;
pub mod field;
pub mod heights;
pub mod linalg;
pub mod linform;
pub mod logreal;
pub mod logscale;
pub mod padic;
pub mod places;
pub mod poly;
pub mod precision;
pub mod siegel;

pub use bundle::AdelicBundle;
pub use ball::{Ball, ComplexBall, Dyadic, Mag};
pub use error::{Error, Result};
pub use field::{FieldElement, NumberField};
pub use logreal::LogReal;
pub use logscale::LogScaleReal;
pub use places::{Place, PlaceKind};
pub use precision::PrecisionContext;
