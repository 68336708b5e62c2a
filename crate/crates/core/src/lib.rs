//! Exact-arithmetic toolkit for unilateral weighted backward shifts on l2
//! with `{1,2}`-valued weights.
//!
//! Every inequality is decided on exact rationals. Quantities that involve
//! square roots are compared in squared form or through certified
//! square-root brackets.

pub mod constructors;
pub mod encoder;
pub mod enumerate;
pub mod error;
pub mod forcing;
pub mod nbhd;
pub mod niceness;
pub mod rational;
pub mod shift;
pub mod vector;
pub mod weight;

pub use error::{Error, Result};
pub use nbhd::BasicNbhd;
pub use rational::Rat;
pub use vector::{L2Vector, Tri};
pub use weight::WeightSeq;
