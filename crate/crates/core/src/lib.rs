//! Numerical laboratory for infinite-time blow-up in the critical-mass
//! planar Keller–Segel system.

// Index loops mirror the stencil formulas, and `!(x > 0.0)` is how the
// parameter checks reject NaN along with the out-of-range values.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod banded;
pub mod error;
pub mod evolve;
pub mod field;
pub mod grid;
pub mod inner;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod reduced;
pub mod sphere;
pub mod stencil;
pub mod verify;

pub use error::{Error, Result};
pub use field::{CumulativeMass, RadialField};
pub use grid::{Grading, RadialGrid};

// The guide's chapters, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/radial.md")]
    mod radial {}
    #[doc = include_str!("../../../book/src/ansatz.md")]
    mod ansatz {}
    #[doc = include_str!("../../../book/src/evolve.md")]
    mod evolve {}
    #[doc = include_str!("../../../book/src/sphere.md")]
    mod sphere {}
    #[doc = include_str!("../../../book/src/inner.md")]
    mod inner {}
    #[doc = include_str!("../../../book/src/reduced.md")]
    mod reduced {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
