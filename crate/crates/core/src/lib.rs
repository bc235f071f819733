//! Extended-precision evaluation of the alternating zeta series `eta(s)`,
//! its base-`b` generalizations `eta_b(s) = (1 - b^(1-s)) zeta(s)` and of
//! `zeta(s)` itself on the half-plane `Re s > 0`.
//!
//! The value is a short Dirichlet head sum plus a series over shifted block
//! power sums weighted by recurrence-defined coefficients. The series is
//! dominated by a geometric series of ratio about `b^(1-ell)`, and the number
//! of kept terms is fixed in advance from explicit coefficient bounds so the
//! truncation error is certified.

pub mod bounds;
pub mod coefficients;
pub mod decimal;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod scaling;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::{CComplex, CReal, PrecisionContext};
pub use rug;
