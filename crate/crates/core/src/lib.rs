//! Optimization-based, conservative, invariant-domain-preserving limiting
//! for the ideal MHD equations.
//!
//! The pieces, bottom-up:
//!
//! * [`mhd_state`]: conserved states, equation of state, the admissible set.
//! * [`euler_projection`]: closed-form projection onto one magnetic-energy slice.
//! * [`brent`]: derivative-free scalar minimization.
//! * [`slicing`]: projection onto the full MHD admissible set by minimizing
//!   over the magnetic energy.
//! * [`dy_limiter`]: Davis–Yin splitting for the global cell-average problem.
//! * [`dg`]: a 2D P2 discontinuous Galerkin solver used to exercise the limiter.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brent;
pub mod dg;
pub mod dy_limiter;
pub mod error;
pub mod euler_projection;
pub mod mhd_state;
pub mod slicing;

pub use error::{Error, Result};
