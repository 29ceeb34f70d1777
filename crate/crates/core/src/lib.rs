//! Löwner-Kufarev coefficient dynamics, Kirillov vector fields and the Witt
//! algebra over a truncated coefficient body, geodesic flows, and chordal
//! SLE at desk scale.
//!
//! The exact layer works over [`algebra::CoeffPolynomial`], multivariate
//! polynomials in `c_1, c_2, ...` with Gaussian-rational coefficients; the
//! numerical layer uses `Complex64` and classical RK4.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod checks;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod geodesics;
pub mod io;
pub mod ode;
pub mod scalar;
pub mod series;
pub mod sle;

pub use error::{Error, Result};
