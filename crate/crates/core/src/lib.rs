//! Numerical core for uncertainty principles on spheres of radius `R`.
//!
//! The crate works on the circle `S¹_R` (`d = 2`) and the sphere `S²_R`
//! (`d = 3`) and covers:
//!
//! - [`geometry`]: points, spherical caps, regions, geodesic segments, cap
//!   covers and thickness estimates.
//! - [`quadrature`]: exact-degree rules, boundary-fitted rules and the polar
//!   coordinates integration formula.
//! - [`harmonics`]: the orthonormal Laplace–Beltrami eigenbasis and spherical
//!   polynomials.
//! - [`turan`]: exponential sums, the Nazarov–Turán bound and the local
//!   cap-wise inequalities built on it.
//! - [`concentration`]: restricted Gram matrices and sharp `L²` constants.
//! - [`heat_control`]: heat semigroup, observability Gramians, HUM null
//!   controls and a staged Lebeau–Robbiano scheme.
//!
//! Everything here is `no_std` and only needs `alloc`. File formats, reports
//! and the command line live in the `caplight` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod concentration;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod heat_control;
pub mod linalg;
pub mod quadrature;
pub mod turan;

pub use error::{Error, Result};
