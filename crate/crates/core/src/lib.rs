//! Numerical laboratory for the curvature Schrödinger operator
//! `-d²/ds² + g κ²` on closed convex plane curves of length 2π, and for the
//! one- and two-bound-state Lieb–Thirring problem on the line that it is
//! equivalent to at `g = 1`.
//!
//! Module map:
//!
//! - [`numerics`]: grids, periodic quadrature, Fourier coefficients, dense and
//!   banded symmetric eigensolvers.
//! - [`curve`]: ovals encoded by turning-angle harmonics, closure and
//!   reconstruction.
//! - [`periodic`]: Galerkin and finite-difference discretizations of the curve
//!   operator and the Fourier half-bound certificate.
//! - [`line`]: bound states of `-d²/dx² - V` on the line and Lieb–Thirring ratios.
//! - [`bridge`]: the changes of variables from eigenfunctions to curve data.
//! - [`constants`]: closed-form sharp and semiclassical constants.
//! - [`optimize`]: Nelder–Mead search over curve space.
//! - [`cli`]: the `oval-lab` command line front end.

pub mod bridge;
pub mod cli;
pub mod constants;
pub mod curve;
pub mod error;
pub mod line;
pub mod numerics;
pub mod optimize;
pub mod periodic;

pub use error::{OvalError, Result};
