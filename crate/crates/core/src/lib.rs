//! Numerical laboratory for the Navier–Stokes-αβ system with wall–eddy
//! boundary conditions in a tangentially periodic channel.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] – physical parameters, channel geometry and resolution.
//! * [`legendre`], [`space`] – wall-normal polynomial bases, quadrature and
//!   the tangential wavenumber set.
//! * [`field`] – solenoidal fields stored as toroidal/poloidal potentials and
//!   their physical-space reconstruction.
//! * [`discretization`] – per-wavenumber mass, Λ, gradient and `a(·,·)` matrices.
//! * [`stationary`], [`spectral`], [`evolution`] – the solvers built on them.
//! * [`adn`] – exact Douglis–Nirenberg ellipticity and covering checks.

pub mod adn;
pub mod analytic;
pub mod discretization;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod legendre;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod space;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};
pub use model::{derive_params, ChannelGeometry, ModelParams, Resolution};

/// Complex scalar used for all modal coefficients.
pub type C64 = num_complex::Complex64;
