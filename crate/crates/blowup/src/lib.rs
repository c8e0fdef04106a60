//! Self-similar blow-up profiles for the reaction-diffusion equation
//! `u_t = Δu^m + u^p` with `m > 1`.
//!
//! The crate is organised bottom-up:
//!
//! * [`exponents`] – closed-form critical exponents and regime labels,
//! * [`dynsys`] – the autonomous phase system, its charts at infinity,
//!   critical points and sign checks,
//! * [`odeint`] – an adaptive Dormand–Prince integrator with dense output
//!   and event location,
//! * [`shooter`] – the unstable-manifold shooting family, classification,
//!   bisection for connecting orbits and the linearized zero-count oracle,
//! * [`profile`] – conversion of phase orbits back to profiles, exact
//!   solutions and residuals, decay-constant extraction.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynsys;
pub mod error;
pub mod exponents;
pub mod odeint;
pub mod profile;
pub mod shooter;

pub use error::{Error, Result};
pub use exponents::ParamTriple;
