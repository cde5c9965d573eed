//! Numerical laboratory for bound-state tunneling times in one-dimensional
//! double-well potentials, built on the diffusion (Nelson) picture of
//! quantum mechanics.
//!
//! The crate provides:
//! - potential models (square double well, double Rosen-Morse) with derived
//!   geometry and unit handling ([`potentials`], [`units`]);
//! - bound-state solvers: analytic matching for the square well, Numerov
//!   shooting for smooth wells ([`eigensolver`]);
//! - the osmotic drift field of a bound state and Euler-Maruyama sampling of
//!   its first-passage times ([`stochastic`]);
//! - first-passage theory: mean-exit-time quadrature, survival-operator decay
//!   rates, exponential tail fits ([`first_passage`]);
//! - closed forms and WKB asymptotics for the square and generic double wells
//!   ([`closed_forms`]);
//! - the end-to-end ammonia inversion pipeline ([`ammonia`]).

// Validation guards are written `!(x > 0.0)` on purpose: the negation also
// rejects NaN, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ammonia;
pub mod closed_forms;
pub mod eigensolver;
pub mod error;
pub mod first_passage;
pub mod numerics;
pub mod potentials;
pub mod stochastic;
pub mod units;

pub use error::{Error, Result};
