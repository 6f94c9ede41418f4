//! Expected support functions and mean widths of symmetric random polytopes.
//!
//! The random polytope `K_N = conv{±X_1, …, ±X_N}` with `X_i` uniform in a
//! symmetric convex body has `E h_{K_N}(θ) = E max_i |⟨X_i, θ⟩|`. That
//! expectation is equivalent, up to absolute constants, to the level-`1/N`
//! inversion of the Orlicz function
//!
//! ```text
//! M_θ(s) = ∫_0^s E[ |⟨X,θ⟩| 1{|⟨X,θ⟩| ≥ 1/t} ] dt = E[(s|⟨X,θ⟩| − 1)_+]
//! ```
//!
//! This crate builds those Orlicz functions for normalized `ℓ_p^n` balls
//! (closed forms for coordinate directions, spherical averages, empirical
//! marginals), inverts them, and checks every estimate against Monte Carlo.
//!
//! Modules:
//! - [`mathkit`]: log-gamma, ball volumes, adaptive Gauss–Kronrod quadrature,
//!   the sine–cosine reduction recursion.
//! - [`bodies`]: `D_p^n` descriptions, marginal densities, support
//!   functions, seeded samplers and isotropy diagnostics.
//! - [`orlicz`]: Orlicz functions, their inversion, Luxemburg norms and
//!   Legendre duals.
//! - [`estimators`]: support-function and mean-width estimators, Monte Carlo
//!   oracles, sphere averages and direction scans.
//! - [`cli`]: the batch experiment runner behind the `orlicz-polytope` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod cli;
pub mod error;
pub mod io;
pub mod estimators;
pub mod mathkit;
pub mod orlicz;
pub mod rng;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
