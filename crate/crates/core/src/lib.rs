//! Simulation and verification of the sharp-interface limit of a degenerate
//! Fisher-KPP equation with chemotactic drift,
//!
//! ```text
//! u_t = ε Δ(u^m) - ∇·(u ∇v^ε) + ε⁻¹ u (1 - u),   ∂(u^m)/∂ν = 0,
//! ```
//!
//! together with the limit free boundary `V_n = c* + ∂v/∂n`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod front_solver;
pub mod geometry;
pub mod integrate;
pub mod model;
pub mod pde_solver;
pub mod reaction_ode;
pub mod traveling_wave;
pub mod verification;

pub use error::{Error, Result};
