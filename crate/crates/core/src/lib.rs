//! Desk-scale numerics for logarithmic Weyl laws of SG-classical operators.
//!
//! The crate is organised around the model operator `P = <x><D>` on `R^d`
//! and its square-type cousin `Q = (1 + |x|^2)(1 - Δ)`:
//!
//! * [`symbols`] evaluates principal symbol triples `(p_ψ, p_e, p_ψe)`.
//! * [`traces`] computes the trace coefficients and the closed-form Weyl
//!   coefficients `γ₂`, `γ₁`, together with the special functions they need.
//! * [`cornerflow`] integrates the Hamiltonian flow on the corner
//!   `S^{d-1} × S^{d-1}` and estimates the measure of periodic points.
//! * [`spectrum`] discretises `Q` by finite differences and counts eigenvalues.
//! * [`asymptotics`] fits counting functions against `λ^a log λ, λ^a, ...`,
//!   evaluates partial zeta sums and maps fits to Laurent coefficients.
//!
//! The `logweyl` binary wires these together into reproducible experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod cornerflow;
mod error;
pub mod numfmt;
pub mod quadrature;
pub mod spectrum;
pub mod symbols;
pub mod traces;

pub use error::{Error, Result};
