//! Homoclinic solutions of the discrete p-Laplacian equation
//!
//! ```text
//! -Δ(a(k) φ_p(Δu(k-1))) + b(k) φ_p(u(k)) = λ f(k, u(k)),   k ∈ Z,
//! u(k) -> 0 as |k| -> ∞,
//! ```
//!
//! computed as minimizers of the energy `J_λ = Φ - λΨ` over the boxes
//! `W_n = {r <= u(k) <= d_n}`, with recomputed certificates for every
//! property the minimizers are expected to have.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod lattice;
pub mod nonlinearity;
pub mod solver;
pub mod verify;

#[cfg(test)]
mod testing;
pub mod commands;
pub mod config;
