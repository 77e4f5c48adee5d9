//! Nonlinear terms `f(k, t)` with their primitives `F(k, t) = int_0^t f(k, s) ds`.

mod kuang;
pub mod probe;
pub mod quad;
mod sequence;
mod tent;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use kuang::Kuang;
pub use probe::{
    check_f1, check_f2, check_f3, check_primitive, estimate_b, BProbeReport, F1Report, F2Report,
    F3Report, PrimitiveReport, ShellEstimate,
};
pub use sequence::{OscillatorySpec, SeqRule};
pub use tent::{Example1, Example2, Tent};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearityError {
    #[error("sequence ordering 0 < c_n < d_n < c_(n+1) violated at n = {n}: ({cn}, {dn}, {cn1})")]
    Ordering { n: usize, cn: f64, dn: f64, cn1: f64 },
    #[error("h_{n} = {h} does not exceed the required bound {bound}")]
    Example1Inequality { n: usize, h: f64, bound: f64 },
    #[error("partial sum h_1 + ... + h_{n} = {partial_sum} does not exceed the required bound {bound}")]
    Example2Inequality {
        n: usize,
        partial_sum: f64,
        bound: f64,
    },
    #[error("invalid oscillatory spec: {0}")]
    InvalidSpec(String),
    #[error("invalid nonlinearity parameter: {0}")]
    InvalidParam(String),
}

/// Structural properties a nonlinearity declares about itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// `F(k, s) = 0` for every `s <= 0`.
    pub vanishes_nonpositive: bool,
    pub continuous: bool,
}

pub trait Nonlinearity: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn f(&self, k: i64, t: f64) -> f64;

    /// `F(k, t)`, in closed form or to near machine precision.
    fn primitive(&self, k: i64, t: f64) -> f64;

    /// `F(k, t1) - F(k, t0)` without cancellation when `t0` and `t1` are close.
    fn primitive_diff(&self, k: i64, t0: f64, t1: f64) -> f64 {
        self.primitive(k, t1) - self.primitive(k, t0)
    }

    fn flags(&self) -> Flags;

    /// Points where `f(k, .)` is not differentiable.
    fn kinks(&self, _k: i64) -> Vec<f64> {
        Vec::new()
    }

    /// Inclusive range of sites outside which `f(k, .)` vanishes, if finite.
    fn support_sites(&self) -> Option<(i64, i64)>;
}

/// `f = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl Nonlinearity for Zero {
    fn name(&self) -> &str {
        "zero"
    }

    fn f(&self, _k: i64, _t: f64) -> f64 {
        0.0
    }

    fn primitive(&self, _k: i64, _t: f64) -> f64 {
        0.0
    }

    fn flags(&self) -> Flags {
        Flags {
            vanishes_nonpositive: true,
            continuous: true,
        }
    }

    fn support_sites(&self) -> Option<(i64, i64)> {
        Some((0, -1))
    }
}
