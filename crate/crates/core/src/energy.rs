//! The energy `J(u) = Phi(u) - lambda Psi(u)` and its gradient.
//!
//! ```text
//! Phi(u) = (1/p) sum_k [a(k) |u(k) - u(k-1)|^p + b(k) |u(k)|^p]
//! Psi(u) = sum_k F(k, u(k))
//! dJ/du(k) = -a(k+1) phi_p(u(k+1) - u(k)) + a(k) phi_p(u(k) - u(k-1))
//!            + b(k) phi_p(u(k)) - lambda f(k, u(k))
//! ```
//!
//! The gradient component at `k` is the residual of the difference equation
//! at `k`, so a vector with vanishing gradient is a solution.

use serde::Serialize;
use thiserror::Error;

use crate::lattice::{phi_p, pow_abs_step, CompensatedSum, Exponent, LatticeVec, Weights};
use crate::nonlinearity::Nonlinearity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("lambda must be positive (λ is a positive real parameter), got {0}")]
    NonPositiveLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub phi: f64,
    pub psi: f64,
    pub j: f64,
    pub lambda: f64,
}

/// Energy evaluator with the weights cached over a fixed window `[lo, hi]`.
/// Values passed to its methods are the window entries; everything outside
/// the window is zero.
pub struct WindowedEnergy<'a> {
    lo: i64,
    /// `a(lo), ..., a(hi + 1)`
    a: Vec<f64>,
    /// `b(lo), ..., b(hi)`
    b: Vec<f64>,
    p: Exponent,
    lambda: f64,
    nl: &'a dyn Nonlinearity,
}

impl<'a> WindowedEnergy<'a> {
    pub fn new(
        lo: i64,
        hi: i64,
        w: &Weights,
        p: Exponent,
        nl: &'a dyn Nonlinearity,
        lambda: f64,
    ) -> Self {
        assert!(lo <= hi);
        Self {
            lo,
            a: (lo..=hi + 1).map(|k| w.a(k)).collect(),
            b: (lo..=hi).map(|k| w.b(k)).collect(),
            p,
            lambda,
            nl,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.b.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    #[inline]
    pub fn lo(&self) -> i64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> i64 {
        self.lo + self.b.len() as i64 - 1
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    fn at(x: &[f64], i: isize) -> f64 {
        if i < 0 || i as usize >= x.len() {
            0.0
        } else {
            x[i as usize]
        }
    }

    /// `p Phi(x)`.
    pub fn phi_pow_sum(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.len());
        let pp = self.p.get();
        let mut acc = CompensatedSum::new();
        for i in 0..=x.len() {
            let d = Self::at(x, i as isize) - Self::at(x, i as isize - 1);
            acc.add(self.a[i] * d.abs().powf(pp));
            if i < x.len() && x[i] != 0.0 {
                acc.add(self.b[i] * x[i].abs().powf(pp));
            }
        }
        acc.value()
    }

    pub fn psi(&self, x: &[f64]) -> f64 {
        let acc: CompensatedSum = x
            .iter()
            .enumerate()
            .map(|(i, &v)| self.nl.primitive(self.lo + i as i64, v))
            .collect();
        acc.value()
    }

    pub fn energy(&self, x: &[f64]) -> EnergyReport {
        let phi = self.phi_pow_sum(x) / self.p.get();
        let psi = self.psi(x);
        EnergyReport {
            phi,
            psi,
            j: phi - self.lambda * psi,
            lambda: self.lambda,
        }
    }

    /// Gradient over the window sites.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let p = self.p;
        for i in 0..x.len() {
            let ii = i as isize;
            let left = x[i] - Self::at(x, ii - 1);
            let right = Self::at(x, ii + 1) - x[i];
            let k = self.lo + i as i64;
            out[i] = -self.a[i + 1] * phi_p(right, p) + self.a[i] * phi_p(left, p)
                + self.b[i] * phi_p(x[i], p)
                - self.lambda * self.nl.f(k, x[i]);
        }
    }

    /// Diagonal of the Hessian of `Phi` over the window sites.
    pub fn phi_curvature_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.len());
        let pp = self.p.get();
        let pw = |t: f64| if pp == 2.0 { 1.0 } else { t.abs().powf(pp - 2.0) };
        for i in 0..x.len() {
            let ii = i as isize;
            let left = x[i] - Self::at(x, ii - 1);
            let right = Self::at(x, ii + 1) - x[i];
            out[i] = (pp - 1.0) * (self.a[i] * pw(left) + self.a[i + 1] * pw(right) + self.b[i] * pw(x[i]));
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    /// `J(y) - J(x)`, assembled from per-term differences so that small
    /// steps keep their leading digits.
    pub fn delta(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let n = x.len();
        let p = self.p;
        let mut phi = CompensatedSum::new();
        let mut psi = CompensatedSum::new();
        for i in 0..=n {
            let ii = i as isize;
            let changed_here = i < n && x[i] != y[i];
            let changed_left = i > 0 && x[i - 1] != y[i - 1];
            if changed_here || changed_left {
                let dx = Self::at(x, ii) - Self::at(x, ii - 1);
                let step = (Self::at(y, ii) - Self::at(x, ii)) - (Self::at(y, ii - 1) - Self::at(x, ii - 1));
                phi.add(self.a[i] * pow_abs_step(dx, step, p));
            }
            if changed_here {
                phi.add(self.b[i] * pow_abs_step(x[i], y[i] - x[i], p));
                psi.add(self.nl.primitive_diff(self.lo + i as i64, x[i], y[i]));
            }
        }
        phi.value() / p.get() - self.lambda * psi.value()
    }

    /// `J` change from setting site `i` to `v` with everything else fixed.
    pub fn site_delta(&self, x: &[f64], i: usize, v: f64) -> f64 {
        let old = x[i];
        if old == v {
            return 0.0;
        }
        let p = self.p;
        let ii = i as isize;
        let left = Self::at(x, ii - 1);
        let right = Self::at(x, ii + 1);
        let mut acc = CompensatedSum::new();
        let s = v - old;
        acc.add(self.a[i] * pow_abs_step(old - left, s, p));
        acc.add(self.a[i + 1] * pow_abs_step(right - old, -s, p));
        acc.add(self.b[i] * pow_abs_step(old, s, p));
        acc.value() / p.get()
            - self.lambda * self.nl.primitive_diff(self.lo + i as i64, old, v)
    }
}

pub fn phi(u: &LatticeVec, w: &Weights, p: Exponent) -> f64 {
    crate::lattice::norm_x_pow(u, w, p) / p.get()
}

/// `sum_k F(k, u(k))` over the window; `F(k, 0) = 0` elsewhere.
pub fn psi(u: &LatticeVec, nl: &dyn Nonlinearity) -> f64 {
    let acc: CompensatedSum = u.iter().map(|(k, v)| nl.primitive(k, v)).collect();
    acc.value()
}

pub fn energy(
    u: &LatticeVec,
    w: &Weights,
    p: Exponent,
    nl: &dyn Nonlinearity,
    lambda: f64,
) -> Result<EnergyReport, EnergyError> {
    if !(lambda > 0.0) {
        return Err(EnergyError::NonPositiveLambda(lambda));
    }
    let phi = phi(u, w, p);
    let psi = psi(u, nl);
    Ok(EnergyReport {
        phi,
        psi,
        j: phi - lambda * psi,
        lambda,
    })
}

/// Gradient of `J` on `u`'s window padded by one site on each side, the
/// full set of sites where `u` enters the equation.
pub fn grad(
    u: &LatticeVec,
    w: &Weights,
    p: Exponent,
    nl: &dyn Nonlinearity,
    lambda: f64,
) -> LatticeVec {
    let (lo, hi) = u.window();
    let padded = u.embed(lo - 1, hi + 1);
    let we = WindowedEnergy::new(lo - 1, hi + 1, w, p, nl, lambda);
    let g = we.gradient(padded.values());
    LatticeVec::new(lo - 1, g).expect("gradient of finite input is finite")
}

/// Largest `|central difference - analytic| / (1 + |analytic|)` over the
/// window of `u`, where the central difference perturbs one site at a time
/// by `+-h` in the terms of `Phi` and `Psi` that involve that site.
pub fn fd_gradient_check(
    u: &LatticeVec,
    w: &Weights,
    p: Exponent,
    nl: &dyn Nonlinearity,
    lambda: f64,
    h: f64,
) -> f64 {
    assert!(h > 0.0);
    let g = grad(u, w, p, nl, lambda);
    let pp = p.get();
    let local = |k: i64, t: f64| {
        let left = t - u.get(k - 1);
        let right = u.get(k + 1) - t;
        (w.a(k) * left.abs().powf(pp) + w.a(k + 1) * right.abs().powf(pp) + w.b(k) * t.abs().powf(pp))
            / pp
            - lambda * nl.primitive(k, t)
    };
    u.iter()
        .map(|(k, uk)| {
            let cd = (local(k, uk + h) - local(k, uk - h)) / (2.0 * h);
            let an = g.get(k);
            (cd - an).abs() / (1.0 + an.abs())
        })
        .fold(0.0, f64::max)
}
