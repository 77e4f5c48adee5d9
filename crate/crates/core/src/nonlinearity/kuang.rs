use std::collections::HashMap;
use std::sync::RwLock;

use super::quad::adaptive_simpson;
use super::{Flags, Nonlinearity, NonlinearityError};
use crate::lattice::{phi_p, Exponent};

/// `f(k, t) = k^(-mu) |t|^(p-2) t ln(1 + |t|^nu)` for `k >= 1`, zero for
/// `k <= 0`. Positive for every `t > 0`, so it cannot oscillate in sign.
///
/// The primitive has no elementary closed form; `G(t) = int_0^t phi_p(s)
/// ln(1 + |s|^nu) ds` is integrated numerically and cached by `t`.
#[derive(Debug)]
pub struct Kuang {
    mu: f64,
    nu: f64,
    p: Exponent,
    cache: RwLock<HashMap<u64, f64>>,
}

const QUAD_TOL: f64 = 1e-15;

impl Kuang {
    pub fn new(mu: f64, nu: f64, p: Exponent) -> Result<Self, NonlinearityError> {
        if !(mu.is_finite() && mu > 1.0) {
            return Err(NonlinearityError::InvalidParam(format!("mu must exceed 1, got {mu}")));
        }
        if !(nu.is_finite() && nu >= 1.0) {
            return Err(NonlinearityError::InvalidParam(format!("nu must be at least 1, got {nu}")));
        }
        Ok(Self {
            mu,
            nu,
            p,
            cache: RwLock::new(HashMap::new()),
        })
    }

    #[inline]
    fn site_factor(&self, k: i64) -> f64 {
        if k < 1 {
            0.0
        } else {
            (k as f64).powf(-self.mu)
        }
    }

    fn profile(&self, s: f64) -> f64 {
        phi_p(s, self.p) * s.abs().powf(self.nu).ln_1p()
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let scale = b.abs().max(a.abs()).max(1.0);
        let tol = QUAD_TOL * scale.powf(self.p.get() + self.nu.max(1.0));
        adaptive_simpson(&|s| self.profile(s), a, b, tol)
    }

    /// `G(t)`; even in `t`.
    fn site_primitive(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 0.0;
        }
        let key = t.to_bits();
        if let Some(v) = self.cache.read().expect("cache poisoned").get(&key) {
            return *v;
        }
        let v = self.integrate(0.0, t);
        self.cache.write().expect("cache poisoned").insert(key, v);
        v
    }
}

impl Nonlinearity for Kuang {
    fn name(&self) -> &str {
        "kuang"
    }

    fn f(&self, k: i64, t: f64) -> f64 {
        let c = self.site_factor(k);
        if c == 0.0 {
            0.0
        } else {
            c * self.profile(t)
        }
    }

    fn primitive(&self, k: i64, t: f64) -> f64 {
        let c = self.site_factor(k);
        if c == 0.0 {
            0.0
        } else {
            c * self.site_primitive(t)
        }
    }

    fn primitive_diff(&self, k: i64, t0: f64, t1: f64) -> f64 {
        let c = self.site_factor(k);
        if c == 0.0 || t0 == t1 {
            0.0
        } else {
            c * self.integrate(t0, t1)
        }
    }

    fn flags(&self) -> Flags {
        Flags {
            vanishes_nonpositive: false,
            continuous: true,
        }
    }

    fn kinks(&self, _k: i64) -> Vec<f64> {
        vec![0.0]
    }

    fn support_sites(&self) -> Option<(i64, i64)> {
        None
    }
}
