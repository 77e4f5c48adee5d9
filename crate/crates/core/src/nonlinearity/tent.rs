//! Tent-shaped bumps with closed-form primitives, and the two oscillatory
//! constructions built from them.

use super::{Flags, Nonlinearity, NonlinearityError, OscillatorySpec};
use crate::lattice::{Exponent, Weights};

/// `f(t) = (2 mass / w^2)(w - 2|t - mid|)` on `[lo, hi]`, zero elsewhere,
/// with `w = hi - lo`. Its integral over `[lo, hi]` is exactly `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tent {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl Tent {
    pub fn new(lo: f64, hi: f64, mass: f64) -> Self {
        debug_assert!(lo < hi);
        Self { lo, hi, mass }
    }

    #[inline]
    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Value at the apex, `2 mass / w`.
    pub fn apex(&self) -> f64 {
        2.0 * self.mass / self.width()
    }

    pub fn f(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        let w = self.width();
        let dist = if t <= self.mid() { t - self.lo } else { self.hi - t };
        4.0 * self.mass * dist / (w * w)
    }

    /// `int_{-inf}^t f`, piecewise quadratic.
    pub fn primitive(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return self.mass;
        }
        let w2 = self.width() * self.width();
        if t <= self.mid() {
            let s = t - self.lo;
            2.0 * self.mass * s * s / w2
        } else {
            let s = self.hi - t;
            self.mass - 2.0 * self.mass * s * s / w2
        }
    }

    /// `int_{t0}^{t1} f`, integrated piece by piece so that short intervals
    /// keep full relative accuracy.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 < t0 {
            return -self.integral(t1, t0);
        }
        let a = t0.max(self.lo);
        let b = t1.min(self.hi);
        if a >= b {
            return 0.0;
        }
        let m = self.mid();
        let trap = |x: f64, y: f64| 0.5 * (y - x) * (self.f(x) + self.f(y));
        if b <= m || a >= m {
            trap(a, b)
        } else {
            trap(a, m) + trap(m, b)
        }
    }

    fn kinks(&self) -> [f64; 3] {
        [self.lo, self.mid(), self.hi]
    }
}

/// Nonoverlapping tents sorted by position, with prefix masses.
#[derive(Debug, Clone)]
struct TentBank {
    tents: Vec<Tent>,
    prefix: Vec<f64>,
}

impl TentBank {
    fn new(tents: Vec<Tent>) -> Self {
        let mut prefix = Vec::with_capacity(tents.len() + 1);
        let mut s = 0.0;
        prefix.push(0.0);
        for t in &tents {
            s += t.mass;
            prefix.push(s);
        }
        Self { tents, prefix }
    }

    /// Index of the first tent whose upper end exceeds `t`.
    fn locate(&self, t: f64) -> usize {
        self.tents.partition_point(|b| b.hi <= t)
    }

    fn f(&self, t: f64) -> f64 {
        self.tents.get(self.locate(t)).map_or(0.0, |b| b.f(t))
    }

    fn primitive(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let partial = self.tents.get(i).map_or(0.0, |b| b.primitive(t));
        self.prefix[i] + partial
    }

    fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 < t0 {
            return -self.integral(t1, t0);
        }
        let mut s = 0.0;
        for b in &self.tents[self.locate(t0)..] {
            if b.lo >= t1 {
                break;
            }
            s += b.integral(t0, t1);
        }
        s
    }

    fn kinks(&self) -> Vec<f64> {
        self.tents.iter().flat_map(|b| b.kinks()).collect()
    }
}

/// One tent per positive site: `f(k, .)` is the tent on `[d_k, c_{k+1}]`
/// with mass `h_k`; `f(k, .) = 0` for `k <= 0` and for `k > n_max`.
#[derive(Debug, Clone)]
pub struct Example1 {
    tents: Vec<Tent>,
}

impl Example1 {
    pub fn new(spec: &OscillatorySpec, w: &Weights, p: Exponent) -> Result<Self, NonlinearityError> {
        spec.check_example1(w, p)?;
        let tents = (1..=spec.n_max())
            .map(|k| Tent::new(spec.d(k), spec.c(k + 1), spec.h(k)))
            .collect();
        Ok(Self { tents })
    }

    fn tent(&self, k: i64) -> Option<&Tent> {
        if k < 1 {
            return None;
        }
        self.tents.get(k as usize - 1)
    }
}

impl Nonlinearity for Example1 {
    fn name(&self) -> &str {
        "example1"
    }

    fn f(&self, k: i64, t: f64) -> f64 {
        self.tent(k).map_or(0.0, |b| b.f(t))
    }

    fn primitive(&self, k: i64, t: f64) -> f64 {
        self.tent(k).map_or(0.0, |b| b.primitive(t))
    }

    fn primitive_diff(&self, k: i64, t0: f64, t1: f64) -> f64 {
        self.tent(k).map_or(0.0, |b| b.integral(t0, t1))
    }

    fn flags(&self) -> Flags {
        Flags {
            vanishes_nonpositive: true,
            continuous: true,
        }
    }

    fn kinks(&self, k: i64) -> Vec<f64> {
        self.tent(k).map_or_else(Vec::new, |b| b.kinks().to_vec())
    }

    fn support_sites(&self) -> Option<(i64, i64)> {
        Some((1, self.tents.len() as i64))
    }
}

/// All mass sits at site 0: `f(0, .)` is a sum of tents on `[d_n, c_{n+1}]`
/// with masses `h_n`; `f(k, .) = 0` for `k != 0`.
///
/// The tent height is normalized so that each bump integrates to exactly
/// `h_n` and `F(0, c_{n+1}) = h_1 + ... + h_n`.
#[derive(Debug, Clone)]
pub struct Example2 {
    bank: TentBank,
}

impl Example2 {
    pub fn new(spec: &OscillatorySpec, w: &Weights, p: Exponent) -> Result<Self, NonlinearityError> {
        spec.check_example2(w, p)?;
        let tents = (1..=spec.n_max())
            .map(|n| Tent::new(spec.d(n), spec.c(n + 1), spec.h(n)))
            .collect();
        Ok(Self {
            bank: TentBank::new(tents),
        })
    }
}

impl Nonlinearity for Example2 {
    fn name(&self) -> &str {
        "example2"
    }

    fn f(&self, k: i64, t: f64) -> f64 {
        if k == 0 {
            self.bank.f(t)
        } else {
            0.0
        }
    }

    fn primitive(&self, k: i64, t: f64) -> f64 {
        if k == 0 {
            self.bank.primitive(t)
        } else {
            0.0
        }
    }

    fn primitive_diff(&self, k: i64, t0: f64, t1: f64) -> f64 {
        if k == 0 {
            self.bank.integral(t0, t1)
        } else {
            0.0
        }
    }

    fn flags(&self) -> Flags {
        Flags {
            vanishes_nonpositive: true,
            continuous: true,
        }
    }

    fn kinks(&self, k: i64) -> Vec<f64> {
        if k == 0 {
            self.bank.kinks()
        } else {
            Vec::new()
        }
    }

    fn support_sites(&self) -> Option<(i64, i64)> {
        Some((0, 0))
    }
}
