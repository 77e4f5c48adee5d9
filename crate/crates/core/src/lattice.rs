//! Sequence-space primitives on the integer lattice.
//!
//! A [`LatticeVec`] is a finitely supported function `u: Z -> R`, stored as a
//! window of values with an implicit zero extension. Every sum in this module
//! runs over the window padded by one index on each side, which are the only
//! indices where a finitely supported `u` produces nonzero terms, so the norms
//! are exact rather than truncated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("exponent p must satisfy p > 1, got {0}")]
    InvalidExponent(f64),
    #[error("lattice vector window must be nonempty")]
    EmptyWindow,
    #[error("non-finite value {value} at lattice index {index}")]
    NonFinite { index: i64, value: f64 },
    #[error("invalid weight rule: {0}")]
    InvalidWeight(String),
}

/// Neumaier-compensated accumulator. Terms are added in call order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// The exponent `p` of the p-Laplacian, strictly greater than one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self, LatticeError> {
        if p.is_finite() && p > 1.0 {
            Ok(Self(p))
        } else {
            Err(LatticeError::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = f64::deserialize(d)?;
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// `|t|^(p-2) t`, extended by continuity with value 0 at `t = 0`.
#[inline]
pub fn phi_p(t: f64, p: Exponent) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let p = p.get();
    if p == 2.0 {
        t
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

/// `|x + s|^p - |x|^p`, keeping full relative accuracy when `s` is small
/// against `x`.
pub fn pow_abs_step(x: f64, s: f64, p: Exponent) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let p = p.get();
    if p == 2.0 {
        return s * (2.0 * x + s);
    }
    let y = x + s;
    if x == 0.0 || y == 0.0 || (y > 0.0) != (x > 0.0) {
        return y.abs().powf(p) - x.abs().powf(p);
    }
    x.abs().powf(p) * (p * (s / x).ln_1p()).exp_m1()
}

/// Positive weight sequence on `Z` given by a closed-form rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightRule {
    /// `value` for every k.
    Constant { value: f64 },
    /// `c0 + c1 |k|`.
    AffineAbs { c0: f64, c1: f64 },
    /// `c0 + c1 |k|^alpha`.
    Power { c0: f64, c1: f64, alpha: f64 },
    /// `values[k - offset]` inside the table, `default` elsewhere.
    Table {
        offset: i64,
        values: Vec<f64>,
        default: Box<WeightRule>,
    },
}

impl WeightRule {
    pub fn eval(&self, k: i64) -> f64 {
        match self {
            WeightRule::Constant { value } => *value,
            WeightRule::AffineAbs { c0, c1 } => c0 + c1 * (k.unsigned_abs() as f64),
            WeightRule::Power { c0, c1, alpha } => {
                c0 + c1 * (k.unsigned_abs() as f64).powf(*alpha)
            }
            WeightRule::Table {
                offset,
                values,
                default,
            } => {
                let idx = k - offset;
                if idx >= 0 && (idx as usize) < values.len() {
                    values[idx as usize]
                } else {
                    default.eval(k)
                }
            }
        }
    }

    /// Checks that the rule is finite and strictly positive on all of `Z`.
    pub fn validate(&self) -> Result<(), LatticeError> {
        let bad = |msg: String| Err(LatticeError::InvalidWeight(msg));
        match self {
            WeightRule::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return bad(format!("constant weight must be positive, got {value}"));
                }
            }
            WeightRule::AffineAbs { c0, c1 } => {
                if !(c0.is_finite() && c1.is_finite() && *c0 > 0.0 && *c1 >= 0.0) {
                    return bad(format!("affine weight needs c0 > 0, c1 >= 0, got ({c0}, {c1})"));
                }
            }
            WeightRule::Power { c0, c1, alpha } => {
                if !(c0.is_finite()
                    && c1.is_finite()
                    && alpha.is_finite()
                    && *c0 > 0.0
                    && *c1 >= 0.0
                    && *alpha > 0.0)
                {
                    return bad(format!(
                        "power weight needs c0 > 0, c1 >= 0, alpha > 0, got ({c0}, {c1}, {alpha})"
                    ));
                }
            }
            WeightRule::Table {
                values, default, ..
            } => {
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return bad(format!("table weight entries must be positive, got {v}"));
                }
                default.validate()?;
            }
        }
        Ok(())
    }

    /// Infimum of the rule over `Z` (attained for every built-in rule).
    pub fn lower_bound(&self) -> f64 {
        match self {
            WeightRule::Constant { value } => *value,
            WeightRule::AffineAbs { c0, .. } | WeightRule::Power { c0, .. } => *c0,
            WeightRule::Table {
                values, default, ..
            } => values
                .iter()
                .copied()
                .fold(default.lower_bound(), f64::min),
        }
    }

    /// Smallest `k*` such that the rule is nondecreasing in `|k|` for
    /// `|k| >= k*` and grows without bound, if the rule is of that kind.
    pub fn coercive_from(&self) -> Option<i64> {
        match self {
            WeightRule::Constant { .. } => None,
            WeightRule::AffineAbs { c1, .. } | WeightRule::Power { c1, .. } => {
                (*c1 > 0.0).then_some(0)
            }
            WeightRule::Table {
                offset,
                values,
                default,
            } => {
                let inner = default.coercive_from()?;
                let beyond = offset.unsigned_abs().max((offset + values.len() as i64).unsigned_abs());
                Some(inner.max(beyond as i64 + 1))
            }
        }
    }
}

/// The pair of weights `(a, b)` together with the exponent-free data they
/// carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub a: WeightRule,
    pub b: WeightRule,
}

impl Weights {
    pub fn new(a: WeightRule, b: WeightRule) -> Result<Self, LatticeError> {
        a.validate()?;
        b.validate()?;
        Ok(Self { a, b })
    }

    /// `a = 1`, `b(k) = 2 + |k|`.
    pub fn desk() -> Self {
        Self {
            a: WeightRule::Constant { value: 1.0 },
            b: WeightRule::AffineAbs { c0: 2.0, c1: 1.0 },
        }
    }

    #[inline]
    pub fn a(&self, k: i64) -> f64 {
        self.a.eval(k)
    }

    #[inline]
    pub fn b(&self, k: i64) -> f64 {
        self.b.eval(k)
    }

    pub fn b0(&self) -> f64 {
        self.b.lower_bound()
    }

    /// `a(k+1) + a(k) + b(k)`, the weight scale of a single-site spike at `k`.
    pub fn spike_scale(&self, k: i64) -> f64 {
        self.a(k + 1) + self.a(k) + self.b(k)
    }

    /// Sampled check of hypothesis (B) over `|k| <= k_max`: `b >= b0 > 0`
    /// everywhere and `b` nondecreasing in `|k|` beyond the rule's `k*`.
    pub fn check_b(&self, k_max: i64) -> WeightCheck {
        let b0 = self.b0();
        let mut min_b = f64::INFINITY;
        for k in -k_max..=k_max {
            min_b = min_b.min(self.b(k));
        }
        let k_star = self.b.coercive_from();
        let monotone = k_star.is_some_and(|ks| {
            (ks..k_max).all(|k| self.b(k + 1) >= self.b(k) && self.b(-k - 1) >= self.b(-k))
        });
        let a_positive = (-k_max..=k_max + 1).all(|k| self.a(k) > 0.0);
        WeightCheck {
            b0,
            min_sampled_b: min_b,
            k_star,
            coercive: monotone,
            a_positive,
            pass: b0 > 0.0 && min_b >= b0 && monotone && a_positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightCheck {
    pub b0: f64,
    pub min_sampled_b: f64,
    pub k_star: Option<i64>,
    pub coercive: bool,
    pub a_positive: bool,
    pub pass: bool,
}

/// Finitely supported real function on `Z`: `u(k) = values[k - offset]`
/// inside the window and zero outside it.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeVec {
    offset: i64,
    values: Vec<f64>,
}

impl LatticeVec {
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self, LatticeError> {
        if values.is_empty() {
            return Err(LatticeError::EmptyWindow);
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(LatticeError::NonFinite {
                index: offset + i as i64,
                value: *v,
            });
        }
        Ok(Self { offset, values })
    }

    /// Zero vector on the inclusive window `[lo, hi]`.
    pub fn zeros(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        Self {
            offset: lo,
            values: vec![0.0; (hi - lo + 1) as usize],
        }
    }

    /// `u(k0) = t`, zero elsewhere.
    pub fn spike(k0: i64, t: f64) -> Self {
        Self {
            offset: k0,
            values: vec![t],
        }
    }

    #[inline]
    pub fn offset(&self) -> i64 {
        self.offset
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Inclusive window bounds `(lo, hi)`.
    #[inline]
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.values.len() as i64 - 1)
    }

    #[inline]
    pub fn get(&self, k: i64) -> f64 {
        let idx = k - self.offset;
        if idx >= 0 && (idx as usize) < self.values.len() {
            self.values[idx as usize]
        } else {
            0.0
        }
    }

    /// `(k, u(k))` over the window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.offset + i as i64, *v))
    }

    /// Same function restricted to (or zero-padded onto) `[lo, hi]`.
    pub fn embed(&self, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window [{lo}, {hi}]");
        Self {
            offset: lo,
            values: (lo..=hi).map(|k| self.get(k)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

impl PartialEq for LatticeVec {
    fn eq(&self, other: &Self) -> bool {
        let (a_lo, a_hi) = self.window();
        let (b_lo, b_hi) = other.window();
        (a_lo.min(b_lo)..=a_hi.max(b_hi)).all(|k| self.get(k) == other.get(k))
    }
}

/// `u(k) - u(k-1)`.
#[inline]
pub fn forward_diff(u: &LatticeVec, k: i64) -> f64 {
    u.get(k) - u.get(k - 1)
}

/// `sum_k [a(k) |u(k) - u(k-1)|^p + b(k) |u(k)|^p]`, the p-th power of the
/// X-norm.
pub fn norm_x_pow(u: &LatticeVec, w: &Weights, p: Exponent) -> f64 {
    let (lo, hi) = u.window();
    let pp = p.get();
    let mut acc = CompensatedSum::new();
    for k in lo..=hi + 1 {
        acc.add(w.a(k) * forward_diff(u, k).abs().powf(pp));
        let uk = u.get(k);
        if uk != 0.0 {
            acc.add(w.b(k) * uk.abs().powf(pp));
        }
    }
    acc.value()
}

pub fn norm_x(u: &LatticeVec, w: &Weights, p: Exponent) -> f64 {
    norm_x_pow(u, w, p).powf(1.0 / p.get())
}

pub fn norm_lp(u: &LatticeVec, p: Exponent) -> f64 {
    let pp = p.get();
    let acc: CompensatedSum = u.values().iter().map(|v| v.abs().powf(pp)).collect();
    acc.value().powf(1.0 / pp)
}

pub fn norm_linf(u: &LatticeVec) -> f64 {
    u.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// The three norms in the chain `|u|_inf <= |u|_p <= b0^(-1/p) |u|_X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    pub linf: f64,
    pub lp: f64,
    pub scaled_x: f64,
    pub holds: bool,
}

const EMBEDDING_SLACK: f64 = 1e-12;

pub fn embedding_check(u: &LatticeVec, w: &Weights, p: Exponent) -> EmbeddingCheck {
    let linf = norm_linf(u);
    let lp = norm_lp(u, p);
    let scaled_x = w.b0().powf(-1.0 / p.get()) * norm_x(u, w, p);
    let holds = linf <= lp * (1.0 + EMBEDDING_SLACK) && lp <= scaled_x * (1.0 + EMBEDDING_SLACK);
    EmbeddingCheck {
        linf,
        lp,
        scaled_x,
        holds,
    }
}
