//! Sampled checks of the structural hypotheses on `f` and estimators of the
//! growth constants `B_+`, `B_-`, `B_0`.
//!
//! Limits and suprema over infinite sets are not computable, so every probe
//! here reports finite-sample evidence: ratios along a grid, partial sums, or
//! shell-wise maxima indexed by a threshold so that divergence shows up as
//! growth across thresholds.

use rand::Rng;
use serde::Serialize;

use super::{Nonlinearity, OscillatorySpec};
use crate::lattice::{Exponent, Weights};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Report {
    pub t: Vec<f64>,
    /// `sup_k max(|f(k, t)|, |f(k, -t)|) / t^(p-1)` per grid point.
    pub ratios: Vec<f64>,
    pub monotone: bool,
    pub final_ratio: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Ratio `|f(k, +-t)| / t^(p-1)` along a decreasing grid `t -> 0`. Passes
/// when the ratios are nonincreasing and the last one is below `tol`.
pub fn check_f1(
    nl: &dyn Nonlinearity,
    p: Exponent,
    t_grid: &[f64],
    k_range: (i64, i64),
    tol: f64,
) -> F1Report {
    let pp = p.get();
    let ratios: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let denom = t.powf(pp - 1.0);
            (k_range.0..=k_range.1)
                .map(|k| nl.f(k, t).abs().max(nl.f(k, -t).abs()) / denom)
                .fold(0.0, f64::max)
        })
        .collect();
    let grid_ok = t_grid.windows(2).all(|w| w[1] < w[0]) && t_grid.iter().all(|t| *t > 0.0);
    let monotone = grid_ok && ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let final_ratio = ratios.last().copied().unwrap_or(f64::INFINITY);
    F1Report {
        t: t_grid.to_vec(),
        monotone,
        final_ratio,
        tol,
        pass: monotone && final_ratio <= tol,
        ratios,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleWitness {
    pub k: i64,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F2Report {
    pub max_value: f64,
    /// Location of the largest sampled value.
    pub witness: Option<SampleWitness>,
    pub samples: usize,
    pub pass: bool,
}

/// Samples `f(k, t)` on every `[c_n, d_n]`, `n = 1..=n_max`, `k` in
/// `k_range`. Passes iff no sampled value is positive.
pub fn check_f2(
    nl: &dyn Nonlinearity,
    spec: &OscillatorySpec,
    n_max: usize,
    k_range: (i64, i64),
    samples_per_interval: usize,
) -> F2Report {
    let m = samples_per_interval.max(3);
    let mut best: Option<SampleWitness> = None;
    let mut count = 0;
    for n in 1..=n_max.min(spec.n_max()) {
        let (c, d) = (spec.c(n), spec.d(n));
        for k in k_range.0..=k_range.1 {
            for i in 0..m {
                let t = c + (d - c) * i as f64 / (m - 1) as f64;
                let value = nl.f(k, t);
                count += 1;
                if best.is_none_or(|b| value > b.value) {
                    best = Some(SampleWitness { k, t, value });
                }
            }
        }
    }
    let max_value = best.map_or(f64::NEG_INFINITY, |b| b.value);
    F2Report {
        max_value,
        witness: best,
        samples: count,
        pass: max_value <= 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F3Report {
    pub r: f64,
    pub n: usize,
    pub k_max: i64,
    /// `(k, s_k)` with `s_k = max_{t in [r, d_n]} |F(k, t)|` on the sample grid.
    pub site_sup: Vec<(i64, f64)>,
    /// Partial sums over `|k| <= j` for `j = 0..=k_max`.
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Mass of `s_k` over `k_max/2 <= |k| <= k_max` relative to the total.
    pub tail_ratio: f64,
}

/// Summability surrogate for `sup_{t in [r, d_n]} |F(., t)| in l1`.
pub fn check_f3(
    nl: &dyn Nonlinearity,
    spec: &OscillatorySpec,
    r: f64,
    n: usize,
    k_max: i64,
    t_samples: usize,
) -> F3Report {
    assert!(r < 0.0, "r must be negative");
    let dn = spec.d(n);
    let mut grid: Vec<f64> = (0..t_samples.max(2))
        .map(|i| r + (dn - r) * i as f64 / (t_samples.max(2) - 1) as f64)
        .collect();
    grid.push(0.0);
    for j in 1..=n {
        grid.push(spec.c(j));
        grid.push(spec.d(j));
    }
    let site_sup: Vec<(i64, f64)> = (-k_max..=k_max)
        .map(|k| {
            let s = grid.iter().map(|&t| nl.primitive(k, t).abs()).fold(0.0, f64::max);
            (k, s)
        })
        .collect();
    let s_at = |k: i64| site_sup[(k + k_max) as usize].1;
    let mut partial_sums = Vec::with_capacity(k_max as usize + 1);
    let mut acc = s_at(0);
    partial_sums.push(acc);
    for j in 1..=k_max {
        acc += s_at(j) + s_at(-j);
        partial_sums.push(acc);
    }
    let total = acc;
    let tail: f64 = (-k_max..=k_max)
        .filter(|k| 2 * k.abs() >= k_max)
        .map(s_at)
        .sum();
    F3Report {
        r,
        n,
        k_max,
        site_sup,
        partial_sums,
        total,
        tail_ratio: if total > 0.0 { tail / total } else { 0.0 },
    }
}

/// Shell-wise maximum of `F(k, t) / ([a(k+1) + a(k) + b(k)] t^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellEstimate {
    pub k_threshold: i64,
    pub t_threshold: f64,
    /// `-inf` when the shell holds no sample.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BProbeReport {
    pub b_plus: Vec<ShellEstimate>,
    pub b_minus: Vec<ShellEstimate>,
    pub b_zero: Vec<ShellEstimate>,
    pub b_plus_est: f64,
    pub b_minus_est: f64,
    pub b_zero_est: f64,
    pub b_est: f64,
    /// Shell estimates strictly increase across every threshold.
    pub b_plus_diverging: bool,
    pub b_minus_diverging: bool,
    pub b_zero_diverging: bool,
    pub k_grid: Vec<i64>,
    pub t_grid: Vec<f64>,
}

impl BProbeReport {
    /// Growth across thresholds in at least one estimator, taken as evidence
    /// that `B = +inf`.
    pub fn infinite_evidence(&self) -> bool {
        self.b_plus_diverging || self.b_minus_diverging || self.b_zero_diverging
    }
}

fn strictly_increasing(shells: &[ShellEstimate]) -> bool {
    shells.len() >= 2
        && shells[0].value.is_finite()
        && shells.windows(2).all(|w| w[1].value > w[0].value)
}

fn shell_max(shells: &[ShellEstimate]) -> f64 {
    shells.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max)
}

/// Threshold-indexed lower bounds for `B_+`, `B_-` and `B_0`.
///
/// `k_grid` holds positive sites (mirrored for `B_-`), `t_grid` positive
/// levels, and `thresholds` increasing pairs `(k_j, t_j)`. Shell `j` of
/// `B_+` takes `k_j <= k < k_{j+1}` and `t >= t_j`; `B_-` mirrors it in
/// `k`; shell `j` of `B_0` takes every sampled `k` and
/// `t_j <= t < t_{j+1}`. The last shell is unbounded above.
pub fn estimate_b(
    nl: &dyn Nonlinearity,
    w: &Weights,
    p: Exponent,
    k_grid: &[i64],
    t_grid: &[f64],
    thresholds: &[(i64, f64)],
) -> BProbeReport {
    let pp = p.get();
    let ratio = |k: i64, t: f64| nl.primitive(k, t) / (w.spike_scale(k) * t.powf(pp));
    let upper = |j: usize| thresholds.get(j + 1).copied();

    let side = |sign: i64| -> Vec<ShellEstimate> {
        thresholds
            .iter()
            .enumerate()
            .map(|(j, &(k_thr, t_thr))| {
                let k_next = upper(j).map_or(i64::MAX, |u| u.0);
                let mut value = f64::NEG_INFINITY;
                for &k in k_grid.iter().filter(|&&k| k >= k_thr && k < k_next) {
                    for &t in t_grid.iter().filter(|&&t| t >= t_thr) {
                        value = value.max(ratio(sign * k, t));
                    }
                }
                ShellEstimate {
                    k_threshold: k_thr,
                    t_threshold: t_thr,
                    value,
                }
            })
            .collect()
    };
    let b_plus = side(1);
    let b_minus = side(-1);

    let all_k: Vec<i64> = k_grid
        .iter()
        .rev()
        .map(|k| -k)
        .chain(std::iter::once(0))
        .chain(k_grid.iter().copied())
        .collect();
    let b_zero: Vec<ShellEstimate> = thresholds
        .iter()
        .enumerate()
        .map(|(j, &(k_thr, t_thr))| {
            let t_next = upper(j).map_or(f64::INFINITY, |u| u.1);
            let mut value = f64::NEG_INFINITY;
            for &k in &all_k {
                for &t in t_grid.iter().filter(|&&t| t >= t_thr && t < t_next) {
                    value = value.max(ratio(k, t));
                }
            }
            ShellEstimate {
                k_threshold: k_thr,
                t_threshold: t_thr,
                value,
            }
        })
        .collect();

    let b_plus_est = shell_max(&b_plus);
    let b_minus_est = shell_max(&b_minus);
    let b_zero_est = shell_max(&b_zero);
    BProbeReport {
        b_plus_diverging: strictly_increasing(&b_plus),
        b_minus_diverging: strictly_increasing(&b_minus),
        b_zero_diverging: strictly_increasing(&b_zero),
        b_est: b_plus_est.max(b_minus_est).max(b_zero_est),
        b_plus_est,
        b_minus_est,
        b_zero_est,
        b_plus,
        b_minus,
        b_zero,
        k_grid: k_grid.to_vec(),
        t_grid: t_grid.to_vec(),
    }
}

/// Default probe grid: every `c_n`, `d_n`, bump midpoint, and a geometric
/// ladder `2^(i/4)` up to `c_{n_max+1}`.
pub fn default_t_grid(spec: &OscillatorySpec) -> Vec<f64> {
    let top = spec.c(spec.n_max() + 1);
    let mut grid = Vec::new();
    for n in 1..=spec.n_max() {
        grid.push(spec.c(n));
        grid.push(spec.d(n));
        grid.push(0.5 * (spec.d(n) + spec.c(n + 1)));
    }
    grid.push(top);
    let mut i = 0;
    loop {
        let t = 2f64.powf(i as f64 / 4.0);
        if t > top {
            break;
        }
        grid.push(t);
        i += 1;
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimitiveReport {
    pub max_rel_err: f64,
    pub worst: Option<SampleWitness>,
    pub points: usize,
}

/// Central difference of `F(k, .)` against `f(k, .)` at `count` random
/// points, skipping any point within `10 h` of a declared kink. The error is
/// `|cd - f| / max(1, |f|)`.
pub fn check_primitive(
    nl: &dyn Nonlinearity,
    rng: &mut impl Rng,
    k_range: (i64, i64),
    t_range: (f64, f64),
    count: usize,
    h: f64,
) -> PrimitiveReport {
    let mut max_rel_err: f64 = 0.0;
    let mut worst = None;
    let mut points = 0;
    while points < count {
        let k = rng.gen_range(k_range.0..=k_range.1);
        let t = rng.gen_range(t_range.0..t_range.1);
        if nl.kinks(k).iter().any(|x| (t - x).abs() < 10.0 * h) {
            continue;
        }
        points += 1;
        let cd = (nl.primitive(k, t + h) - nl.primitive(k, t - h)) / (2.0 * h);
        let f = nl.f(k, t);
        let err = (cd - f).abs() / f.abs().max(1.0);
        if err > max_rel_err {
            max_rel_err = err;
            worst = Some(SampleWitness { k, t, value: err });
        }
    }
    PrimitiveReport {
        max_rel_err,
        worst,
        points,
    }
}
