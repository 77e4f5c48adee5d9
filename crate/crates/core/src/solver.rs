//! Minimization of `J_λ` over the boxes `W_n = {u : r <= u(k) <= d_n}`.
//!
//! Each level `n` is solved by projected gradient descent with Armijo
//! backtracking along the projection arc. For `p >= 2` the direction is the
//! gradient divided by the diagonal curvature of `Phi`, which keeps sites
//! with small values from converging slowly. The first trial step of every
//! iteration is the Barzilai-Borwein step; acceptance is monotone, so `J`
//! strictly decreases across accepted steps. Energy changes are assembled
//! term by term (see [`WindowedEnergy::delta`]) so that the Armijo test stays
//! meaningful down to the stopping tolerance.
//!
//! Descent starts from the zero vector, from the best single-site spike
//! that fits in `W_n`, and from a greedy coordinate refinement of that
//! spike; the lowest critical point found is kept. The lattice is truncated
//! to a window that is widened until the solution's tails are negligible.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{self, EnergyError, WindowedEnergy};
use crate::lattice::{self, Exponent, LatticeVec, Weights};
use crate::nonlinearity::{Nonlinearity, OscillatorySpec};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("level {} did not reach the projected-gradient tolerance within the iteration budget (pg = {})", .0.n, .0.pg_norm)]
    MaxIterExceeded(Box<SolutionRecord>),
    #[error("non-finite energy at level {n}")]
    NonfiniteEnergy { n: usize },
    #[error("level n = {n} outside 1..={n_max}")]
    LevelOutOfRange { n: usize, n_max: usize },
    #[error("invalid solver parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// `{u : lower <= u(k) <= upper}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSet {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

impl BoxSet {
    /// `W_n` with `lower = r < 0` and `upper = d_n`.
    pub fn for_level(n: usize, spec: &OscillatorySpec, r: f64) -> Result<Self, SolveError> {
        if n == 0 || n > spec.n_max() {
            return Err(SolveError::LevelOutOfRange {
                n,
                n_max: spec.n_max(),
            });
        }
        if !(r < 0.0) {
            return Err(SolveError::InvalidParams(format!("r must be negative, got {r}")));
        }
        Ok(Self {
            n,
            lower: r,
            upper: spec.d(n),
        })
    }

    #[inline]
    pub fn project(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Stop when `max_k |u(k) - P(u(k) - g(k))| <= tol_pg`.
    pub tol_pg: f64,
    /// Residual bound at box-inactive sites for the critical-point certificate.
    pub tol_residual: f64,
    /// Iteration budget per descent; `None` means 50 times the window size.
    pub max_iter: Option<usize>,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub step0: f64,
    pub window_k0: i64,
    pub window_growth: f64,
    pub tail_eps: f64,
    pub max_doublings: u32,
    /// Lower box bound `r < 0`.
    pub r: f64,
    /// Spikes are searched over `|k0| <= k_search`.
    pub k_search: i64,
    /// Greedy coordinate sweeps applied to the spike before descent.
    pub greedy_sweeps: usize,
    pub parallel: bool,
    /// Scale the descent direction by the diagonal curvature of `Phi`
    /// (`p >= 2` only).
    pub diag_scaling: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tol_pg: 1e-8,
            tol_residual: 1e-6,
            max_iter: None,
            armijo_c: 1e-4,
            backtrack: 0.5,
            step0: 1.0,
            window_k0: 16,
            window_growth: 4.0,
            tail_eps: 1e-8,
            max_doublings: 3,
            r: -1.0,
            k_search: 32,
            greedy_sweeps: 4,
            parallel: true,
            diag_scaling: true,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidParams(m.to_string()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.tol_pg) || !pos(self.tol_residual) || !pos(self.tail_eps) || !pos(self.step0) {
            return bad("tolerances and step0 must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.window_growth.is_finite() && self.window_growth > 1.0) {
            return bad("window_growth must exceed 1");
        }
        if self.window_k0 < 1 || self.k_search < 0 {
            return bad("window_k0 must be positive and k_search nonnegative");
        }
        if !(self.r.is_finite() && self.r < 0.0) {
            return bad("r must be negative");
        }
        if self.max_iter == Some(0) {
            return bad("max_iter must be positive");
        }
        Ok(())
    }
}

/// Everything that defines one instance of the problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub p: Exponent,
    pub lambda: f64,
    pub weights: Weights,
    pub nl: Arc<dyn Nonlinearity>,
    pub spec: OscillatorySpec,
    pub params: SolverParams,
}

impl Problem {
    pub fn new(
        p: Exponent,
        lambda: f64,
        weights: Weights,
        nl: Arc<dyn Nonlinearity>,
        spec: OscillatorySpec,
        params: SolverParams,
    ) -> Result<Self, SolveError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(EnergyError::NonPositiveLambda(lambda).into());
        }
        params.validate()?;
        if !nl.flags().vanishes_nonpositive {
            log::warn!(
                "nonlinearity `{}` does not declare F(k, s) = 0 for s <= 0; the bounds 0 <= u_n <= c_n are not guaranteed",
                nl.name()
            );
        }
        Ok(Self {
            p,
            lambda,
            weights,
            nl,
            spec,
            params,
        })
    }

    pub fn energy_on(&self, lo: i64, hi: i64) -> WindowedEnergy<'_> {
        WindowedEnergy::new(lo, hi, &self.weights, self.p, self.nl.as_ref(), self.lambda)
    }

    pub fn box_for(&self, n: usize) -> Result<BoxSet, SolveError> {
        BoxSet::for_level(n, &self.spec, self.params.r)
    }
}

/// `J` of the spike `u(k0) = t`, zero elsewhere:
/// `(1/p)(a(k0+1) + a(k0) + b(k0)) |t|^p - λ F(k0, t)`.
pub fn spike_energy(
    k0: i64,
    t: f64,
    w: &Weights,
    p: Exponent,
    nl: &dyn Nonlinearity,
    lambda: f64,
) -> f64 {
    w.spike_scale(k0) * t.abs().powf(p.get()) / p.get() - lambda * nl.primitive(k0, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spike {
    pub k0: i64,
    pub t: f64,
    pub energy: f64,
}

/// Spike levels tried at level `n`: every `c_j`, `d_j` not exceeding `d_n`.
pub fn spike_levels(n: usize, spec: &OscillatorySpec) -> Vec<f64> {
    let dn = spec.d(n);
    let mut levels: Vec<f64> = (1..=n + 1)
        .map(|j| spec.c(j))
        .chain((1..=n).map(|j| spec.d(j)))
        .filter(|t| *t <= dn)
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

/// Lowest-energy spike over `|k0| <= k_search` and [`spike_levels`].
/// Ties keep the first candidate in order of increasing `k0`, then `t`.
pub fn select_spike(n: usize, problem: &Problem) -> Spike {
    let levels = spike_levels(n, &problem.spec);
    let mut best: Option<Spike> = None;
    let ks = problem.params.k_search;
    for k0 in -ks..=ks {
        for &t in &levels {
            let e = spike_energy(k0, t, &problem.weights, problem.p, problem.nl.as_ref(), problem.lambda);
            if best.is_none_or(|b| e < b.energy) {
                best = Some(Spike { k0, t, energy: e });
            }
        }
    }
    best.expect("spike level set is never empty")
}

/// Window containing `k0` and `0` with margin `max(K0, ceil(growth n))` on
/// each side.
pub fn window_select(n: usize, k0: i64, params: &SolverParams) -> (i64, i64) {
    let margin = params
        .window_k0
        .max((params.window_growth * n as f64).ceil() as i64);
    (k0.min(0) - margin, k0.max(0) + margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepLog {
    /// Accepted `J(x_new) - J(x)`.
    pub delta: f64,
    /// `c <g, x_new - x>`, the Armijo bound the delta had to meet.
    pub armijo_bound: f64,
    /// Fresh `J(x_new)`.
    pub energy: f64,
}

impl StepLog {
    pub fn armijo_holds(&self) -> bool {
        self.delta < 0.0 && self.delta <= self.armijo_bound
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveLog {
    pub starts: usize,
    pub window_doublings: u32,
    pub nesting_restart: bool,
    /// Accepted steps of the descent that produced the record, in order.
    /// After a window doubling only the final window's descent is kept.
    pub steps: Vec<StepLog>,
}

impl SolveLog {
    pub fn armijo_violations(&self) -> usize {
        self.steps.iter().filter(|s| !s.armijo_holds()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificates {
    /// `0 <= u(k) <= c_n` up to `1e-10`.
    pub claim2_bounds: bool,
    /// Residual at box-inactive sites within `tol_residual`.
    pub residual_ok: bool,
    /// `|u| <= tail_eps` at both window edges.
    pub tail_ok: bool,
    /// `eta <= min(0, spike energy) + 1e-10`.
    pub initializer_ok: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord {
    pub n: usize,
    pub u: LatticeVec,
    pub eta: f64,
    pub norm_x: f64,
    pub u_max: f64,
    pub residual_inf: f64,
    pub pg_norm: f64,
    pub iterations: usize,
    pub window: (i64, i64),
    pub box_set: BoxSet,
    pub spike: Spike,
    pub certificates: Certificates,
    #[serde(skip)]
    pub log: SolveLog,
}

pub const BOUND_SLACK: f64 = 1e-10;
const ACTIVE_SLACK: f64 = 1e-12;

/// Whether `v` sits on a face of the box.
pub fn is_active(v: f64, bx: &BoxSet) -> bool {
    v <= bx.lower + ACTIVE_SLACK * bx.lower.abs().max(1.0)
        || v >= bx.upper - ACTIVE_SLACK * bx.upper.abs().max(1.0)
}

/// Max residual of the equation over the padded window, skipping sites on a
/// face of the box.
pub fn inactive_residual(u: &LatticeVec, problem: &Problem, bx: &BoxSet) -> f64 {
    let g = energy::grad(u, &problem.weights, problem.p, problem.nl.as_ref(), problem.lambda);
    g.iter()
        .filter(|(k, _)| !is_active(u.get(*k), bx))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

fn projected_gradient_norm(x: &[f64], g: &[f64], bx: &BoxSet) -> f64 {
    x.iter()
        .zip(g)
        .fold(0.0, |m, (&xi, &gi)| m.max((xi - bx.project(xi - gi)).abs()))
}

/// Recomputes every derived quantity of a record from `u` alone.
pub fn build_record(
    n: usize,
    u: LatticeVec,
    problem: &Problem,
    spike: Spike,
    iterations: usize,
    log: SolveLog,
) -> Result<SolutionRecord, SolveError> {
    let bx = problem.box_for(n)?;
    let (lo, hi) = u.window();
    let report = energy::energy(&u, &problem.weights, problem.p, problem.nl.as_ref(), problem.lambda)?;
    if !report.j.is_finite() {
        return Err(SolveError::NonfiniteEnergy { n });
    }
    let we = problem.energy_on(lo, hi);
    let g = we.gradient(u.values());
    let pg_norm = projected_gradient_norm(u.values(), &g, &bx);
    let residual_inf = inactive_residual(&u, problem, &bx);
    let p = &problem.params;
    let cn = problem.spec.c(n);
    let certificates = Certificates {
        claim2_bounds: u.values().iter().all(|&v| v >= -BOUND_SLACK && v <= cn + BOUND_SLACK),
        residual_ok: residual_inf <= p.tol_residual,
        tail_ok: u.get(lo).abs() <= p.tail_eps && u.get(hi).abs() <= p.tail_eps,
        initializer_ok: report.j <= spike.energy.min(0.0) + BOUND_SLACK,
        converged: pg_norm <= p.tol_pg,
    };
    Ok(SolutionRecord {
        n,
        eta: report.j,
        norm_x: lattice::norm_x(&u, &problem.weights, problem.p),
        u_max: lattice::norm_linf(&u),
        residual_inf,
        pg_norm,
        iterations,
        window: (lo, hi),
        box_set: bx,
        spike,
        certificates,
        log,
        u,
    })
}

struct Descent {
    x: Vec<f64>,
    j: f64,
    iterations: usize,
    converged: bool,
    steps: Vec<StepLog>,
}

const MIN_STEP: f64 = 1e-30;
const KINK_SHIFT: f64 = 1e-12;
/// Floor on the scaling diagonal relative to its largest entry.
const SCALE_FLOOR: f64 = 1e-8;

/// Fill `dir` with the descent direction at `x`: the gradient, divided by
/// the curvature of `Phi` when scaling is on.
fn direction(we: &WindowedEnergy<'_>, x: &[f64], g: &[f64], scale: Option<&mut Vec<f64>>, dir: &mut [f64]) {
    match scale {
        Some(d) => {
            we.phi_curvature_into(x, d);
            let floor = SCALE_FLOOR * d.iter().cloned().fold(0.0, f64::max);
            for i in 0..x.len() {
                d[i] = d[i].max(floor).max(f64::MIN_POSITIVE);
                dir[i] = g[i] / d[i];
            }
        }
        None => dir.copy_from_slice(g),
    }
}

fn descend(we: &WindowedEnergy<'_>, bx: &BoxSet, x0: &[f64], params: &SolverParams, p: Exponent) -> Descent {
    let n = x0.len();
    let max_iter = params.max_iter.unwrap_or(50 * n);
    let mut x: Vec<f64> = x0.iter().map(|&v| bx.project(v)).collect();
    let mut g = we.gradient(&x);
    let mut j = we.energy(&x).j;
    let mut alpha = params.step0;
    let mut steps = Vec::new();
    let mut y = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut scale = (params.diag_scaling && p.get() >= 2.0).then(|| vec![0.0; n]);
    let mut dir = vec![0.0; n];

    while iterations < max_iter {
        if projected_gradient_norm(&x, &g, bx) <= params.tol_pg {
            converged = true;
            break;
        }
        direction(we, &x, &g, scale.as_mut(), &mut dir);
        let mut accepted = None;
        let mut trial = alpha;
        while trial >= MIN_STEP {
            for i in 0..n {
                y[i] = bx.project(x[i] - trial * dir[i]);
            }
            if p.get() < 2.0 {
                // phi_p' is unbounded at 0: keep nonzero neighbours from coinciding exactly
                for i in 1..n {
                    if y[i] == y[i - 1] && y[i] != 0.0 && y[i] != x[i] {
                        let shifted = y[i] + KINK_SHIFT * y[i].abs().max(1.0);
                        y[i] = if shifted <= bx.upper { shifted } else { y[i] - KINK_SHIFT * y[i].abs().max(1.0) };
                    }
                }
            }
            let gd: f64 = g.iter().zip(&y).zip(&x).map(|((gi, yi), xi)| gi * (yi - xi)).sum();
            if gd >= 0.0 {
                break;
            }
            let delta = we.delta(&x, &y);
            let bound = params.armijo_c * gd;
            if delta < 0.0 && delta <= bound {
                accepted = Some((delta, bound));
                break;
            }
            trial *= params.backtrack;
        }
        let Some((delta, bound)) = accepted else {
            break;
        };
        iterations += 1;
        we.gradient_into(&y, &mut g_new);
        // Barzilai-Borwein step in the metric of the scaling
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = y[i] - x[i];
            ss += s * s * scale.as_ref().map_or(1.0, |d| d[i]);
            sy += s * (g_new[i] - g[i]);
        }
        alpha = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { (trial * 2.0).min(1e12) };
        std::mem::swap(&mut x, &mut y);
        std::mem::swap(&mut g, &mut g_new);
        j = we.energy(&x).j;
        steps.push(StepLog {
            delta,
            armijo_bound: bound,
            energy: j,
        });
    }
    if !converged && projected_gradient_norm(&x, &g, bx) <= params.tol_pg {
        converged = true;
    }
    Descent {
        x,
        j,
        iterations,
        converged,
        steps,
    }
}

/// Cyclic coordinate sweeps over `candidates`, accepting any move that
/// lowers `J`.
fn greedy_refine(we: &WindowedEnergy<'_>, bx: &BoxSet, x: &mut [f64], candidates: &[f64], sweeps: usize) {
    for _ in 0..sweeps {
        let mut improved = false;
        for i in 0..x.len() {
            let mut best = (0.0, x[i]);
            for &v in candidates.iter().filter(|v| bx.contains(**v)) {
                let d = we.site_delta(x, i, v);
                if d < best.0 {
                    best = (d, v);
                }
            }
            if best.0 < 0.0 {
                x[i] = best.1;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

fn best_descent(we: &WindowedEnergy<'_>, bx: &BoxSet, starts: &[Vec<f64>], params: &SolverParams, p: Exponent) -> Descent {
    let mut best: Option<Descent> = None;
    for s in starts {
        let d = descend(we, bx, s, params, p);
        let better = match &best {
            None => true,
            Some(b) => d.j < b.j || (d.j == b.j && d.converged && !b.converged),
        };
        if better {
            best = Some(d);
        }
    }
    best.expect("at least one start")
}

/// Minimizes `J` over `W_n` restricted to the fixed window `[lo, hi]`.
/// `extra_start`, if given, is embedded into the window and tried as well.
pub fn minimize_on_window(
    n: usize,
    problem: &Problem,
    window: (i64, i64),
    extra_start: Option<&LatticeVec>,
) -> Result<SolutionRecord, SolveError> {
    let bx = problem.box_for(n)?;
    let spike = select_spike(n, problem);
    let (lo, hi) = window;
    let we = problem.energy_on(lo, hi);
    let starts = initial_points(n, problem, &we, &bx, &spike, extra_start);
    let d = best_descent(&we, &bx, &starts, &problem.params, problem.p);
    let log = SolveLog {
        starts: starts.len(),
        steps: d.steps,
        ..SolveLog::default()
    };
    let u = LatticeVec::new(lo, d.x).map_err(|_| SolveError::NonfiniteEnergy { n })?;
    let rec = build_record(n, u, problem, spike, d.iterations, log)?;
    if d.converged {
        Ok(rec)
    } else {
        Err(SolveError::MaxIterExceeded(Box::new(rec)))
    }
}

fn initial_points(
    n: usize,
    problem: &Problem,
    we: &WindowedEnergy<'_>,
    bx: &BoxSet,
    spike: &Spike,
    extra: Option<&LatticeVec>,
) -> Vec<Vec<f64>> {
    let (lo, hi) = (we.lo(), we.hi());
    let zero = vec![0.0; we.len()];
    let mut starts = vec![zero.clone()];
    let mut from_spike = zero;
    if (lo..=hi).contains(&spike.k0) {
        from_spike[(spike.k0 - lo) as usize] = bx.project(spike.t);
        starts.push(from_spike.clone());
    }
    if problem.params.greedy_sweeps > 0 {
        let mut candidates = spike_levels(n, &problem.spec);
        candidates.push(0.0);
        greedy_refine(we, bx, &mut from_spike, &candidates, problem.params.greedy_sweeps);
        starts.push(from_spike);
    }
    if let Some(u) = extra {
        starts.push(u.embed(lo, hi).values().to_vec());
    }
    starts.dedup();
    starts
}

/// Minimizes `J` over `W_n`, widening the window until the tails of the
/// minimizer fall below `tail_eps` (at most `max_doublings` times).
pub fn minimize_on_wn(n: usize, problem: &Problem) -> Result<SolutionRecord, SolveError> {
    minimize_on_wn_from(n, problem, None)
}

fn minimize_on_wn_from(
    n: usize,
    problem: &Problem,
    warm: Option<&LatticeVec>,
) -> Result<SolutionRecord, SolveError> {
    let params = &problem.params;
    let spike = select_spike(n, problem);
    let (mut lo, mut hi) = window_select(n, spike.k0, params);
    let mut result = minimize_on_window(n, problem, (lo, hi), warm);
    let mut doublings = 0;
    let mut total_iters = 0;
    loop {
        let rec = match &result {
            Ok(r) => r,
            Err(SolveError::MaxIterExceeded(r)) => r.as_ref(),
            Err(_) => return result,
        };
        total_iters += rec.iterations;
        if rec.certificates.tail_ok || doublings >= params.max_doublings {
            break;
        }
        let half = (hi - lo + 1) / 2;
        lo -= half;
        hi += half;
        doublings += 1;
        log::debug!("level {n}: tails above tolerance, widening window to [{lo}, {hi}]");
        let prev = rec.u.clone();
        result = minimize_on_window(n, problem, (lo, hi), Some(&prev));
    }
    let patch = |rec: &mut SolutionRecord| {
        rec.iterations = total_iters;
        rec.log.window_doublings = doublings;
        rec.log.nesting_restart = warm.is_some();
    };
    match result {
        Ok(mut rec) => {
            patch(&mut rec);
            Ok(rec)
        }
        Err(SolveError::MaxIterExceeded(mut rec)) => {
            patch(&mut rec);
            Err(SolveError::MaxIterExceeded(rec))
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug)]
pub struct SequenceResult {
    pub records: Vec<Result<SolutionRecord, SolveError>>,
}

impl SequenceResult {
    /// Records that exist, including best iterates of unconverged levels.
    pub fn available(&self) -> Vec<&SolutionRecord> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Ok(rec) => Some(rec),
                Err(SolveError::MaxIterExceeded(rec)) => Some(rec.as_ref()),
                Err(_) => None,
            })
            .collect()
    }

    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.is_ok())
    }

    /// `J` is identically zero along the sequence.
    pub fn degenerate(&self) -> bool {
        self.available().iter().all(|r| r.eta == 0.0)
    }

    pub fn eta_decreased(&self) -> bool {
        let recs = self.available();
        matches!((recs.first(), recs.last()), (Some(a), Some(b)) if recs.len() >= 2 && b.eta < a.eta)
    }

    pub fn norm_increased(&self) -> bool {
        let recs = self.available();
        matches!((recs.first(), recs.last()), (Some(a), Some(b)) if recs.len() >= 2 && b.norm_x > a.norm_x)
    }
}

/// Solves levels `n = 1..=levels`. Levels are independent and may run
/// concurrently; a second, sequential pass re-solves any level whose energy
/// exceeds its predecessor's, warm-started from the predecessor (which lies
/// in the larger box). Output is identical for serial and parallel runs.
pub fn run_sequence(levels: usize, problem: &Problem) -> SequenceResult {
    let solve = |n: usize| minimize_on_wn(n, problem);
    let mut records: Vec<Result<SolutionRecord, SolveError>> = if problem.params.parallel {
        (1..=levels).into_par_iter().map(solve).collect()
    } else {
        (1..=levels).map(solve).collect()
    };
    for i in 1..records.len() {
        let prev = match &records[i - 1] {
            Ok(r) => r.clone(),
            _ => continue,
        };
        let needs_repair = match &records[i] {
            Ok(r) => r.eta > prev.eta,
            Err(SolveError::MaxIterExceeded(_)) => true,
            Err(_) => false,
        };
        if needs_repair {
            let n = i + 1;
            let retry = minimize_on_wn_from(n, problem, Some(&prev.u));
            let keep_retry = match (&retry, &records[i]) {
                (Ok(a), Ok(b)) => a.eta < b.eta,
                (Ok(_), Err(_)) => true,
                _ => false,
            };
            if keep_retry {
                records[i] = retry;
            }
        }
    }
    SequenceResult { records }
}

/// Exhaustive minimum of `J` over `grid^sites` on the window `[lo, hi]`,
/// with every grid value projected into the box. At most 5 sites and
/// `10^7` combinations.
pub fn brute_force_min(
    window: (i64, i64),
    grid: &[f64],
    lambda: f64,
    nl: &dyn Nonlinearity,
    w: &Weights,
    p: Exponent,
    bx: &BoxSet,
) -> Result<(LatticeVec, f64), SolveError> {
    let (lo, hi) = window;
    let sites = (hi - lo + 1) as usize;
    let mut levels: Vec<f64> = grid.iter().map(|&v| v.clamp(bx.lower, bx.upper)).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if !(1..=5).contains(&sites) || levels.is_empty() {
        return Err(SolveError::InvalidParams(format!(
            "brute force needs 1..=5 sites and a nonempty grid, got {sites} sites"
        )));
    }
    let combos = (levels.len() as f64).powi(sites as i32);
    if combos > 1e7 {
        return Err(SolveError::InvalidParams(format!("{combos} grid combinations exceed 1e7")));
    }
    let mut idx = vec![0usize; sites];
    let mut best: Option<(Vec<f64>, f64)> = None;
    loop {
        let vals: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
        let u = LatticeVec::new(lo, vals.clone()).expect("grid values are finite");
        let j = energy::energy(&u, w, p, nl, lambda)?.j;
        if best.as_ref().is_none_or(|b| j < b.1) {
            best = Some((vals, j));
        }
        let mut pos = 0;
        loop {
            if pos == sites {
                let (vals, j) = best.expect("at least one combination");
                return Ok((LatticeVec::new(lo, vals).expect("finite"), j));
            }
            idx[pos] += 1;
            if idx[pos] < levels.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
