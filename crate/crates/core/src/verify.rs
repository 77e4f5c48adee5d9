//! Certificates for the properties the minimizers are expected to have,
//! recomputed from the solution vectors alone.

use std::borrow::Borrow;
use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::energy;
use crate::lattice::{self, Exponent, LatticeVec, Weights};
use crate::nonlinearity::{BProbeReport, OscillatorySpec};
use crate::solver::{inactive_residual, select_spike, Problem, SolutionRecord, BOUND_SLACK};

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("insufficient data: need at least {need} records, got {got}")]
    InsufficientData { need: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ClaimId {
    #[serde(rename = "C1_bounded_below")]
    C1BoundedBelow,
    #[serde(rename = "C2_bounds")]
    C2Bounds,
    #[serde(rename = "C3_critical")]
    C3Critical,
    #[serde(rename = "C4_eta_divergence")]
    C4EtaDivergence,
    #[serde(rename = "T2_norm_growth")]
    T2NormGrowth,
    #[serde(rename = "EMB_inequality")]
    EmbInequality,
    #[serde(rename = "lambda_threshold")]
    LambdaThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    /// The data carry no information about the claim (e.g. `J = 0` throughout).
    Degenerate,
    /// Every comparison the claim needs was exempted.
    Exempt,
}

/// Where a check was decided: the worst site or level and its margin
/// (positive margins mean the bound holds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<i64>,
    pub value: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim_id: ClaimId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub pass: bool,
    pub status: ClaimStatus,
    pub witness: Option<Witness>,
    pub note: String,
    pub details: BTreeMap<String, Value>,
}

impl ClaimReport {
    fn new(claim_id: ClaimId, n: Option<usize>, status: ClaimStatus, witness: Option<Witness>, note: impl Into<String>) -> Self {
        Self {
            claim_id,
            n,
            pass: status == ClaimStatus::Pass,
            status,
            witness,
            note: note.into(),
            details: BTreeMap::new(),
        }
    }

    fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }
}

fn status(ok: bool) -> ClaimStatus {
    if ok {
        ClaimStatus::Pass
    } else {
        ClaimStatus::Fail
    }
}

fn fresh_energy(u: &LatticeVec, problem: &Problem) -> f64 {
    energy::energy(u, &problem.weights, problem.p, problem.nl.as_ref(), problem.lambda)
        .map(|r| r.j)
        .unwrap_or(f64::NAN)
}

/// Energy of the spike selected at level `n`, the upper bound every
/// minimizer on `W_n` has to meet.
pub fn spike_bound(n: usize, problem: &Problem) -> f64 {
    select_spike(n, problem).energy
}

/// Computational consequence of the infimum being attained: `u` is
/// feasible for `W_n` and `J(u) <= min(0, spike bound)`.
pub fn verify_claim1(rec: &SolutionRecord, problem: &Problem) -> ClaimReport {
    let j = fresh_energy(&rec.u, problem);
    let bound = spike_bound(rec.n, problem).min(0.0);
    let bx = rec.box_set;
    let worst = rec
        .u
        .iter()
        .map(|(k, v)| (k, (v - bx.lower).min(bx.upper - v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let feasible = worst.1 >= -BOUND_SLACK;
    let margin = bound + BOUND_SLACK - j;
    let (witness, ok) = if !feasible {
        (Witness { n: Some(rec.n), index: Some(worst.0), value: rec.u.get(worst.0), margin: worst.1 }, false)
    } else {
        (Witness { n: Some(rec.n), index: None, value: j, margin }, j.is_finite() && margin >= 0.0)
    };
    ClaimReport::new(
        ClaimId::C1BoundedBelow,
        Some(rec.n),
        status(ok),
        Some(witness),
        "consequence check only: a feasible point with J at or below the spike bound; attainment of the infimum is not certified",
    )
    .detail("eta", j)
    .detail("spike_bound", bound)
}

/// `0 <= u(k) <= c_n` up to `1e-10`; the witness is the worst site.
pub fn verify_claim2(rec: &SolutionRecord, spec: &OscillatorySpec) -> ClaimReport {
    let cn = spec.c(rec.n);
    let (k, v, margin) = rec
        .u
        .iter()
        .map(|(k, v)| (k, v, v.min(cn - v)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("nonempty");
    ClaimReport::new(
        ClaimId::C2Bounds,
        Some(rec.n),
        status(margin >= -BOUND_SLACK),
        Some(Witness { n: Some(rec.n), index: Some(k), value: v, margin }),
        format!("0 <= u(k) <= c_n = {cn}"),
    )
}

/// Residual at box-inactive sites within `tol_residual` and tails within
/// `tail_eps`, both recomputed.
pub fn verify_claim3(rec: &SolutionRecord, problem: &Problem) -> ClaimReport {
    let params = &problem.params;
    let residual = inactive_residual(&rec.u, problem, &rec.box_set);
    let (lo, hi) = rec.u.window();
    let (tail_k, tail) = [(lo, rec.u.get(lo).abs()), (hi, rec.u.get(hi).abs())]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two edges");
    let residual_ok = residual <= params.tol_residual;
    let tail_ok = tail <= params.tail_eps;
    let witness = if !tail_ok && residual_ok {
        Witness { n: Some(rec.n), index: Some(tail_k), value: tail, margin: params.tail_eps - tail }
    } else {
        Witness { n: Some(rec.n), index: None, value: residual, margin: params.tol_residual - residual }
    };
    ClaimReport::new(
        ClaimId::C3Critical,
        Some(rec.n),
        status(residual_ok && tail_ok),
        Some(witness),
        "inactive-site residual and tail certificate",
    )
    .detail("residual_inf", residual)
    .detail("residual_ok", residual_ok)
    .detail("tail_max", tail)
    .detail("tail_ok", tail_ok)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `eta_n` nonincreasing and `eta_n <= s_n` at every level, with `s_n` the
/// energy of the spike selected at level `n`. Also reports the fitted
/// slope of `eta_n` against `n`.
pub fn verify_claim4<R: Borrow<SolutionRecord>>(records: &[R], problem: &Problem) -> Result<ClaimReport, VerifyError> {
    if records.len() < 2 {
        return Err(VerifyError::InsufficientData { need: 2, got: records.len() });
    }
    let ns: Vec<usize> = records.iter().map(|r| r.borrow().n).collect();
    let etas: Vec<f64> = records.iter().map(|r| fresh_energy(&r.borrow().u, problem)).collect();
    let bounds: Vec<f64> = ns.iter().map(|&n| spike_bound(n, problem)).collect();
    let slope = least_squares_slope(&ns.iter().map(|&n| n as f64).collect::<Vec<_>>(), &etas);
    let base = |st, w, note: &str| {
        ClaimReport::new(ClaimId::C4EtaDivergence, None, st, w, note)
            .detail("eta", etas.clone())
            .detail("spike_bound", bounds.clone())
            .detail("fitted_slope", slope)
    };
    if etas.iter().all(|&e| e == 0.0) {
        return Ok(base(
            ClaimStatus::Degenerate,
            Some(Witness { n: Some(ns[0]), index: None, value: 0.0, margin: 0.0 }),
            "degenerate: B = 0 regime, theorem hypotheses unmet (eta constant 0)",
        ));
    }
    let mut worst: Option<Witness> = None;
    let mut consider = |w: Witness| {
        if worst.is_none_or(|b| w.margin < b.margin) {
            worst = Some(w);
        }
    };
    for i in 1..etas.len() {
        if ns[i] <= ns[i - 1] {
            consider(Witness { n: Some(ns[i]), index: None, value: etas[i], margin: f64::NEG_INFINITY });
        }
        consider(Witness { n: Some(ns[i]), index: None, value: etas[i], margin: etas[i - 1] + BOUND_SLACK - etas[i] });
    }
    for (i, (&e, &s)) in etas.iter().zip(&bounds).enumerate() {
        consider(Witness { n: Some(ns[i]), index: None, value: e, margin: s + BOUND_SLACK - e });
    }
    let w = worst.expect("at least one comparison");
    let ok = w.margin >= 0.0 && etas.iter().all(|e| e.is_finite());
    Ok(base(
        status(ok),
        Some(w),
        "finite surrogate: eta nonincreasing in n and below the spike bound at every level",
    ))
}

/// `norm_x` strictly increasing between consecutive records whose energies
/// differ; pairs with equal energy are exempted. Records must be in
/// increasing `n`.
pub fn verify_norm_growth<R: Borrow<SolutionRecord>>(records: &[R], problem: &Problem) -> Result<ClaimReport, VerifyError> {
    if records.len() < 2 {
        return Err(VerifyError::InsufficientData { need: 2, got: records.len() });
    }
    let recs: Vec<&SolutionRecord> = records.iter().map(|r| r.borrow()).collect();
    let norms: Vec<f64> = recs.iter().map(|r| lattice::norm_x(&r.u, &problem.weights, problem.p)).collect();
    let etas: Vec<f64> = recs.iter().map(|r| fresh_energy(&r.u, problem)).collect();
    let mut exempt = Vec::new();
    let mut compared = 0;
    let mut worst: Option<Witness> = None;
    for i in 1..recs.len() {
        let n = recs[i].n;
        let margin = if n <= recs[i - 1].n {
            f64::NEG_INFINITY
        } else if etas[i] == etas[i - 1] {
            exempt.push(n);
            continue;
        } else {
            norms[i] - norms[i - 1]
        };
        compared += 1;
        let wi = Witness { n: Some(n), index: None, value: norms[i], margin };
        if worst.is_none_or(|b| wi.margin < b.margin) {
            worst = Some(wi);
        }
    }
    let st = match worst {
        None => ClaimStatus::Exempt,
        Some(wi) => status(wi.margin > 0.0),
    };
    Ok(ClaimReport::new(
        ClaimId::T2NormGrowth,
        None,
        st,
        worst,
        "finite surrogate for divergent norms: strict growth between levels with distinct energies",
    )
    .detail("norm_x", norms)
    .detail("exempt_levels", exempt)
    .detail("compared_pairs", compared))
}

/// `||u||_inf <= ||u||_p <= b0^(-1/p) ||u||` recomputed for `rec.u`.
pub fn verify_embedding(rec: &SolutionRecord, w: &Weights, p: Exponent) -> ClaimReport {
    let e = lattice::embedding_check(&rec.u, w, p);
    let margin = (e.lp - e.linf).min(e.scaled_x - e.lp);
    ClaimReport::new(
        ClaimId::EmbInequality,
        Some(rec.n),
        status(e.holds),
        Some(Witness { n: Some(rec.n), index: None, value: e.lp, margin }),
        "embedding chain",
    )
    .detail("linf", e.linf)
    .detail("lp", e.lp)
    .detail("scaled_x", e.scaled_x)
}

/// Whether `lambda` exceeds `1/(B p)` for the sampled lower bound `B`.
/// Growth across thresholds is taken as `B = +inf`, under which every
/// `lambda > 0` qualifies.
pub fn verify_lambda_threshold(lambda: f64, p: Exponent, b: &BProbeReport) -> ClaimReport {
    let report = |st, w, note: String| {
        ClaimReport::new(ClaimId::LambdaThreshold, None, st, w, note)
            .detail("b_est", b.b_est)
            .detail("infinite_evidence", b.infinite_evidence())
    };
    if b.infinite_evidence() {
        return report(
            status(lambda > 0.0),
            Some(Witness { n: None, index: None, value: lambda, margin: lambda }),
            "B estimates grow across thresholds: treated as B = +inf, every lambda > 0 qualifies".into(),
        );
    }
    if !(b.b_est > 0.0) {
        return report(
            ClaimStatus::Fail,
            Some(Witness { n: None, index: None, value: b.b_est, margin: f64::NEG_INFINITY }),
            "hypothesis regime unmet: B estimate is 0".into(),
        );
    }
    let threshold = 1.0 / (b.b_est * p.get());
    report(
        status(lambda > threshold),
        Some(Witness { n: None, index: None, value: lambda, margin: lambda - threshold }),
        format!("lambda must exceed 1/(B p) = {threshold}"),
    )
    .detail("threshold", threshold)
}

/// Full suite: per-record C1, C2, C3 and embedding checks in record order,
/// then the sequence claims and the lambda threshold.
pub fn verify_all<R: Borrow<SolutionRecord>>(records: &[R], problem: &Problem, b: Option<&BProbeReport>) -> Vec<ClaimReport> {
    let mut out = Vec::new();
    for r in records {
        let r = r.borrow();
        out.push(verify_claim1(r, problem));
        out.push(verify_claim2(r, &problem.spec));
        out.push(verify_claim3(r, problem));
        out.push(verify_embedding(r, &problem.weights, problem.p));
    }
    let insufficient = |id, e: VerifyError| {
        ClaimReport::new(id, None, ClaimStatus::Fail, None, e.to_string())
    };
    out.push(verify_claim4(records, problem).unwrap_or_else(|e| insufficient(ClaimId::C4EtaDivergence, e)));
    out.push(
        verify_norm_growth(records, problem)
            .unwrap_or_else(|e| insufficient(ClaimId::T2NormGrowth, e)),
    );
    if let Some(b) = b {
        out.push(verify_lambda_threshold(problem.lambda, problem.p, b));
    }
    out
}
