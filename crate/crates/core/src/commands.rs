//! The `solve`, `probe` and `gradcheck` commands. Every artifact is a pure
//! function of the config, so repeated runs write identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, GradcheckConfig, RunConfig};
use crate::energy;
use crate::lattice::LatticeVec;
use crate::nonlinearity::{self, probe, BProbeReport, Nonlinearity};
use crate::solver::{run_sequence, Problem, SequenceResult, SolveError};
use crate::verify::{self, ClaimReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ClaimFailure = 1,
    ConfigError = 2,
    SolverFailure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CommandError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CommandError::Config(_) => ExitStatus::ConfigError,
            CommandError::Io { .. } => ExitStatus::SolverFailure,
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CommandError> {
    let path = dir.join(name);
    let io = |source| CommandError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(&path, contents).map_err(io)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn b_report(problem: &Problem, cfg: &RunConfig) -> BProbeReport {
    let ks: Vec<i64> = (1..=cfg.probe.k_max).collect();
    nonlinearity::estimate_b(
        problem.nl.as_ref(),
        &problem.weights,
        problem.p,
        &ks,
        &probe::default_t_grid(&problem.spec),
        &cfg.probe.thresholds,
    )
}

pub fn solutions_csv(seq: &SequenceResult) -> String {
    let mut out = String::from("n,k,u_k\n");
    for rec in seq.available() {
        for (k, v) in rec.u.iter() {
            let _ = writeln!(out, "{},{},{}", rec.n, k, fmt_f64(v));
        }
    }
    out
}

pub fn summary_csv(seq: &SequenceResult, claims: &[ClaimReport]) -> String {
    let mut out = String::from("n,eta,norm_x,u_max,residual_inf,iterations,window_lo,window_hi,claim2,claim3\n");
    let verdict = |id, n| {
        claims
            .iter()
            .find(|c| c.claim_id == id && c.n == Some(n))
            .is_some_and(|c| c.pass)
    };
    for rec in seq.available() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            rec.n,
            fmt_f64(rec.eta),
            fmt_f64(rec.norm_x),
            fmt_f64(rec.u_max),
            fmt_f64(rec.residual_inf),
            rec.iterations,
            rec.window.0,
            rec.window.1,
            verdict(verify::ClaimId::C2Bounds, rec.n),
            verdict(verify::ClaimId::C3Critical, rec.n),
        );
    }
    out
}

/// Output of [`solve`] before anything is written.
pub struct SolveOutcome {
    pub sequence: SequenceResult,
    pub claims: Vec<ClaimReport>,
    pub b: BProbeReport,
    pub status: ExitStatus,
}

pub fn solve(cfg: &RunConfig) -> Result<SolveOutcome, ConfigError> {
    let problem = cfg.build()?;
    let sequence = run_sequence(cfg.n, &problem);
    let b = b_report(&problem, cfg);
    let claims = verify::verify_all(&sequence.available(), &problem, Some(&b));
    let status = if !sequence.all_ok() {
        ExitStatus::SolverFailure
    } else if claims.iter().any(|c| !c.pass) {
        ExitStatus::ClaimFailure
    } else {
        ExitStatus::Success
    };
    Ok(SolveOutcome {
        sequence,
        claims,
        b,
        status,
    })
}

fn failure_json(n: usize, e: &SolveError) -> serde_json::Value {
    json!({ "n": n, "error": e.to_string() })
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<ExitStatus, CommandError> {
    let out = solve(cfg)?;
    let seq = &out.sequence;
    let failures: Vec<_> = seq
        .records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| failure_json(i + 1, e)))
        .collect();
    let degenerate = seq.degenerate();
    let report = json!({
        "config": cfg,
        "status": out.status.code(),
        "sequence": {
            "levels": cfg.n,
            "degenerate": degenerate,
            "eta_decreased": seq.eta_decreased(),
            "norm_increased": seq.norm_increased(),
            "failures": failures,
            "armijo_violations": seq.available().iter().map(|r| r.log.armijo_violations()).sum::<usize>(),
        },
        "records": seq.available().iter().map(|r| json!({
            "n": r.n,
            "eta": r.eta,
            "norm_x": r.norm_x,
            "pg_norm": r.pg_norm,
            "spike": r.spike,
            "certificates": r.certificates,
            "window_doublings": r.log.window_doublings,
            "accepted_steps": r.log.steps.len(),
        })).collect::<Vec<_>>(),
        "claims": out.claims,
        "b_probe": out.b,
    });
    let dir = &cfg.output_dir;
    write(dir, "solutions.csv", &solutions_csv(seq))?;
    write(dir, "summary.csv", &summary_csv(seq, &out.claims))?;
    write(dir, "report.json", &to_json(&report))?;
    for c in out.claims.iter().filter(|c| !c.pass) {
        log::warn!("{:?}{} {:?}: {}", c.claim_id, c.n.map(|n| format!(" n={n}")).unwrap_or_default(), c.status, c.note);
    }
    if degenerate {
        log::warn!("degenerate run: every level has J = 0");
    }
    Ok(out.status)
}

/// Decreasing grid `2^-i`, `i = 1..=40`, for the behaviour of `f` at 0.
fn f1_grid() -> Vec<f64> {
    (1..=40).map(|i| 2f64.powi(-i)).collect()
}

pub fn probe_json(cfg: &RunConfig) -> Result<serde_json::Value, ConfigError> {
    let problem = cfg.build()?;
    let nl = problem.nl.as_ref();
    let pc = &cfg.probe;
    let k_range = (-pc.k_max, pc.k_max);
    let f1 = nonlinearity::check_f1(nl, problem.p, &f1_grid(), k_range, pc.f1_tol);
    let f2 = nonlinearity::check_f2(nl, &problem.spec, problem.spec.n_max(), k_range, pc.f2_samples);
    let f3 = nonlinearity::check_f3(nl, &problem.spec, problem.params.r, cfg.n, pc.k_max, pc.f3_t_samples);
    let b = b_report(&problem, cfg);
    let threshold = verify::verify_lambda_threshold(problem.lambda, problem.p, &b);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t_hi = problem.spec.c(cfg.n + 1);
    let primitive = nonlinearity::check_primitive(nl, &mut rng, k_range, (problem.params.r, t_hi), pc.primitive_points, pc.primitive_h);
    Ok(json!({
        "config": cfg,
        "nonlinearity": nl.name(),
        "flags": nl.flags(),
        "f1": f1,
        "f2": f2,
        "f3": f3,
        "b": b,
        "lambda_threshold": threshold,
        "primitive": primitive,
    }))
}

/// Probe reports are informational: only configuration errors change the
/// exit status.
pub fn cmd_probe(cfg: &RunConfig) -> Result<ExitStatus, CommandError> {
    let doc = probe_json(cfg)?;
    write(&cfg.output_dir, "probe.json", &to_json(&doc))?;
    Ok(ExitStatus::Success)
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub p: f64,
    pub seed: u64,
    pub vectors: usize,
    pub window: (i64, i64),
    pub h: f64,
    pub max_rel_err: f64,
    /// Index of the vector with the largest error.
    pub worst_vector: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Error bound for the finite-difference comparison: `1e-5` for `p >= 2`,
/// looser below 2 where `phi_p'` is unbounded near 0.
pub fn gradcheck_tol(p: f64) -> f64 {
    if p >= 2.0 {
        1e-5
    } else {
        1e-4
    }
}

fn near_kink(nl: &dyn Nonlinearity, k: i64, t: f64, left: f64, gap: f64) -> bool {
    t.abs() < gap || (t - left).abs() < gap || nl.kinks(k).iter().any(|c| (t - c).abs() < gap)
}

/// Random vector on `[-half_width, half_width]`. Each entry is negative in
/// `[r, 0)` with probability 1/4, and otherwise uniform on `[c_j, c_{j+1}]`
/// for a random `j`, so the oscillating part of `f` is exercised. Entries
/// within `10 h` of a kink of `f`, of 0, or of their left neighbour are
/// redrawn.
pub fn gradcheck_vector(problem: &Problem, gc: &GradcheckConfig, rng: &mut impl Rng) -> LatticeVec {
    let spec = &problem.spec;
    let r = problem.params.r;
    let j_max = spec.n_max().min(gc.half_width.max(1) as usize + 1);
    let gap = 10.0 * gc.h;
    let mut vals: Vec<f64> = Vec::with_capacity((2 * gc.half_width + 1) as usize);
    for k in -gc.half_width..=gc.half_width {
        let left = vals.last().copied().unwrap_or(0.0);
        let t = loop {
            let t = if rng.gen_bool(0.25) {
                rng.gen_range(r..0.0)
            } else {
                let j = rng.gen_range(1..=j_max);
                rng.gen_range(spec.c(j)..spec.c(j + 1))
            };
            if !near_kink(problem.nl.as_ref(), k, t, left, gap) {
                break t;
            }
        };
        vals.push(t);
    }
    LatticeVec::new(-gc.half_width, vals).expect("finite draws")
}

pub fn gradcheck(cfg: &RunConfig) -> Result<GradcheckReport, ConfigError> {
    let problem = cfg.build()?;
    let gc = &cfg.gradcheck;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut max_rel_err: f64 = 0.0;
    let mut worst_vector = 0;
    for i in 0..gc.vectors {
        let u = gradcheck_vector(&problem, gc, &mut rng);
        let e = energy::fd_gradient_check(&u, &problem.weights, problem.p, problem.nl.as_ref(), problem.lambda, gc.h);
        if e > max_rel_err || e.is_nan() {
            max_rel_err = e;
            worst_vector = i;
        }
    }
    let tol = gradcheck_tol(cfg.p);
    Ok(GradcheckReport {
        p: cfg.p,
        seed: cfg.seed,
        vectors: gc.vectors,
        window: (-gc.half_width, gc.half_width),
        h: gc.h,
        max_rel_err,
        worst_vector,
        tol,
        pass: max_rel_err <= tol,
    })
}

pub fn cmd_gradcheck(cfg: &RunConfig) -> Result<ExitStatus, CommandError> {
    let report = gradcheck(cfg)?;
    write(&cfg.output_dir, "gradcheck.json", &to_json(&json!({ "config": cfg, "gradcheck": report })))?;
    Ok(if report.pass {
        ExitStatus::Success
    } else {
        ExitStatus::ClaimFailure
    })
}
