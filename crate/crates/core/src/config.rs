//! Run configuration: one JSON document, validated before any computation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::energy::EnergyError;
use crate::lattice::{Exponent, LatticeError, WeightRule, Weights};
use crate::nonlinearity::{Example1, Example2, Kuang, Nonlinearity, NonlinearityError, OscillatorySpec, SeqRule, Zero};
use crate::solver::{Problem, SolveError, SolverParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("bad override `{0}`: expected key=value with a scalar value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub a: WeightRule,
    pub b: WeightRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Example1,
    Example2,
    Kuang,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecConfig {
    pub c: SeqRule,
    pub d: SeqRule,
    /// Defaults to the construction's own rule: `example1_default` for
    /// Example 1, `example2_minimal` with margin 1 for Example 2, zero
    /// otherwise.
    pub h: Option<SeqRule>,
    /// Defaults to `max(N + 1, 64)`.
    pub n_max: Option<usize>,
}

impl Default for SpecConfig {
    fn default() -> Self {
        Self {
            c: SeqRule::Linear { a: 1.0, b: 0.0 },
            d: SeqRule::Linear { a: 1.0, b: 0.5 },
            h: None,
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KuangParams {
    pub mu: f64,
    pub nu: f64,
}

impl Default for KuangParams {
    fn default() -> Self {
        Self { mu: 2.0, nu: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub builtin: Builtin,
    #[serde(default)]
    pub spec: SpecConfig,
    #[serde(default)]
    pub params: KuangParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Sites `1..=k_max` (and their mirrors) enter the probes.
    pub k_max: i64,
    pub thresholds: Vec<(i64, f64)>,
    pub f1_tol: f64,
    /// Sample points per interval `[c_n, d_n]`.
    pub f2_samples: usize,
    pub f3_t_samples: usize,
    pub primitive_points: usize,
    pub primitive_h: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            k_max: 64,
            thresholds: vec![(1, 1.0), (2, 2.0), (4, 4.0), (8, 8.0), (16, 16.0)],
            f1_tol: 1e-6,
            f2_samples: 64,
            f3_t_samples: 50,
            primitive_points: 200,
            primitive_h: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckConfig {
    pub vectors: usize,
    /// Window is `[-half_width, half_width]`.
    pub half_width: i64,
    pub h: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            vectors: 100,
            half_width: 20,
            h: 1e-6,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: f64,
    pub lambda: f64,
    pub weights: WeightsConfig,
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub gradcheck: GradcheckConfig,
}

/// Sets `path.to.key` in `doc` to `raw`, parsed as JSON when possible and
/// as a string otherwise. Missing parent objects are created; unknown keys
/// are caught when the document is deserialized.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::Override(assignment.to_string());
    let (key, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    if value.is_object() || value.is_array() {
        return Err(bad());
    }
    let parts: Vec<&str> = key.split('.').collect();
    let (last, parents) = parts.split_last().ok_or_else(bad)?;
    let mut node = doc;
    for part in parents {
        let obj = node.as_object_mut().ok_or_else(bad)?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or_else(bad)?;
    if obj.get(*last).is_some_and(|v| v.is_object() || v.is_array()) || last.is_empty() {
        return Err(bad());
    }
    obj.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn from_value(doc: Value) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_value(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: Value = serde_json::from_str(text)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_str_with(&text, overrides)
    }

    /// Scalar checks that need no construction.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(EnergyError::NonPositiveLambda(self.lambda).into());
        }
        Exponent::new(self.p)?;
        if self.n == 0 {
            return Err(ConfigError::Invalid("N must be at least 1".into()));
        }
        if let Some(m) = self.nonlinearity.spec.n_max {
            if m < self.n + 1 {
                return Err(ConfigError::Invalid(format!("spec n_max = {m} must be at least N + 1 = {}", self.n + 1)));
            }
        }
        if self.probe.k_max < 1 || self.probe.thresholds.is_empty() {
            return Err(ConfigError::Invalid("probe needs k_max >= 1 and at least one threshold".into()));
        }
        if self.gradcheck.vectors == 0 || self.gradcheck.half_width < 1 || !(self.gradcheck.h > 0.0) {
            return Err(ConfigError::Invalid("gradcheck needs vectors >= 1, half_width >= 1, h > 0".into()));
        }
        self.solver.validate()?;
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.nonlinearity.spec.n_max.unwrap_or((self.n + 1).max(64))
    }

    pub fn build(&self) -> Result<Problem, ConfigError> {
        self.validate()?;
        let p = Exponent::new(self.p)?;
        let w = Weights::new(self.weights.a.clone(), self.weights.b.clone())?;
        let nc = &self.nonlinearity;
        let h = nc.spec.h.clone().unwrap_or(match nc.builtin {
            Builtin::Example1 => SeqRule::Example1Default,
            Builtin::Example2 => SeqRule::Example2Minimal { margin: 1.0 },
            Builtin::Kuang | Builtin::Zero => SeqRule::Linear { a: 0.0, b: 0.0 },
        });
        let spec = OscillatorySpec::from_rules(&nc.spec.c, &nc.spec.d, &h, self.n_max(), &w, p)?;
        let nl: Arc<dyn Nonlinearity> = match nc.builtin {
            Builtin::Example1 => Arc::new(Example1::new(&spec, &w, p)?),
            Builtin::Example2 => Arc::new(Example2::new(&spec, &w, p)?),
            Builtin::Kuang => Arc::new(Kuang::new(nc.params.mu, nc.params.nu, p)?),
            Builtin::Zero => Arc::new(Zero),
        };
        Ok(Problem::new(p, self.lambda, w, nl, spec, self.solver.clone())?)
    }

    /// Desk configuration: `a = 1`, `b = 2 + |k|`, `p = 2`, `lambda = 1`,
    /// `c_n = n`, `d_n = n + 1/2`, default masses for `builtin`.
    pub fn desk(builtin: Builtin, n: usize) -> Self {
        Self {
            p: 2.0,
            lambda: 1.0,
            weights: WeightsConfig {
                a: WeightRule::Constant { value: 1.0 },
                b: WeightRule::AffineAbs { c0: 2.0, c1: 1.0 },
            },
            nonlinearity: NonlinearityConfig {
                builtin,
                spec: SpecConfig::default(),
                params: KuangParams::default(),
            },
            solver: SolverParams::default(),
            n,
            seed: 0,
            output_dir: default_output_dir(),
            probe: ProbeConfig::default(),
            gradcheck: GradcheckConfig::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const D1: &str = r#"{
        "p": 2.0,
        "lambda": 1.0,
        "weights": {"a": {"kind": "constant", "value": 1.0}, "b": {"kind": "affine_abs", "c0": 2.0, "c1": 1.0}},
        "nonlinearity": {"builtin": "example2"},
        "N": 5,
        "seed": 7,
        "output_dir": "out"
    }"#;

    #[test]
    fn parses_desk_config() {
        let cfg = RunConfig::from_str_with(D1, &[]).unwrap();
        let mut desk = RunConfig::desk(Builtin::Example2, 5);
        desk.seed = 7;
        assert_eq!(cfg, desk);
        let pr = cfg.build().unwrap();
        assert_eq!(pr.spec.n_max(), 64);
        assert_eq!(pr.spec.h(1), 17.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = D1.replace("\"seed\": 7", "\"seed\": 7, \"colour\": 1");
        assert!(matches!(RunConfig::from_str_with(&text, &[]), Err(ConfigError::Parse(_))));
        let text = D1.replace("\"builtin\": \"example2\"", "\"builtin\": \"example2\", \"extra\": 0");
        assert!(RunConfig::from_str_with(&text, &[]).is_err());
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::from_str_with(D1, &["solver.tol_pg=1e-9".into(), "N=3".into()]).unwrap();
        assert_eq!(cfg.solver.tol_pg, 1e-9);
        assert_eq!(cfg.n, 3);
        let cfg = RunConfig::from_str_with(D1, &["nonlinearity.builtin=zero".into()]).unwrap();
        assert_eq!(cfg.nonlinearity.builtin, Builtin::Zero);
        for bad in ["lambda", "weights=3", "missing.key=1", "solver.max_iter=[1]"] {
            assert!(RunConfig::from_str_with(D1, &[bad.into()]).is_err(), "{bad}");
        }
    }

    #[test]
    fn negative_lambda_message() {
        let err = RunConfig::from_str_with(D1, &["lambda=-1".into()]).unwrap_err();
        assert!(err.to_string().contains("λ is a positive real parameter"), "{err}");
    }

    #[test]
    fn construction_errors_surface() {
        let mut cfg = RunConfig::desk(Builtin::Example1, 3);
        cfg.nonlinearity.spec.h = Some(SeqRule::Linear { a: 0.0, b: 1.0 });
        assert!(matches!(cfg.build(), Err(ConfigError::Nonlinearity(_))));
        let mut cfg = RunConfig::desk(Builtin::Kuang, 3);
        cfg.nonlinearity.params.mu = 0.5;
        assert!(cfg.build().is_err());
        let mut cfg = RunConfig::desk(Builtin::Zero, 3);
        cfg.nonlinearity.spec.n_max = Some(3);
        assert!(cfg.build().is_err());
    }
}
