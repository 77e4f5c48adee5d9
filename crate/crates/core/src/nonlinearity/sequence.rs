use serde::{Deserialize, Serialize};

use super::NonlinearityError;
use crate::lattice::{Exponent, Weights};

/// Rule generating a real sequence indexed by `n = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeqRule {
    /// `a n + b`
    Linear { a: f64, b: f64 },
    /// `a n^alpha + b`
    Power { a: f64, alpha: f64, b: f64 },
    /// `values[n - 1]` while available, then `overflow`.
    List {
        values: Vec<f64>,
        overflow: Box<SeqRule>,
    },
    /// `h_n = (n + 1)(a(n+1) + a(n) + b(n)) c_{n+1}^p`. Only valid for `h`.
    Example1Default,
    /// Partial sums `sum_{k<=n} h_k = n (a(1) + a(0) + b(0)) c_{n+1}^p + margin`.
    /// Only valid for `h`.
    Example2Minimal { margin: f64 },
}

impl SeqRule {
    fn eval_plain(&self, n: usize) -> Result<f64, NonlinearityError> {
        let nf = n as f64;
        match self {
            SeqRule::Linear { a, b } => Ok(a * nf + b),
            SeqRule::Power { a, alpha, b } => Ok(a * nf.powf(*alpha) + b),
            SeqRule::List { values, overflow } => match values.get(n - 1) {
                Some(v) => Ok(*v),
                None => overflow.eval_plain(n),
            },
            SeqRule::Example1Default | SeqRule::Example2Minimal { .. } => {
                Err(NonlinearityError::InvalidSpec(
                    "example1_default / example2_minimal rules only apply to h".into(),
                ))
            }
        }
    }

    /// Materializes `n = 1..=count`.
    pub fn materialize(&self, count: usize) -> Result<Vec<f64>, NonlinearityError> {
        (1..=count).map(|n| self.eval_plain(n)).collect()
    }
}

/// Oscillation data `c_n < d_n < c_{n+1}` and bump masses `h_n`,
/// materialized for `n = 1..=n_max` (`c` additionally holds `c_{n_max+1}`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillatorySpec {
    c: Vec<f64>,
    d: Vec<f64>,
    h: Vec<f64>,
}

impl OscillatorySpec {
    pub fn new(c: Vec<f64>, d: Vec<f64>, h: Vec<f64>) -> Result<Self, NonlinearityError> {
        let n_max = d.len();
        if n_max == 0 || c.len() != n_max + 1 || h.len() != n_max {
            return Err(NonlinearityError::InvalidSpec(format!(
                "need n_max + 1 values of c and n_max of d, h; got {}, {}, {}",
                c.len(),
                d.len(),
                h.len()
            )));
        }
        for n in 1..=n_max {
            let (cn, dn, cn1) = (c[n - 1], d[n - 1], c[n]);
            if !(cn.is_finite() && dn.is_finite() && cn1.is_finite() && 0.0 < cn && cn < dn && dn < cn1)
            {
                return Err(NonlinearityError::Ordering { n, cn, dn, cn1 });
            }
        }
        if let Some(n) = h.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(NonlinearityError::InvalidSpec(format!(
                "h_{} = {} must be finite and nonnegative",
                n + 1,
                h[n]
            )));
        }
        Ok(Self { c, d, h })
    }

    /// Builds a spec from rules. `h` rules that depend on the weights are
    /// resolved here.
    pub fn from_rules(
        c: &SeqRule,
        d: &SeqRule,
        h: &SeqRule,
        n_max: usize,
        w: &Weights,
        p: Exponent,
    ) -> Result<Self, NonlinearityError> {
        if n_max == 0 {
            return Err(NonlinearityError::InvalidSpec("n_max must be at least 1".into()));
        }
        let cv = c.materialize(n_max + 1)?;
        let dv = d.materialize(n_max)?;
        let pp = p.get();
        let hv = match h {
            SeqRule::Example1Default => (1..=n_max)
                .map(|n| {
                    let k = n as i64;
                    (n as f64 + 1.0) * w.spike_scale(k) * cv[n].powf(pp)
                })
                .collect(),
            SeqRule::Example2Minimal { margin } => {
                if !(margin.is_finite() && *margin > 0.0) {
                    return Err(NonlinearityError::InvalidSpec(format!(
                        "example2_minimal margin must be positive, got {margin}"
                    )));
                }
                let scale = w.spike_scale(0);
                let partial = |n: usize| n as f64 * scale * cv[n].powf(pp) + margin;
                (1..=n_max)
                    .map(|n| {
                        if n == 1 {
                            partial(1)
                        } else {
                            partial(n) - partial(n - 1)
                        }
                    })
                    .collect()
            }
            other => other.materialize(n_max)?,
        };
        Self::new(cv, dv, hv)
    }

    /// `c_n = n`, `d_n = n + 1/2`, with the given `h` rule.
    pub fn desk(h: &SeqRule, n_max: usize, w: &Weights, p: Exponent) -> Result<Self, NonlinearityError> {
        Self::from_rules(
            &SeqRule::Linear { a: 1.0, b: 0.0 },
            &SeqRule::Linear { a: 1.0, b: 0.5 },
            h,
            n_max,
            w,
            p,
        )
    }

    pub fn n_max(&self) -> usize {
        self.d.len()
    }

    /// `c_n` for `1 <= n <= n_max + 1`.
    pub fn c(&self, n: usize) -> f64 {
        self.c[n - 1]
    }

    /// `d_n` for `1 <= n <= n_max`.
    pub fn d(&self, n: usize) -> f64 {
        self.d[n - 1]
    }

    /// `h_n` for `1 <= n <= n_max`.
    pub fn h(&self, n: usize) -> f64 {
        self.h[n - 1]
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    /// `h_n > n (a(n+1) + a(n) + b(n)) c_{n+1}^p` for every materialized n.
    pub fn check_example1(&self, w: &Weights, p: Exponent) -> Result<(), NonlinearityError> {
        for n in 1..=self.n_max() {
            let bound = n as f64 * w.spike_scale(n as i64) * self.c(n + 1).powf(p.get());
            if !(self.h(n) > bound) {
                return Err(NonlinearityError::Example1Inequality {
                    n,
                    h: self.h(n),
                    bound,
                });
            }
        }
        Ok(())
    }

    /// `sum_{k<=n} h_k > n (a(1) + a(0) + b(0)) c_{n+1}^p` for every
    /// materialized n.
    pub fn check_example2(&self, w: &Weights, p: Exponent) -> Result<(), NonlinearityError> {
        let scale = w.spike_scale(0);
        let mut partial = 0.0;
        for n in 1..=self.n_max() {
            partial += self.h(n);
            let bound = n as f64 * scale * self.c(n + 1).powf(p.get());
            if !(partial > bound) {
                return Err(NonlinearityError::Example2Inequality {
                    n,
                    partial_sum: partial,
                    bound,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_materialize() {
        let r = SeqRule::Power {
            a: 2.0,
            alpha: 2.0,
            b: 1.0,
        };
        assert_eq!(r.materialize(3).unwrap(), vec![3.0, 9.0, 19.0]);
        let l = SeqRule::List {
            values: vec![0.5, 0.7],
            overflow: Box::new(SeqRule::Linear { a: 1.0, b: 0.0 }),
        };
        assert_eq!(l.materialize(4).unwrap(), vec![0.5, 0.7, 3.0, 4.0]);
        assert!(SeqRule::Example1Default.materialize(2).is_err());
    }

    #[test]
    fn desk_example2_partial_sums_have_margin_one() {
        let w = Weights::desk();
        let p = Exponent::new(2.0).unwrap();
        let spec = OscillatorySpec::desk(&SeqRule::Example2Minimal { margin: 1.0 }, 10, &w, p).unwrap();
        // sum_{k<=n} h_k = 4 n (n+1)^2 + 1
        assert_eq!(spec.h(1), 17.0);
        assert_eq!(spec.h(2), 56.0);
        assert_eq!(spec.h(3), 120.0);
        let mut s = 0.0;
        for n in 1..=10 {
            s += spec.h(n);
            assert_eq!(s, 4.0 * n as f64 * ((n + 1) as f64).powi(2) + 1.0);
        }
        spec.check_example2(&w, p).unwrap();
    }

    #[test]
    fn desk_example1_h() {
        let w = Weights::desk();
        let p = Exponent::new(2.0).unwrap();
        let spec = OscillatorySpec::desk(&SeqRule::Example1Default, 8, &w, p).unwrap();
        // (n+1)(a + a + 2 + n)(n+1)^2 at n = 1
        assert_eq!(spec.h(1), 2.0 * 5.0 * 4.0);
        spec.check_example1(&w, p).unwrap();
        assert!(spec.check_example2(&w, p).is_ok());
    }

    #[test]
    fn ordering_violations_are_rejected() {
        let err = OscillatorySpec::new(vec![1.0, 2.0], vec![2.5], vec![1.0]).unwrap_err();
        assert!(matches!(err, NonlinearityError::Ordering { n: 1, .. }));
        assert!(OscillatorySpec::new(vec![0.0, 2.0], vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn example_inequalities_reject_small_h() {
        let w = Weights::desk();
        let p = Exponent::new(2.0).unwrap();
        let spec = OscillatorySpec::desk(
            &SeqRule::Linear { a: 0.0, b: 1.0 },
            4,
            &w,
            p,
        )
        .unwrap();
        assert!(matches!(
            spec.check_example1(&w, p),
            Err(NonlinearityError::Example1Inequality { n: 1, .. })
        ));
        assert!(matches!(
            spec.check_example2(&w, p),
            Err(NonlinearityError::Example2Inequality { n: 1, .. })
        ));
    }
}
