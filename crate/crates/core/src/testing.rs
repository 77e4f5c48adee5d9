use std::sync::Arc;

use crate::lattice::{Exponent, Weights};
use crate::nonlinearity::{Example1, Example2, Nonlinearity, OscillatorySpec, SeqRule};
use crate::solver::{Problem, SolverParams};

/// Desk weights `a = 1`, `b = 2 + |k|`, `p = 2`, `lambda = 1` with the default
/// Example 1 or minimal Example 2 sequences.
pub fn d1(example: u8, n_max: usize) -> Problem {
    let w = Weights::desk();
    let p = Exponent::new(2.0).unwrap();
    let rule = if example == 1 {
        SeqRule::Example1Default
    } else {
        SeqRule::Example2Minimal { margin: 1.0 }
    };
    let spec = OscillatorySpec::desk(&rule, n_max, &w, p).unwrap();
    let nl: Arc<dyn Nonlinearity> = if example == 1 {
        Arc::new(Example1::new(&spec, &w, p).unwrap())
    } else {
        Arc::new(Example2::new(&spec, &w, p).unwrap())
    };
    Problem::new(p, 1.0, w, nl, spec, SolverParams::default()).unwrap()
}
