#![allow(dead_code)]

use allsat::formula::{parse_dimacs, CnfFormula};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SIX_VARS: &str = include_str!("../data/six_vars.cnf");
pub const CYCLE: &str = include_str!("../data/cycle.cnf");

pub fn six_vars() -> CnfFormula {
    parse_dimacs(SIX_VARS).unwrap()
}

pub fn cycle() -> CnfFormula {
    parse_dimacs(CYCLE).unwrap()
}

/// Random 3-CNF with `n` variables and `m` clauses over distinct variables.
pub fn random_3cnf(rng: &mut impl Rng, n: usize, m: usize) -> CnfFormula {
    let mut f = CnfFormula::new(n);
    for _ in 0..m {
        let mut vars: Vec<i64> = Vec::with_capacity(3);
        while vars.len() < 3.min(n) {
            let v = rng.gen_range(1..=n as i64);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let lits: Vec<i64> = vars
            .into_iter()
            .map(|v| if rng.gen_bool(0.5) { v } else { -v })
            .collect();
        f.add_clause(&lits).unwrap();
    }
    f
}

/// Deterministic batch of random instances with n in [lo, hi] and clause to
/// variable ratio in [1, 5].
pub fn random_batch(seed: u64, count: usize, lo: usize, hi: usize) -> Vec<CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(lo..=hi);
            let ratio: f64 = rng.gen_range(1.0..=5.0);
            let m = (ratio * n as f64).round() as usize;
            random_3cnf(&mut rng, n, m)
        })
        .collect()
}
