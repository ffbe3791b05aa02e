mod common;

use allsat::blocking::{enumerate_blocking, BlockingConfig};
use allsat::formula::{CnfFormula, Lit};
use allsat::kernel::Scheme;
use allsat::nonblocking::{enumerate_nonblocking, NonBlockingConfig, Strategy};
use allsat::observe::{Budget, Observer};
use allsat::oracle::{cube_masks, enumerate_all, mask_of};

#[derive(Default)]
struct Cubes(Vec<Vec<Lit>>);

impl Observer for Cubes {
    fn cube(&mut self, lits: &[Lit]) {
        self.0.push(lits.to_vec());
    }
}

fn nonblocking_models(f: &CnfFormula, cfg: NonBlockingConfig) -> Vec<u32> {
    let mut cubes = Cubes::default();
    let out = enumerate_nonblocking(f, cfg, &mut Budget::unlimited(), &mut cubes);
    assert!(out.complete());
    let mut masks: Vec<u32> = cubes
        .0
        .iter()
        .map(|c| {
            let mut v = vec![false; f.num_vars() + 1];
            for l in c {
                v[l.var().index()] = l.is_positive();
            }
            mask_of(&v)
        })
        .collect();
    let len = masks.len();
    masks.sort_unstable();
    masks.dedup();
    assert_eq!(masks.len(), len, "duplicate solution");
    masks
}

fn blocking_cover(f: &CnfFormula, cfg: BlockingConfig) -> Vec<u32> {
    let mut cubes = Cubes::default();
    let out = enumerate_blocking(f, cfg, &mut Budget::unlimited(), &mut cubes);
    assert!(out.complete());
    let n = f.num_vars();
    let mut covered = Vec::new();
    for c in &cubes.0 {
        let (care, val) = cube_masks(c);
        for a in 0..1u32 << n {
            if a & care == val {
                covered.push(a);
            }
        }
    }
    let len = covered.len();
    covered.sort_unstable();
    covered.dedup();
    assert_eq!(covered.len(), len, "overlapping cubes");
    covered
}

#[test]
fn nonblocking_matches_oracle() {
    for (i, f) in common::random_batch(7, 120, 5, 12).iter().enumerate() {
        let expected = enumerate_all(f).unwrap().models;
        for scheme in [Scheme::Sublevel, Scheme::DecisionLevel] {
            for strategy in [Strategy::Bt, Strategy::Bj, Strategy::Cbj, Strategy::BjCbj] {
                let got = nonblocking_models(f, NonBlockingConfig { scheme, strategy });
                assert_eq!(got, expected, "instance {i} {scheme:?} {strategy:?}");
            }
        }
    }
}

#[test]
fn blocking_matches_oracle() {
    for (i, f) in common::random_batch(8, 120, 5, 12).iter().enumerate() {
        let expected = enumerate_all(f).unwrap().models;
        for simplify in [false, true] {
            for continue_search in [false, true] {
                let cfg = BlockingConfig {
                    simplify,
                    continue_search,
                    full_clauses: false,
                };
                assert_eq!(blocking_cover(f, cfg), expected, "instance {i} {cfg:?}");
            }
        }
    }
}
