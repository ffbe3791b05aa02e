mod common;

use std::collections::HashMap;

use allsat::bddcache::{
    enumerate_bdd, enumerate_bdd_blocking, BddConfig, BddOutcome, CacheMode, DumpTarget, RefreshPolicy,
};
use allsat::formula::CnfFormula;
use allsat::kernel::Scheme;
use allsat::nonblocking::{NonBlockingConfig, Strategy};
use allsat::obdd::ObddStore;
use allsat::observe::{Budget, Observer, Silent};
use allsat::oracle::{enumerate_all, mask_of, subinstance_models};

fn diagram_models(store: &ObddStore) -> Vec<u32> {
    let mut out = Vec::new();
    store.for_each_path(|v| out.push(mask_of(v)));
    out
}

fn all_models(r: &BddOutcome) -> Vec<u32> {
    let mut out = diagram_models(&r.diagram);
    for p in &r.parts {
        out.extend(diagram_models(p.store.as_ref().expect("kept in memory")));
    }
    let len = out.len();
    out.sort_unstable();
    out.dedup();
    assert_eq!(len, out.len(), "model in two parts");
    out
}

const STRATEGIES: [Strategy; 4] = [Strategy::Bt, Strategy::Bj, Strategy::Cbj, Strategy::BjCbj];

#[test]
fn nonblocking_cache_matches_oracle() {
    for (i, f) in common::random_batch(11, 80, 4, 12).iter().enumerate() {
        let expected = enumerate_all(f).unwrap().models;
        for mode in [CacheMode::Cutset, CacheMode::Separator] {
            for scheme in [Scheme::Sublevel, Scheme::DecisionLevel] {
                for strategy in STRATEGIES {
                    let cfg = BddConfig {
                        mode,
                        nonblocking: NonBlockingConfig { scheme, strategy },
                        refresh: None,
                    };
                    let r = enumerate_bdd(f, &cfg, &mut Budget::unlimited(), &mut Silent).unwrap();
                    assert!(r.diagram.well_formed());
                    assert_eq!(all_models(&r), expected, "instance {i} {cfg:?}");
                    assert_eq!(r.outcome.models, expected.len().into());
                }
            }
        }
    }
}

#[test]
fn blocking_cache_matches_oracle() {
    for (i, f) in common::random_batch(12, 80, 4, 12).iter().enumerate() {
        let expected = enumerate_all(f).unwrap().models;
        for mode in [CacheMode::Cutset, CacheMode::Separator] {
            let cfg = BddConfig {
                mode,
                ..BddConfig::default()
            };
            let r = enumerate_bdd_blocking(f, &cfg, &mut Budget::unlimited(), &mut Silent).unwrap();
            assert!(r.diagram.well_formed());
            assert_eq!(all_models(&r), expected, "instance {i} {mode:?}");
        }
    }
}

#[test]
fn refresh_splits_without_loss() {
    for (i, f) in common::random_batch(13, 40, 8, 12).iter().enumerate() {
        let expected = enumerate_all(f).unwrap().models;
        let cfg = BddConfig {
            refresh: Some(RefreshPolicy {
                threshold: f.num_vars() + 4,
                target: DumpTarget::Memory,
            }),
            ..BddConfig::default()
        };
        let r = enumerate_bdd(f, &cfg, &mut Budget::unlimited(), &mut Silent).unwrap();
        assert_eq!(all_models(&r), expected, "instance {i}");
        let b = enumerate_bdd_blocking(f, &cfg, &mut Budget::unlimited(), &mut Silent).unwrap();
        assert_eq!(all_models(&b), expected, "instance {i} blocking");
    }
}

/// Checks that equal keys at one cut always denote the same residual formula.
struct KeyAudit<'a> {
    f: &'a CnfFormula,
    seen: HashMap<(usize, Vec<usize>), Vec<u32>>,
    lookups: usize,
}

impl Observer for KeyAudit<'_> {
    fn cache_lookup(&mut self, cut: usize, key: &[usize], prefix: &[bool], _hit: bool) {
        self.lookups += 1;
        let models = subinstance_models(self.f, prefix).unwrap().models;
        let prev = self.seen.entry((cut, key.to_vec())).or_insert_with(|| models.clone());
        assert_eq!(*prev, models, "cut {cut} key {key:?} prefix {prefix:?}");
    }
}

#[test]
fn equal_keys_mean_equal_residuals() {
    for f in common::random_batch(14, 40, 4, 10) {
        for mode in [CacheMode::Cutset, CacheMode::Separator] {
            let mut audit = KeyAudit {
                f: &f,
                seen: HashMap::new(),
                lookups: 0,
            };
            let cfg = BddConfig {
                mode,
                ..BddConfig::default()
            };
            enumerate_bdd(&f, &cfg, &mut Budget::unlimited(), &mut audit).unwrap();
            assert!(audit.lookups > 0);
        }
    }
}

#[test]
fn dumps_go_to_directory_with_manifest() {
    let f = common::six_vars();
    let dir = tempfile::tempdir().unwrap();
    let cfg = BddConfig {
        refresh: Some(RefreshPolicy {
            threshold: f.num_vars() + 2,
            target: DumpTarget::Dir {
                dir: dir.path().to_path_buf(),
                instance: "six".into(),
            },
        }),
        ..BddConfig::default()
    };
    let r = enumerate_bdd(&f, &cfg, &mut Budget::unlimited(), &mut Silent).unwrap();
    assert!(!r.parts.is_empty());
    let mut total = r.diagram.count();
    for (k, p) in r.parts.iter().enumerate() {
        let path = p.path.as_ref().unwrap();
        assert_eq!(path, &dir.path().join(format!("six.part{k}.obdd")));
        let loaded = ObddStore::load(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(loaded.count(), p.count);
        total += loaded.count();
    }
    assert_eq!(total, 22u32.into());
    let manifest = std::fs::read_to_string(dir.path().join("six.manifest")).unwrap();
    assert_eq!(manifest.lines().count(), r.parts.len());
}
