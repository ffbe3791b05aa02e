//! Enumeration with blocking clauses.
//!
//! After each solution the engine reports a cube, records a clause that
//! excludes it, cancels to level 0 and searches again. The search stops at a
//! level-0 conflict, at a solution found without decisions, or when the
//! blocking clause comes out empty.
//!
//! With simplification the cube keeps only the decisions that some
//! implication depends on, plus one satisfying decision for every clause the
//! rest of the cube leaves open. With continuation the decisions of the last
//! solution are replayed after the restart, as far as they remain possible.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::formula::{CnfFormula, Lit, Origin};
use crate::kernel::{Heuristic, Kernel, Scheme};
use crate::observe::{Budget, Observer, Outcome};
use crate::trail::{ClauseRef, Value};

#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct BlockingConfig {
    pub simplify: bool,
    pub continue_search: bool,
    /// Block with the negation of the whole cube instead of its decisions.
    pub full_clauses: bool,
}

/// Decisions kept by simplification, in level order.
///
/// First every decision whose negation appears in the antecedent of an
/// implied literal. Then, for each problem or blocking clause not yet
/// satisfied by the kept decisions or an implied literal, its true decision
/// of lowest level.
pub fn simplified_decisions(k: &Kernel) -> Vec<Lit> {
    let t = k.trail();
    let n = k.num_vars();
    let is_decision = |l: Lit| t.reason(l.var()).is_none() && t.var_level(l.var()) > 0;
    let mut keep = vec![false; n + 1];
    for e in t.entries() {
        if let Some(r) = e.reason {
            for &q in k.clause(r) {
                if q.var() != e.lit.var() && is_decision(!q) {
                    keep[q.var().index()] = true;
                }
            }
        }
    }
    for i in 0..k.num_clauses() {
        let cr = ClauseRef(i as u32);
        if k.origin(cr) == Origin::Learned {
            continue;
        }
        let clause = k.clause(cr);
        let covered = clause.iter().any(|&l| {
            t.lit_value(l) == Value::True && (keep[l.var().index()] || !is_decision(l))
        });
        if covered {
            continue;
        }
        let pick = clause
            .iter()
            .copied()
            .filter(|&l| t.lit_value(l) == Value::True)
            .min_by_key(|l| t.var_level(l.var()));
        if let Some(l) = pick {
            keep[l.var().index()] = true;
        }
    }
    t.decisions().filter(|d| keep[d.var().index()]).collect()
}

/// The cube reported for the current total assignment, sorted by variable.
pub fn current_cube(k: &Kernel, cfg: BlockingConfig) -> Vec<Lit> {
    let t = k.trail();
    let mut cube: Vec<Lit> = if cfg.simplify {
        let mut c = simplified_decisions(k);
        c.extend(
            t.entries()
                .iter()
                .filter(|e| e.reason.is_some() || e.level == 0)
                .map(|e| e.lit),
        );
        c
    } else {
        t.entries().iter().map(|e| e.lit).collect()
    };
    cube.sort_by_key(|l| l.var());
    cube
}

/// The clause excluding the current solution.
pub fn blocking_clause(k: &Kernel, cfg: BlockingConfig) -> Vec<Lit> {
    let base: Vec<Lit> = if cfg.full_clauses {
        current_cube(k, cfg)
    } else if cfg.simplify {
        simplified_decisions(k)
    } else {
        k.trail().decisions().collect()
    };
    base.into_iter().map(|l| !l).collect()
}

pub fn enumerate_blocking(
    f: &CnfFormula,
    cfg: BlockingConfig,
    budget: &mut Budget,
    obs: &mut dyn Observer,
) -> Outcome {
    let n = f.num_vars();
    let mut k = Kernel::new(f, Heuristic::Activity);
    let mut replay: VecDeque<Lit> = VecDeque::new();
    let mut models = BigUint::zero();
    let mut cubes = 0u64;
    let mut stopped = None;

    loop {
        if let Err(limit) = budget.check(k.approx_bytes()) {
            stopped = Some(limit);
            break;
        }
        if let Some(conflict) = k.propagate() {
            replay.clear();
            if k.level() == 0 {
                break;
            }
            let learned = k.analyze(conflict, Scheme::FirstUip);
            obs.learned(&learned);
            let bl = learned.backjump;
            k.add_clause(learned.lits, Origin::Learned, false);
            k.cancel_to(bl);
            continue;
        }
        if k.all_assigned() {
            let cube = current_cube(&k, cfg);
            obs.cube(&cube);
            models += BigUint::one() << (n - cube.len());
            cubes += 1;
            let clause = blocking_clause(&k, cfg);
            if cfg.full_clauses {
                obs.blocking(&clause);
            }
            if k.level() == 0 || clause.is_empty() {
                break;
            }
            if !cfg.full_clauses {
                obs.blocking(&clause);
            }
            if cfg.continue_search {
                replay = k.trail().decisions().collect();
                for &d in &replay {
                    k.save_phase(d);
                }
            }
            k.add_clause(clause, Origin::Blocking, false);
            k.cancel_to(0);
            continue;
        }
        let next = loop {
            match replay.pop_front() {
                Some(d) => match k.trail().lit_value(d) {
                    Value::True => continue,
                    Value::Unassigned => break Some(d),
                    Value::False => {
                        replay.clear();
                        break None;
                    }
                },
                None => break None,
            }
        };
        let lit = match next {
            Some(d) => d,
            None => k.pick_branch().expect("unassigned variable exists"),
        };
        k.decide(lit);
    }

    Outcome {
        stopped,
        models,
        cubes,
        kernel: k.stats,
        peak_bytes: budget.peak_bytes(),
    }
}
