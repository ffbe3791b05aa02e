//! Conflict analysis.
//!
//! All schemes walk the trail backwards from the conflict. A variable met on
//! the way is either expanded (replaced by the rest of its antecedent) or
//! emitted into the learned clause. The schemes differ only in which
//! variables are expanded and where the walk stops. A literal without an
//! antecedent is never expanded; if it is not the UIP it is emitted.

use super::Kernel;
use crate::formula::{Lit, Var};
use crate::trail::ClauseRef;

/// Which first-UIP scheme to use.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scheme {
    /// Standard scheme over the whole current level.
    FirstUip,
    /// First UIP within the current sublevel; earlier sublevels of the
    /// current level are treated like lower levels.
    Sublevel,
    /// First UIP over the current level, walking past flipped decisions:
    /// they count towards the UIP but are never expanded.
    DecisionLevel,
}

/// Position and kind of one literal of a learned clause at learning time.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LitInfo {
    pub level: u32,
    pub sublevel: u32,
    pub no_antecedent: bool,
}

/// A learned clause. `lits[0]` is the negated UIP.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Learned {
    pub lits: Vec<Lit>,
    /// Highest level below the conflict level among the other literals.
    pub backjump: u32,
    /// Conflict level and sublevel.
    pub level: u32,
    pub sublevel: u32,
    /// Per-literal details, parallel to `lits`.
    pub info: Vec<LitInfo>,
}

impl Learned {
    pub fn uip(&self) -> Lit {
        !self.lits[0]
    }
}

#[derive(Clone, Copy)]
enum Stop {
    FirstUip,
    At(Var),
}

impl Kernel {
    /// Analyzes a conflict under the given scheme. The clause is not added.
    pub fn analyze(&mut self, conflict: ClauseRef, scheme: Scheme) -> Learned {
        let dl = self.trail.level();
        let sub = self.trail.sublevel();
        let learned = match scheme {
            Scheme::FirstUip => self.traverse(conflict, Stop::FirstUip, |t, v| t.var_level(v) == dl),
            Scheme::Sublevel => self.traverse(conflict, Stop::FirstUip, |t, v| {
                t.var_level(v) == dl && t.var_sublevel(v) == sub
            }),
            Scheme::DecisionLevel => self.traverse(conflict, Stop::FirstUip, |t, v| t.var_level(v) == dl),
        };
        self.decay();
        learned
    }

    /// Analyzes a conflict that followed the assignment of `target`, walking
    /// back until `target` itself is reached. `lits[0]` of the result is
    /// `¬target`.
    pub fn analyze_towards(&mut self, conflict: ClauseRef, target: Lit) -> Learned {
        let dl = self.trail.level();
        let from = self.trail.position(target.var());
        let learned = self.traverse(conflict, Stop::At(target.var()), |t, v| {
            t.var_level(v) == dl && t.position(v) >= from
        });
        self.decay();
        learned
    }

    fn traverse(
        &mut self,
        conflict: ClauseRef,
        stop: Stop,
        expandable: impl Fn(&crate::trail::Trail, Var) -> bool,
    ) -> Learned {
        let dl = self.trail.level();
        let mut touched: Vec<Var> = Vec::new();
        let mut emitted: Vec<Lit> = Vec::new();
        let mut pending = 0usize;
        let mut idx = self.trail.len();
        let mut clause = Some(conflict);
        let mut current: Option<Var> = None;

        let uip = loop {
            let len = clause.map_or(0, |c| self.clause(c).len());
            for i in 0..len {
                let q = self.clause(clause.expect("non-empty"))[i];
                let v = q.var();
                if Some(v) == current || self.seen[v.index()] {
                    continue;
                }
                self.seen[v.index()] = true;
                touched.push(v);
                self.bump(v);
                if expandable(&self.trail, v) {
                    pending += 1;
                } else {
                    emitted.push(q);
                }
            }
            let entry = loop {
                assert!(idx > 0, "analysis ran off the trail");
                idx -= 1;
                let e = self.trail.entries()[idx];
                let v = e.lit.var();
                if self.seen[v.index()] && expandable(&self.trail, v) {
                    break e;
                }
            };
            pending -= 1;
            let v = entry.lit.var();
            let done = match stop {
                Stop::FirstUip => pending == 0,
                Stop::At(target) => v == target,
            };
            if done {
                break entry.lit;
            }
            current = Some(v);
            clause = entry.reason;
            if clause.is_none() {
                // a flipped decision that is not the UIP stays in the clause
                emitted.push(!entry.lit);
            }
        };

        for v in touched {
            self.seen[v.index()] = false;
        }
        let mut lits = Vec::with_capacity(emitted.len() + 1);
        lits.push(!uip);
        lits.extend(emitted);
        let info: Vec<LitInfo> = lits
            .iter()
            .map(|l| LitInfo {
                level: self.trail.var_level(l.var()),
                sublevel: self.trail.var_sublevel(l.var()),
                no_antecedent: self.trail.reason(l.var()).is_none(),
            })
            .collect();
        let backjump = info[1..]
            .iter()
            .map(|i| i.level)
            .filter(|&l| l < dl)
            .max()
            .unwrap_or(0);
        Learned {
            lits,
            backjump,
            level: dl,
            sublevel: self.trail.sublevel(),
            info,
        }
    }
}

/// Resolvent of two clauses on `pivot`, without duplicate literals.
pub fn resolve(a: &[Lit], b: &[Lit], pivot: Var) -> Vec<Lit> {
    let mut out: Vec<Lit> = Vec::with_capacity(a.len() + b.len());
    for &l in a.iter().chain(b) {
        if l.var() != pivot && !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_on_pivot() {
        let a = [Lit::from_dimacs(-6), Lit::from_dimacs(-9)];
        let b = [Lit::from_dimacs(6), Lit::from_dimacs(2)];
        assert_eq!(
            resolve(&a, &b, Var::new(6)),
            vec![Lit::from_dimacs(-9), Lit::from_dimacs(2)]
        );
    }
}
