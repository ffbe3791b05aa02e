//! Enumeration without blocking clauses.
//!
//! Solutions are total assignments found one by one. Instead of recording a
//! clause, the engine backtracks chronologically after each solution and
//! inserts the flipped decision one level down without an antecedent, so the
//! finished branch is never searched again.
//!
//! Conflicts are resolved by one of four strategies:
//!
//! * `Bt`: learn, then backtrack chronologically;
//! * `Bj`: learn, then backjump, but never below the limit level (the first
//!   level where the search left the previous solution); chronological when
//!   that limit is the current level;
//! * `Cbj`: conflict-directed backjumping, resolving successive conflict
//!   clauses and flipping the decision at the highest level of the resolvent;
//! * `BjCbj`: `Bj` when below the limit allows it, `Cbj` otherwise.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::formula::{CnfFormula, Lit, Origin, Var};
use crate::kernel::{resolve, ClauseStatus, Heuristic, Kernel, Learned, Scheme};
use crate::observe::{Budget, Observer, Outcome};
use crate::trail::{ClauseRef, Value};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    Bt,
    Bj,
    Cbj,
    BjCbj,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NonBlockingConfig {
    /// `Scheme::Sublevel` or `Scheme::DecisionLevel`.
    pub scheme: Scheme,
    pub strategy: Strategy,
}

impl Default for NonBlockingConfig {
    fn default() -> Self {
        NonBlockingConfig {
            scheme: Scheme::DecisionLevel,
            strategy: Strategy::Bt,
        }
    }
}

/// Outcome of resolving a conflict.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Resolution {
    Continue,
    /// The search space is exhausted.
    Halt,
}

/// Search state shared with the caching engine.
pub struct NonBlocking {
    pub kernel: Kernel,
    pub cfg: NonBlockingConfig,
    /// Limit level.
    pub lim: u32,
}

impl NonBlocking {
    pub fn new(f: &CnfFormula, cfg: NonBlockingConfig, heuristic: Heuristic) -> NonBlocking {
        NonBlocking {
            kernel: Kernel::new(f, heuristic),
            cfg,
            lim: 0,
        }
    }

    /// Cancels `level` and everything above it, then inserts the negation of
    /// its decision at `level - 1` in a new sublevel.
    pub fn backtrack_flip(&mut self, level: u32) {
        let decision = self.kernel.trail().decision(level);
        self.kernel.cancel_and_flip(level - 1, !decision);
    }

    /// Chronological backtrack after a solution. `before` sees the trail and
    /// the level the search returns to.
    pub fn after_solution(&mut self, before: &mut dyn FnMut(&Kernel, u32)) {
        let dl = self.kernel.level();
        before(&self.kernel, dl - 1);
        self.backtrack_flip(dl);
        self.lim = self.kernel.level();
    }

    fn learn(&mut self, conflict: ClauseRef, held: bool, obs: &mut dyn Observer) -> (ClauseRef, Learned) {
        let learned = self.kernel.analyze(conflict, self.cfg.scheme);
        obs.learned(&learned);
        let cr = self.kernel.add_clause(learned.lits.clone(), Origin::Learned, held);
        (cr, learned)
    }

    /// Resolves a conflict at a level above 0 with the configured strategy.
    /// `before` is called ahead of every backtrack with the level that will
    /// remain.
    pub fn resolve(
        &mut self,
        conflict: ClauseRef,
        obs: &mut dyn Observer,
        before: &mut dyn FnMut(&Kernel, u32),
    ) -> Resolution {
        let dl = self.kernel.level();
        debug_assert!(dl > 0);
        let result = match self.cfg.strategy {
            Strategy::Bt => {
                self.learn(conflict, false, obs);
                before(&self.kernel, dl - 1);
                self.backtrack_flip(dl);
                Resolution::Continue
            }
            Strategy::Bj => {
                let (_, learned) = self.learn(conflict, false, obs);
                if self.lim < dl {
                    let target = learned.backjump.max(self.lim);
                    before(&self.kernel, target);
                    self.kernel.cancel_to(target);
                    return Resolution::Continue;
                }
                before(&self.kernel, dl - 1);
                self.backtrack_flip(dl);
                Resolution::Continue
            }
            Strategy::Cbj => self.cbj(conflict, obs, before),
            Strategy::BjCbj => {
                if self.lim < dl {
                    let (_, learned) = self.learn(conflict, false, obs);
                    let target = learned.backjump.max(self.lim);
                    before(&self.kernel, target);
                    self.kernel.cancel_to(target);
                    return Resolution::Continue;
                }
                self.cbj(conflict, obs, before)
            }
        };
        self.lim = self.kernel.level();
        result
    }

    fn cbj(
        &mut self,
        conflict: ClauseRef,
        obs: &mut dyn Observer,
        before: &mut dyn FnMut(&Kernel, u32),
    ) -> Resolution {
        let mut stack: Vec<ClauseRef> = Vec::new();
        let mut conflict = Some(conflict);
        loop {
            if let Some(c) = conflict.take() {
                let dl = self.kernel.level();
                if dl == 0 {
                    return Resolution::Halt;
                }
                let (cr, _) = self.learn(c, true, obs);
                stack.push(cr);
                before(&self.kernel, dl - 1);
                self.backtrack_flip(dl);
            } else if let Some(cl1) = stack.pop() {
                self.kernel.set_held(cl1, false);
                match self.kernel.status(cl1) {
                    ClauseStatus::Unit(unit) => {
                        self.kernel.assign_implied(unit, cl1);
                        if let Some(c2) = self.kernel.propagate() {
                            if self.kernel.level() == 0 {
                                return Resolution::Halt;
                            }
                            let cl2 = self.kernel.analyze_towards(c2, unit);
                            obs.resolved(&cl2.lits);
                            self.kernel.add_clause(cl2.lits.clone(), Origin::Learned, false);
                            let cl3 = resolve(self.kernel.clause(cl1), &cl2.lits, unit.var());
                            obs.resolved(&cl3);
                            let t = self.kernel.trail();
                            let bl = cl3.iter().map(|l| t.var_level(l.var())).max().unwrap_or(0);
                            if bl == 0 {
                                return Resolution::Halt;
                            }
                            let cr3 = self.kernel.add_clause(cl3, Origin::Learned, true);
                            stack.push(cr3);
                            before(&self.kernel, bl - 1);
                            self.backtrack_flip(bl);
                        }
                    }
                    ClauseStatus::Falsified => conflict = Some(cl1),
                    ClauseStatus::Satisfied | ClauseStatus::Open => {}
                }
            } else {
                return Resolution::Continue;
            }
            if conflict.is_none() {
                conflict = self.kernel.propagate();
            }
        }
    }

    /// The current total assignment as literals ordered by variable.
    pub fn total_cube(&self) -> Vec<Lit> {
        let t = self.kernel.trail();
        (1..=self.kernel.num_vars() as u32)
            .map(|v| {
                let v = Var::new(v);
                Lit::new(v, t.var_value(v) == Value::True)
            })
            .collect()
    }
}

pub fn enumerate_nonblocking(
    f: &CnfFormula,
    cfg: NonBlockingConfig,
    budget: &mut Budget,
    obs: &mut dyn Observer,
) -> Outcome {
    let mut s = NonBlocking::new(f, cfg, Heuristic::Activity);
    let mut models = BigUint::zero();
    let mut stopped = None;
    let mut nothing = |_: &Kernel, _: u32| {};

    loop {
        debug_assert!(s.lim <= s.kernel.level());
        if let Err(limit) = budget.check(s.kernel.approx_bytes()) {
            stopped = Some(limit);
            break;
        }
        if let Some(conflict) = s.kernel.propagate() {
            if s.kernel.level() == 0 || s.resolve(conflict, obs, &mut nothing) == Resolution::Halt {
                break;
            }
            continue;
        }
        if s.kernel.all_assigned() {
            obs.cube(&s.total_cube());
            models += 1u32;
            if s.kernel.level() == 0 {
                break;
            }
            s.after_solution(&mut nothing);
            continue;
        }
        let lit = s.kernel.pick_branch().expect("unassigned variable exists");
        s.kernel.decide(lit);
    }

    let cubes = u64::try_from(&models).unwrap_or(u64::MAX);
    Outcome {
        stopped,
        models,
        cubes,
        kernel: s.kernel.stats,
        peak_bytes: budget.peak_bytes(),
    }
}
