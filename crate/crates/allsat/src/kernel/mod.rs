//! Unit propagation, decisions and conflict analysis shared by every engine.
//!
//! Clauses are watched on their first two literals. A literal's watch list is
//! scanned newest first when the literal becomes false, and the propagation
//! queue is the unprocessed tail of the trail, so consequences are handled in
//! the order they were assigned.
//!
//! Backtracking can leave a recently added clause unit without any watch
//! noticing it: learned clauses are all-false when they are created, and
//! chronological backtracking asserts literals above the level that implies
//! them. To keep propagation complete, every clause added since the target
//! level was last extended by a decision is re-examined after a backtrack.
//! Clauses marked as held are skipped; conflict-directed backjumping asserts
//! those itself.

mod analyze;

use crate::formula::{CnfFormula, Lit, Origin, Var};
use crate::trail::{ClauseRef, Entry, Trail, Value};

pub use analyze::{resolve, Learned, LitInfo, Scheme};

/// Activity bump applied to every variable met during conflict analysis.
pub const ACTIVITY_BUMP: f64 = 1.0;
/// Activity decay factor applied per conflict.
pub const ACTIVITY_DECAY: f64 = 0.95;

#[derive(Clone, Debug)]
struct StoredClause {
    lits: Vec<Lit>,
    origin: Origin,
    held: bool,
}

/// Variable selection rule.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Heuristic {
    /// Highest activity first, lowest index on ties.
    Activity,
    /// Smallest unassigned index.
    IndexOrder,
}

/// Counters exposed by the kernel.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct KernelStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub max_trail: usize,
}

/// Status of a clause under the current assignment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClauseStatus {
    Satisfied,
    Unit(Lit),
    Falsified,
    Open,
}

#[derive(Clone, Debug)]
pub struct Kernel {
    clauses: Vec<StoredClause>,
    num_problem: usize,
    watches: Vec<Vec<ClauseRef>>,
    /// Learned and blocking clauses in order of addition.
    added: Vec<ClauseRef>,
    /// `watermark[l]` = `added.len()` when level `l + 1` was last opened.
    watermark: Vec<usize>,
    trail: Trail,
    qhead: usize,
    pending_conflict: Option<ClauseRef>,
    heuristic: Heuristic,
    activity: Vec<f64>,
    var_inc: f64,
    saved_phase: Vec<Option<bool>>,
    next_free: usize,
    pub(crate) seen: Vec<bool>,
    pub stats: KernelStats,
}

impl Kernel {
    /// Loads the problem clauses. Unit clauses are assigned at level 0 with
    /// the unit clause as antecedent; an empty clause becomes a pending
    /// level-0 conflict.
    pub fn new(f: &CnfFormula, heuristic: Heuristic) -> Kernel {
        let n = f.num_vars();
        let mut k = Kernel {
            clauses: Vec::with_capacity(f.clauses().len()),
            num_problem: f.clauses().len(),
            watches: vec![Vec::new(); 2 * n + 2],
            added: Vec::new(),
            watermark: Vec::new(),
            trail: Trail::new(n),
            qhead: 0,
            pending_conflict: None,
            heuristic,
            activity: vec![0.0; n + 1],
            var_inc: ACTIVITY_BUMP,
            saved_phase: vec![None; n + 1],
            next_free: 1,
            seen: vec![false; n + 1],
            stats: KernelStats::default(),
        };
        for c in f.clauses() {
            let cr = ClauseRef(k.clauses.len() as u32);
            k.clauses.push(StoredClause {
                lits: c.lits.clone(),
                origin: Origin::Problem,
                held: false,
            });
            match c.lits.len() {
                0 => {
                    k.pending_conflict.get_or_insert(cr);
                }
                1 => match k.trail.lit_value(c.lits[0]) {
                    Value::Unassigned => k.trail.assign(c.lits[0], Some(cr)),
                    Value::True => {}
                    Value::False => {
                        k.pending_conflict.get_or_insert(cr);
                    }
                },
                _ => k.watch(cr),
            }
        }
        k
    }

    pub fn num_vars(&self) -> usize {
        self.trail.num_vars()
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn level(&self) -> u32 {
        self.trail.level()
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic
    }

    pub fn clause(&self, cr: ClauseRef) -> &[Lit] {
        &self.clauses[cr.index()].lits
    }

    pub fn origin(&self, cr: ClauseRef) -> Origin {
        self.clauses[cr.index()].origin
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_problem_clauses(&self) -> usize {
        self.num_problem
    }

    /// Learned and blocking clauses, oldest first.
    pub fn added_clauses(&self) -> impl Iterator<Item = (ClauseRef, &[Lit])> + '_ {
        self.added
            .iter()
            .map(move |&cr| (cr, self.clauses[cr.index()].lits.as_slice()))
    }

    pub fn all_assigned(&self) -> bool {
        self.trail.len() == self.num_vars()
    }

    /// Rough heap footprint of the clause database and trail in bytes.
    pub fn approx_bytes(&self) -> usize {
        let lits: usize = self.clauses.iter().map(|c| c.lits.len()).sum();
        let watches: usize = self.watches.iter().map(Vec::len).sum();
        lits * 4 + self.clauses.len() * 48 + watches * 4 + self.num_vars() * 64
    }

    pub fn status(&self, cr: ClauseRef) -> ClauseStatus {
        let mut unit = None;
        let mut open = 0;
        for &l in self.clause(cr) {
            match self.trail.lit_value(l) {
                Value::True => return ClauseStatus::Satisfied,
                Value::Unassigned => {
                    open += 1;
                    unit = Some(l);
                }
                Value::False => {}
            }
        }
        match (open, unit) {
            (0, _) => ClauseStatus::Falsified,
            (1, Some(l)) => ClauseStatus::Unit(l),
            _ => ClauseStatus::Open,
        }
    }

    fn watch(&mut self, cr: ClauseRef) {
        let lits = &self.clauses[cr.index()].lits;
        self.watches[lits[0].code()].push(cr);
        self.watches[lits[1].code()].push(cr);
    }

    fn unwatch(&mut self, cr: ClauseRef) {
        let lits = &self.clauses[cr.index()].lits;
        for w in [lits[0], lits[1]] {
            let list = &mut self.watches[w.code()];
            if let Some(i) = list.iter().position(|&c| c == cr) {
                list.remove(i);
            }
        }
    }

    /// Puts the best watch candidates first: true literals by ascending
    /// level, then unassigned ones, then false ones, most recent first.
    fn order_for_watching(&mut self, cr: ClauseRef) {
        let trail = &self.trail;
        let rank = |l: &Lit| match trail.lit_value(*l) {
            Value::True => (0, trail.var_level(l.var()) as i64),
            Value::Unassigned => (1, 0),
            Value::False => (2, -(trail.position(l.var()) as i64)),
        };
        self.clauses[cr.index()].lits.sort_by_key(rank);
    }

    /// Adds a learned or blocking clause and watches it.
    pub fn add_clause(&mut self, lits: Vec<Lit>, origin: Origin, held: bool) -> ClauseRef {
        debug_assert!(origin != Origin::Problem);
        let cr = ClauseRef(self.clauses.len() as u32);
        self.clauses.push(StoredClause { lits, origin, held });
        self.added.push(cr);
        if origin == Origin::Learned {
            self.stats.learned += 1;
        }
        if self.clauses[cr.index()].lits.len() >= 2 {
            self.order_for_watching(cr);
            self.watch(cr);
        }
        cr
    }

    pub fn set_held(&mut self, cr: ClauseRef, held: bool) {
        self.clauses[cr.index()].held = held;
    }

    /// Runs unit propagation to a fixpoint or the first falsified clause.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        if let Some(c) = self.pending_conflict.take() {
            self.stats.conflicts += 1;
            return Some(c);
        }
        let Kernel {
            clauses,
            watches,
            trail,
            qhead,
            stats,
            ..
        } = self;
        while *qhead < trail.len() {
            let p = trail.entries()[*qhead].lit;
            *qhead += 1;
            stats.propagations += 1;
            let false_lit = !p;
            let mut list = std::mem::take(&mut watches[false_lit.code()]);
            let mut conflict = None;
            let mut i = list.len();
            while i > 0 {
                i -= 1;
                let cr = list[i];
                let lits = &mut clauses[cr.index()].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if trail.lit_value(first) == Value::True {
                    continue;
                }
                if let Some(k) = (2..lits.len()).find(|&k| trail.lit_value(lits[k]) != Value::False) {
                    lits.swap(1, k);
                    watches[lits[1].code()].push(cr);
                    list.swap_remove(i);
                    continue;
                }
                if trail.lit_value(first) == Value::False {
                    conflict = Some(cr);
                    break;
                }
                trail.assign(first, Some(cr));
            }
            watches[false_lit.code()] = list;
            if conflict.is_some() {
                stats.conflicts += 1;
                *qhead = trail.len();
                stats.max_trail = stats.max_trail.max(trail.len());
                return conflict;
            }
        }
        stats.max_trail = stats.max_trail.max(trail.len());
        None
    }

    /// Opens a new level with `lit` as its decision.
    pub fn decide(&mut self, lit: Lit) {
        let level = self.trail.level() as usize;
        self.watermark.truncate(level);
        self.watermark.push(self.added.len());
        self.stats.decisions += 1;
        self.trail.decide(lit);
    }

    /// Appends a flipped decision at the current level in a new sublevel.
    pub fn insert_flipped(&mut self, lit: Lit) {
        self.trail.insert_flipped(lit);
    }

    /// Appends an implied literal at the current level.
    pub fn assign_implied(&mut self, lit: Lit, reason: ClauseRef) {
        self.trail.assign(lit, Some(reason));
    }

    /// Cancels every level above `level`, then re-examines clauses added
    /// since `level` was last extended by a decision. Units found there are
    /// assigned at `level`; a falsified one is reported by the next
    /// [`Kernel::propagate`].
    pub fn cancel_to(&mut self, level: u32) {
        if level >= self.trail.level() {
            return;
        }
        self.cancel_trail(level);
        self.recheck_window(level);
    }

    /// Like [`Kernel::cancel_to`], but appends `flipped` at `level` in a new
    /// sublevel before the re-examination.
    pub fn cancel_and_flip(&mut self, level: u32, flipped: Lit) {
        self.cancel_trail(level);
        self.trail.insert_flipped(flipped);
        self.recheck_window(level);
    }

    fn cancel_trail(&mut self, level: u32) {
        let mut lowest = self.next_free;
        self.trail.cancel_to(level, |e: &Entry| {
            lowest = lowest.min(e.lit.var().index());
        });
        self.next_free = lowest;
        self.qhead = self.qhead.min(self.trail.len());
        self.pending_conflict = None;
    }

    fn recheck_window(&mut self, level: u32) {
        let from = self
            .watermark
            .get(level as usize)
            .copied()
            .unwrap_or(self.added.len());
        self.watermark.truncate(level as usize);
        for idx in from..self.added.len() {
            let cr = self.added[idx];
            self.recheck(cr);
        }
    }

    fn recheck(&mut self, cr: ClauseRef) {
        let len = self.clauses[cr.index()].lits.len();
        if len >= 2 {
            self.unwatch(cr);
            self.order_for_watching(cr);
            self.watch(cr);
        }
        if self.clauses[cr.index()].held || self.pending_conflict.is_some() {
            return;
        }
        match self.status(cr) {
            ClauseStatus::Unit(l) => self.trail.assign(l, Some(cr)),
            ClauseStatus::Falsified => self.pending_conflict = Some(cr),
            ClauseStatus::Satisfied | ClauseStatus::Open => {}
        }
    }

    /// Saves the phase of `lit`'s variable for later decisions.
    pub fn save_phase(&mut self, lit: Lit) {
        self.saved_phase[lit.var().index()] = Some(lit.is_positive());
    }

    pub fn saved_phase(&self, var: Var) -> Option<bool> {
        self.saved_phase[var.index()]
    }

    /// Smallest unassigned variable index, or `None` when all are assigned.
    pub fn first_unassigned(&mut self) -> Option<Var> {
        let n = self.num_vars();
        while self.next_free <= n && self.trail.is_assigned(Var::new(self.next_free as u32)) {
            self.next_free += 1;
        }
        (self.next_free <= n).then(|| Var::new(self.next_free as u32))
    }

    /// Chooses the next decision literal, or `None` if every variable is
    /// assigned. The phase is the saved one if any, else false.
    pub fn pick_branch(&mut self) -> Option<Lit> {
        let var = match self.heuristic {
            Heuristic::IndexOrder => self.first_unassigned()?,
            Heuristic::Activity => {
                let mut best: Option<(f64, usize)> = None;
                for v in 1..=self.num_vars() {
                    if self.trail.is_assigned(Var::new(v as u32)) {
                        continue;
                    }
                    let a = self.activity[v];
                    if best.map_or(true, |(b, _)| a > b) {
                        best = Some((a, v));
                    }
                }
                Var::new(best?.1 as u32)
            }
        };
        let phase = self.saved_phase[var.index()].unwrap_or(false);
        Some(Lit::new(var, phase))
    }

    pub fn activity(&self, var: Var) -> f64 {
        self.activity[var.index()]
    }

    pub(crate) fn bump(&mut self, var: Var) {
        let a = &mut self.activity[var.index()];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    pub(crate) fn decay(&mut self) {
        self.var_inc /= ACTIVITY_DECAY;
    }

    /// Checks the propagation fixpoint against a naive scan of every clause:
    /// no clause may be falsified or unit. Held clauses are skipped.
    pub fn is_fixpoint(&self) -> bool {
        (0..self.clauses.len()).all(|i| {
            let cr = ClauseRef(i as u32);
            self.clauses[i].held
                || matches!(self.status(cr), ClauseStatus::Satisfied | ClauseStatus::Open)
        })
    }
}
