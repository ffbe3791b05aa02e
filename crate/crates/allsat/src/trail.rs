//! The assignment stack.
//!
//! Every entry records the level it was assigned at, a sublevel within that
//! level and the clause that implied it. Entries without an antecedent are
//! decisions or flipped decisions inserted by chronological backtracking.
//! Walking the antecedents backwards gives the implication graph used by
//! conflict analysis.

use crate::formula::{Lit, Var};

/// Index of a clause in the kernel's clause store.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ClauseRef(pub u32);

impl ClauseRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Entry {
    pub lit: Lit,
    pub level: u32,
    pub sublevel: u32,
    pub reason: Option<ClauseRef>,
}

/// Value of a literal or variable under the current assignment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Value {
    True,
    False,
    Unassigned,
}

#[derive(Clone, Debug)]
pub struct Trail {
    entries: Vec<Entry>,
    /// First entry index of each level above 0.
    level_starts: Vec<usize>,
    /// Current sublevel of each open level, starting with level 0.
    sublevels: Vec<u32>,
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    position: Vec<usize>,
    sublevel_of: Vec<u32>,
}

impl Trail {
    pub fn new(num_vars: usize) -> Trail {
        Trail {
            entries: Vec::with_capacity(num_vars),
            level_starts: Vec::new(),
            sublevels: vec![0],
            value: vec![0; num_vars + 1],
            level: vec![0; num_vars + 1],
            reason: vec![None; num_vars + 1],
            position: vec![0; num_vars + 1],
            sublevel_of: vec![0; num_vars + 1],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.value.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Current decision level.
    pub fn level(&self) -> u32 {
        self.level_starts.len() as u32
    }

    /// Current sublevel of the current level.
    pub fn sublevel(&self) -> u32 {
        *self.sublevels.last().expect("level 0 always open")
    }

    /// Entries belonging to `level`.
    pub fn level_entries(&self, level: u32) -> &[Entry] {
        let start = if level == 0 {
            0
        } else {
            self.level_starts[level as usize - 1]
        };
        let end = self
            .level_starts
            .get(level as usize)
            .copied()
            .unwrap_or(self.entries.len());
        &self.entries[start..end]
    }

    /// The decision that opened `level` (`level >= 1`).
    pub fn decision(&self, level: u32) -> Lit {
        self.entries[self.level_starts[level as usize - 1]].lit
    }

    /// All decisions, in level order.
    pub fn decisions(&self) -> impl Iterator<Item = Lit> + '_ {
        self.level_starts.iter().map(|&i| self.entries[i].lit)
    }

    pub fn var_value(&self, var: Var) -> Value {
        match self.value[var.index()] {
            0 => Value::Unassigned,
            1 => Value::True,
            _ => Value::False,
        }
    }

    pub fn lit_value(&self, lit: Lit) -> Value {
        let v = self.value[lit.var().index()];
        if v == 0 {
            Value::Unassigned
        } else if (v > 0) == lit.is_positive() {
            Value::True
        } else {
            Value::False
        }
    }

    pub fn is_assigned(&self, var: Var) -> bool {
        self.value[var.index()] != 0
    }

    /// Level of an assigned variable.
    pub fn var_level(&self, var: Var) -> u32 {
        self.level[var.index()]
    }

    pub fn var_sublevel(&self, var: Var) -> u32 {
        self.sublevel_of[var.index()]
    }

    pub fn reason(&self, var: Var) -> Option<ClauseRef> {
        self.reason[var.index()]
    }

    /// Trail index of an assigned variable.
    pub fn position(&self, var: Var) -> usize {
        self.position[var.index()]
    }

    /// Opens a new decision level whose first entry will be `lit`.
    pub fn decide(&mut self, lit: Lit) {
        self.level_starts.push(self.entries.len());
        self.sublevels.push(0);
        self.assign(lit, None);
    }

    /// Appends a flipped decision at the current level, opening a new sublevel.
    pub fn insert_flipped(&mut self, lit: Lit) {
        *self.sublevels.last_mut().expect("level 0 always open") += 1;
        self.assign(lit, None);
    }

    /// Appends `lit` at the current level and sublevel.
    ///
    /// # Panics
    ///
    /// If the variable is already assigned.
    pub fn assign(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        let v = lit.var().index();
        assert!(self.value[v] == 0, "{} assigned twice", lit.var());
        let level = self.level();
        let sublevel = self.sublevel();
        self.value[v] = if lit.is_positive() { 1 } else { -1 };
        self.level[v] = level;
        self.reason[v] = reason;
        self.position[v] = self.entries.len();
        self.sublevel_of[v] = sublevel;
        self.entries.push(Entry {
            lit,
            level,
            sublevel,
            reason,
        });
    }

    /// Removes every entry above `level`; `on_remove` sees them newest first.
    pub fn cancel_to(&mut self, level: u32, mut on_remove: impl FnMut(&Entry)) {
        assert!(level <= self.level(), "cannot cancel upwards");
        if level == self.level() {
            return;
        }
        let keep = self.level_starts[level as usize];
        while self.entries.len() > keep {
            let e = self.entries.pop().expect("non-empty");
            self.value[e.lit.var().index()] = 0;
            self.reason[e.lit.var().index()] = None;
            on_remove(&e);
        }
        self.level_starts.truncate(level as usize);
        self.sublevels.truncate(level as usize + 1);
    }

    /// Values of all variables; `None` if some variable is unassigned.
    pub fn total_assignment(&self) -> Option<Vec<bool>> {
        let mut out = vec![false; self.value.len()];
        for (v, &x) in self.value.iter().enumerate().skip(1) {
            match x {
                0 => return None,
                x => out[v] = x > 0,
            }
        }
        Some(out)
    }

    /// Checks that the per-variable view matches the entries.
    pub fn is_consistent(&self) -> bool {
        let mut assigned = 0;
        for (i, e) in self.entries.iter().enumerate() {
            let v = e.lit.var();
            if self.lit_value(e.lit) != Value::True
                || self.position(v) != i
                || self.var_level(v) != e.level
                || self.reason(v) != e.reason
            {
                return false;
            }
            if i > 0 && self.entries[i - 1].level > e.level {
                return false;
            }
            assigned += 1;
        }
        assigned == self.value.iter().skip(1).filter(|&&x| x != 0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v)
    }

    #[test]
    fn decision_and_implied_entries() {
        let mut t = Trail::new(6);
        t.decide(lit(-5));
        assert_eq!(t.var_level(Var::new(5)), 1);
        assert_eq!(t.reason(Var::new(5)), None);
        t.assign(lit(-6), Some(ClauseRef(4)));
        assert_eq!(t.var_level(Var::new(6)), 1);
        assert_eq!(t.reason(Var::new(6)), Some(ClauseRef(4)));
        assert_eq!(t.lit_value(lit(6)), Value::False);
        assert!(t.is_consistent());
    }

    #[test]
    fn root_level_fact() {
        let mut t = Trail::new(2);
        t.assign(lit(1), Some(ClauseRef(0)));
        assert_eq!(t.level(), 0);
        assert_eq!(t.var_level(Var::new(1)), 0);
    }

    #[test]
    #[should_panic(expected = "assigned twice")]
    fn double_assignment_panics() {
        let mut t = Trail::new(2);
        t.assign(lit(1), None);
        t.assign(lit(-1), None);
    }

    #[test]
    fn cancel_keeps_lower_levels() {
        let mut t = Trail::new(6);
        t.assign(lit(1), Some(ClauseRef(0)));
        t.decide(lit(-4));
        t.decide(lit(-6));
        t.assign(lit(-5), Some(ClauseRef(3)));
        t.decide(lit(-2));
        t.cancel_to(3, |_| {});
        assert_eq!(t.len(), 5);
        t.cancel_to(1, |_| {});
        assert_eq!(t.level(), 1);
        assert_eq!(t.len(), 2);
        assert!(!t.is_assigned(Var::new(6)));
        t.cancel_to(0, |_| {});
        assert_eq!(t.len(), 1);
        assert!(t.is_consistent());
    }

    #[test]
    fn sublevels_follow_flips() {
        let mut t = Trail::new(4);
        t.decide(lit(1));
        t.assign(lit(2), Some(ClauseRef(0)));
        assert_eq!(t.var_sublevel(Var::new(2)), 0);
        t.decide(lit(3));
        t.cancel_to(1, |_| {});
        t.insert_flipped(lit(-3));
        assert_eq!(t.var_sublevel(Var::new(3)), 1);
        assert_eq!(t.var_level(Var::new(3)), 1);
        t.assign(lit(4), Some(ClauseRef(1)));
        assert_eq!(t.var_sublevel(Var::new(4)), 1);
        assert_eq!(t.decision(1), lit(1));
    }
}
