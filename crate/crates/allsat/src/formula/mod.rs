//! Problem representation: variables, literals, clauses and CNF formulas.
//!
//! Variables are numbered from 1 as in DIMACS. A formula keeps its problem
//! clauses immutable after loading; learned and blocking clauses live in the
//! kernel's clause store.

mod cuts;
mod dimacs;

use std::fmt;
use std::ops::Not;

pub use cuts::{compute_cuts, CutStructure};
pub use dimacs::{parse_dimacs, parse_order, render_dimacs, ParseError};

/// A propositional variable, numbered from 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from its 1-based index.
    ///
    /// # Panics
    ///
    /// If `index` is zero.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variables are numbered from 1");
        Var(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal: a variable together with a polarity.
///
/// Encoded as `2 * var + negated` so it can index per-literal tables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    /// Builds a literal from a signed DIMACS integer.
    ///
    /// # Panics
    ///
    /// If `value` is zero.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::new(value.unsigned_abs() as u32), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.0 >> 1);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code usable as a table index.
    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "¬{}", self.var())
        }
    }
}

/// Where a clause came from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Origin {
    Problem,
    Learned,
    Blocking,
}

/// A disjunction of literals over distinct variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    pub lits: Vec<Lit>,
    /// Position within the owning formula or store, starting at 0.
    pub id: usize,
    pub origin: Origin,
}

impl Clause {
    pub fn min_var(&self) -> Option<usize> {
        self.lits.iter().map(|l| l.var().index()).min()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.lits.iter().map(|l| l.var().index()).max()
    }
}

/// Errors from building or transforming a formula.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("literal {lit} is out of range for {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: usize },
    #[error("order is not a permutation of 1..={0}")]
    NotAPermutation(usize),
}

/// A CNF formula over `num_vars` variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
    /// `order[k]` is the external name of internal variable `k` (index 0 unused).
    order: Vec<u32>,
    tautologies: usize,
}

impl CnfFormula {
    /// Empty formula over `num_vars` variables.
    pub fn new(num_vars: usize) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
            order: (0..=num_vars as u32).collect(),
            tautologies: 0,
        }
    }

    /// Builds a formula from signed DIMACS clauses, with the same
    /// normalisation as the parser.
    pub fn from_dimacs_clauses(
        num_vars: usize,
        clauses: &[Vec<i64>],
    ) -> Result<CnfFormula, FormulaError> {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_clause(c)?;
        }
        Ok(f)
    }

    /// Adds a clause, removing duplicate literals. Tautologies are dropped and
    /// counted. Returns whether the clause was kept.
    pub fn add_clause(&mut self, lits: &[i64]) -> Result<bool, FormulaError> {
        let mut out: Vec<Lit> = Vec::with_capacity(lits.len());
        for &v in lits {
            if v == 0 || v.unsigned_abs() as usize > self.num_vars {
                return Err(FormulaError::LiteralOutOfRange {
                    lit: v,
                    num_vars: self.num_vars,
                });
            }
            let lit = Lit::from_dimacs(v);
            if out.contains(&!lit) {
                self.tautologies += 1;
                return Ok(false);
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        let id = self.clauses.len();
        self.clauses.push(Clause {
            lits: out,
            id,
            origin: Origin::Problem,
        });
        Ok(true)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Number of tautological clauses dropped while loading.
    pub fn tautologies(&self) -> usize {
        self.tautologies
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.lits.is_empty())
    }

    /// External name of internal variable `var`.
    pub fn external(&self, var: Var) -> u32 {
        self.order[var.index()]
    }

    /// Maps an internal literal to the caller's original numbering.
    pub fn external_lit(&self, lit: Lit) -> Lit {
        Lit::new(Var::new(self.external(lit.var())), lit.is_positive())
    }

    /// Renames variables so that internal position `k` holds original
    /// variable `perm[k - 1]`.
    ///
    /// Outputs are later reported through [`CnfFormula::external_lit`].
    pub fn apply_order(&self, perm: &[u32]) -> Result<CnfFormula, FormulaError> {
        let n = self.num_vars;
        if perm.len() != n {
            return Err(FormulaError::NotAPermutation(n));
        }
        // position_of[v] = new internal index of current variable v
        let mut position_of = vec![0u32; n + 1];
        for (k, &v) in perm.iter().enumerate() {
            let v = v as usize;
            if v == 0 || v > n || position_of[v] != 0 {
                return Err(FormulaError::NotAPermutation(n));
            }
            position_of[v] = k as u32 + 1;
        }
        let mut order = vec![0u32; n + 1];
        for (v, &p) in position_of.iter().enumerate().skip(1) {
            order[p as usize] = self.order[v];
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| Clause {
                lits: c
                    .lits
                    .iter()
                    .map(|l| Lit::new(Var::new(position_of[l.var().index()]), l.is_positive()))
                    .collect(),
                id: c.id,
                origin: c.origin,
            })
            .collect();
        Ok(CnfFormula {
            num_vars: n,
            clauses,
            order,
            tautologies: self.tautologies,
        })
    }

    /// Evaluates the formula under a total assignment; `values[v]` is the
    /// value of variable `v` (index 0 ignored).
    pub fn satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.lits
                .iter()
                .any(|l| values[l.var().index()] == l.is_positive())
        })
    }
}
