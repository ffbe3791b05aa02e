//! Truth-table reference enumerator.
//!
//! Assignments are bit masks: bit `k - 1` holds the value of `x_k`. Every one
//! of the `2^n` assignments is evaluated, so this is only usable for small
//! formulas.

use crate::formula::{CnfFormula, Lit};

/// Largest variable count the oracle accepts.
pub const MAX_VARS: usize = 25;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("oracle refuses {0} variables (limit {MAX_VARS})")]
pub struct TooLarge(pub usize);

/// Sorted, duplicate-free set of total assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSet {
    pub num_vars: usize,
    pub models: Vec<u32>,
}

impl ModelSet {
    pub fn count(&self) -> usize {
        self.models.len()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.models.binary_search(&mask).is_ok()
    }
}

/// Packs a total assignment (`values[v]` for `v` in `1..=n`) into a mask.
pub fn mask_of(values: &[bool]) -> u32 {
    values
        .iter()
        .skip(1)
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |m, (k, _)| m | 1 << k)
}

/// Packs a set of literals over distinct variables into (care, value) masks.
pub fn cube_masks(lits: &[Lit]) -> (u32, u32) {
    lits.iter().fold((0, 0), |(care, val), l| {
        let bit = 1u32 << (l.var().index() - 1);
        (care | bit, if l.is_positive() { val | bit } else { val })
    })
}

struct Masks {
    pos: Vec<u32>,
    neg: Vec<u32>,
}

impl Masks {
    fn new<'a>(clauses: impl Iterator<Item = &'a [Lit]>) -> Masks {
        let (pos, neg) = clauses.map(|c| clause_masks(c)).unzip();
        Masks { pos, neg }
    }

    fn satisfied(&self, a: u32) -> bool {
        self.pos
            .iter()
            .zip(&self.neg)
            .all(|(&p, &n)| a & p != 0 || !a & n != 0)
    }
}

fn clause_masks(c: &[Lit]) -> (u32, u32) {
    c.iter().fold((0, 0), |(p, n), l| {
        let bit = 1u32 << (l.var().index() - 1);
        if l.is_positive() {
            (p | bit, n)
        } else {
            (p, n | bit)
        }
    })
}

fn guard(n: usize) -> Result<(), TooLarge> {
    if n > MAX_VARS {
        Err(TooLarge(n))
    } else {
        Ok(())
    }
}

/// Models of a clause list over `n` variables.
pub fn models_of<'a>(
    n: usize,
    clauses: impl Iterator<Item = &'a [Lit]>,
) -> Result<ModelSet, TooLarge> {
    guard(n)?;
    let masks = Masks::new(clauses);
    let models = (0..1u64 << n)
        .map(|a| a as u32)
        .filter(|&a| masks.satisfied(a))
        .collect();
    Ok(ModelSet { num_vars: n, models })
}

/// Every model of `f`.
pub fn enumerate_all(f: &CnfFormula) -> Result<ModelSet, TooLarge> {
    models_of(f.num_vars(), f.clauses().iter().map(|c| c.lits.as_slice()))
}

/// Whether every model of `f` together with `extra` satisfies `clause`.
pub fn entails_with(f: &CnfFormula, extra: &[Vec<Lit>], clause: &[Lit]) -> Result<bool, TooLarge> {
    guard(f.num_vars())?;
    let masks = Masks::new(
        f.clauses()
            .iter()
            .map(|c| c.lits.as_slice())
            .chain(extra.iter().map(Vec::as_slice)),
    );
    let (p, n) = clause_masks(clause);
    Ok((0..1u64 << f.num_vars())
        .map(|a| a as u32)
        .filter(|&a| masks.satisfied(a))
        .all(|a| a & p != 0 || !a & n != 0))
}

/// Whether every model of `f` satisfies `clause`.
pub fn entails(f: &CnfFormula, clause: &[Lit]) -> Result<bool, TooLarge> {
    entails_with(f, &[], clause)
}

/// Models of `f` extending `prefix` (values of `x_1..x_i`, index 0 unused),
/// projected onto `x_{i+1}..x_n`: bit `k - 1` of a result holds `x_{i+k}`.
pub fn subinstance_models(f: &CnfFormula, prefix: &[bool]) -> Result<ModelSet, TooLarge> {
    let n = f.num_vars();
    guard(n)?;
    let i = prefix.len().saturating_sub(1);
    let fixed = mask_of(prefix);
    let masks = Masks::new(f.clauses().iter().map(|c| c.lits.as_slice()));
    let models = (0..1u64 << (n - i))
        .map(|s| s as u32)
        .filter(|&s| masks.satisfied(fixed | s.checked_shl(i as u32).unwrap_or(0)))
        .collect();
    Ok(ModelSet {
        num_vars: n - i,
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(3, &[vec![1, -2], vec![2, -3], vec![3, -1]]).unwrap()
    }

    #[test]
    fn cycle_has_two_models() {
        let m = enumerate_all(&cycle()).unwrap();
        assert_eq!(m.models, vec![0b000, 0b111]);
    }

    #[test]
    fn empty_formula_counts_all() {
        assert_eq!(enumerate_all(&CnfFormula::new(3)).unwrap().count(), 8);
    }

    #[test]
    fn entailment() {
        let f = CnfFormula::from_dimacs_clauses(1, &[vec![1]]).unwrap();
        let l = Lit::from_dimacs;
        assert!(entails(&f, &[l(1), l(-1)]).unwrap());
        assert!(!entails(&f, &[l(-1)]).unwrap());
    }

    #[test]
    fn guard_refuses_large() {
        assert_eq!(enumerate_all(&CnfFormula::new(26)), Err(TooLarge(26)));
    }

    #[test]
    fn subinstance_of_falsified_prefix_is_empty() {
        let f = cycle();
        // x1 = 1 forces x3, which forces x2
        let m = subinstance_models(&f, &[false, true, false]).unwrap();
        assert!(m.models.is_empty());
        let all = subinstance_models(&f, &[false]).unwrap();
        assert_eq!(all, enumerate_all(&f).unwrap());
    }
}
