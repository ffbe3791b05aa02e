//! Static cutsets and separators of a formula under its variable order.

use super::CnfFormula;

/// Cutsets and separators for every boundary `i` in `0..=n`.
///
/// `cutsets[i]` lists the ids of clauses with a variable `<= i` and a variable
/// `> i`. `separators[i]` lists the variables `<= i` that occur in those
/// clauses. Both lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutStructure {
    pub cutsets: Vec<Vec<usize>>,
    pub separators: Vec<Vec<usize>>,
    pub cutwidth: usize,
    pub pathwidth: usize,
}

pub fn compute_cuts(f: &CnfFormula) -> CutStructure {
    let n = f.num_vars();
    let mut cutsets = vec![Vec::new(); n + 1];
    let mut members = vec![Vec::new(); n + 1];
    for c in f.clauses() {
        let (Some(lo), Some(hi)) = (c.min_var(), c.max_var()) else {
            continue;
        };
        for (i, cut) in cutsets.iter_mut().enumerate().take(hi).skip(lo) {
            cut.push(c.id);
            members[i].extend(
                c.lits
                    .iter()
                    .map(|l| l.var().index())
                    .filter(|&v| v <= i),
            );
        }
    }
    let separators: Vec<Vec<usize>> = members
        .into_iter()
        .map(|mut m| {
            m.sort_unstable();
            m.dedup();
            m
        })
        .collect();
    let cutwidth = cutsets.iter().map(Vec::len).max().unwrap_or(0);
    let pathwidth = separators.iter().map(Vec::len).max().unwrap_or(0);
    CutStructure {
        cutsets,
        separators,
        cutwidth,
        pathwidth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spanning_clause() {
        let f = CnfFormula::from_dimacs_clauses(2, &[vec![1, 2]]).unwrap();
        let cuts = compute_cuts(&f);
        assert_eq!(cuts.cutsets, vec![vec![], vec![0], vec![]]);
        assert_eq!(cuts.separators[1], vec![1]);
        assert_eq!((cuts.cutwidth, cuts.pathwidth), (1, 1));
    }

    #[test]
    fn unit_clauses_cross_nothing() {
        let f = CnfFormula::from_dimacs_clauses(3, &[vec![2], vec![-3]]).unwrap();
        let cuts = compute_cuts(&f);
        assert!(cuts.cutsets.iter().all(Vec::is_empty));
        assert_eq!(cuts.cutwidth, 0);
    }
}
