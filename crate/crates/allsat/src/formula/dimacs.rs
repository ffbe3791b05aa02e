//! DIMACS CNF reading and writing, plus variable-order files.

use std::fmt::Write as _;

use super::{CnfFormula, FormulaError};

/// A parse failure, tagged with the 1-based line it occurred on.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: clause data before the `p cnf` header")]
    MissingHeader { line: usize },
    #[error("line {line}: bad token `{token}`")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {lit} is out of range for {num_vars} variables")]
    OutOfRange {
        line: usize,
        lit: i64,
        num_vars: usize,
    },
    #[error("line {line}: last clause is missing its 0 terminator")]
    MissingTerminator { line: usize },
    #[error("line {line}: header declares {declared} clauses but {found} were read")]
    ClauseCount {
        line: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: {reason}")]
    Order { line: usize, reason: String },
}

/// Parses DIMACS CNF text.
///
/// Comment lines start with `c`. A `%` line (as found in some benchmark
/// archives) ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut formula: Option<CnfFormula> = None;
    let mut declared = 0usize;
    let mut found = 0usize;
    let mut current: Vec<i64> = Vec::new();
    let mut open_line = 0usize;
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if formula.is_some() {
                return Err(ParseError::Header {
                    line,
                    reason: "duplicate header".into(),
                });
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(ParseError::Header {
                    line,
                    reason: "expected `p cnf <vars> <clauses>`".into(),
                });
            }
            let n: usize = parts[2].parse().map_err(|_| ParseError::Header {
                line,
                reason: format!("bad variable count `{}`", parts[2]),
            })?;
            declared = parts[3].parse().map_err(|_| ParseError::Header {
                line,
                reason: format!("bad clause count `{}`", parts[3]),
            })?;
            formula = Some(CnfFormula::new(n));
            continue;
        }
        let f = formula.as_mut().ok_or(ParseError::MissingHeader { line })?;
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::BadToken {
                line,
                token: token.to_string(),
            })?;
            if value == 0 {
                found += 1;
                match f.add_clause(&current) {
                    Ok(_) => {}
                    Err(FormulaError::LiteralOutOfRange { lit, num_vars }) => {
                        return Err(ParseError::OutOfRange {
                            line,
                            lit,
                            num_vars,
                        })
                    }
                    Err(e) => unreachable!("{e}"),
                }
                current.clear();
            } else {
                if value.unsigned_abs() as usize > f.num_vars() {
                    return Err(ParseError::OutOfRange {
                        line,
                        lit: value,
                        num_vars: f.num_vars(),
                    });
                }
                if current.is_empty() {
                    open_line = line;
                }
                current.push(value);
            }
        }
    }

    let formula = formula.ok_or(ParseError::Header {
        line: last_line.max(1),
        reason: "no `p cnf` header".into(),
    })?;
    if !current.is_empty() {
        return Err(ParseError::MissingTerminator { line: open_line });
    }
    if found != declared {
        return Err(ParseError::ClauseCount {
            line: last_line.max(1),
            declared,
            found,
        });
    }
    Ok(formula)
}

/// Writes a formula as DIMACS CNF in internal numbering.
pub fn render_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.clauses().len());
    for c in f.clauses() {
        for l in &c.lits {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

/// Reads a variable-order file: line `k` names the original variable placed
/// at position `k`. Blank lines and `c` comments are skipped.
pub fn parse_order(text: &str, num_vars: usize) -> Result<Vec<u32>, ParseError> {
    let mut perm = Vec::with_capacity(num_vars);
    let mut seen = vec![false; num_vars + 1];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let v: u32 = t.parse().map_err(|_| ParseError::BadToken {
            line,
            token: t.to_string(),
        })?;
        if v == 0 || v as usize > num_vars {
            return Err(ParseError::Order {
                line,
                reason: format!("variable {v} out of range 1..={num_vars}"),
            });
        }
        if std::mem::replace(&mut seen[v as usize], true) {
            return Err(ParseError::Order {
                line,
                reason: format!("variable {v} listed twice"),
            });
        }
        perm.push(v);
    }
    if perm.len() != num_vars {
        return Err(ParseError::Order {
            line: text.lines().count().max(1),
            reason: format!("{} variables listed, expected {num_vars}", perm.len()),
        });
    }
    Ok(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Lit, Var};

    #[test]
    fn three_clause_cycle() {
        let f = parse_dimacs("p cnf 3 3\n1 -2 0\n2 -3 0\n3 -1 0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        let got: Vec<Vec<i64>> = f
            .clauses()
            .iter()
            .map(|c| c.lits.iter().map(|l| l.to_dimacs()).collect())
            .collect();
        assert_eq!(got, vec![vec![1, -2], vec![2, -3], vec![3, -1]]);
    }

    #[test]
    fn empty_formula() {
        let f = parse_dimacs("p cnf 1 0\n").unwrap();
        assert_eq!(f.num_vars(), 1);
        assert!(f.clauses().is_empty());
    }

    #[test]
    fn duplicates_removed() {
        let f = parse_dimacs("p cnf 2 1\n1 1 -2 0\n").unwrap();
        assert_eq!(
            f.clauses()[0].lits,
            vec![Var::new(1).pos(), Var::new(2).neg()]
        );
    }

    #[test]
    fn tautology_dropped_and_counted() {
        let f = parse_dimacs("p cnf 2 2\n1 -1 2 0\n2 0\n").unwrap();
        assert_eq!(f.clauses().len(), 1);
        assert_eq!(f.tautologies(), 1);
    }

    #[test]
    fn clauses_may_span_lines() {
        let f = parse_dimacs("c hi\np cnf 3 2\n1 2\n3 0 -1\n0\n").unwrap();
        assert_eq!(f.clauses().len(), 2);
        assert_eq!(f.clauses()[1].lits, vec![Lit::from_dimacs(-1)]);
    }

    #[test]
    fn empty_clause_kept() {
        let f = parse_dimacs("p cnf 2 2\n1 2 0\n0\n").unwrap();
        assert!(f.has_empty_clause());
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(
            parse_dimacs("p cnf x 1\n"),
            Err(ParseError::Header { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("c\np cnf 2 1\n1 3 0\n"),
            Err(ParseError::OutOfRange { line: 3, lit: 3, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2\n"),
            Err(ParseError::MissingTerminator { line: 2 })
        ));
        assert!(matches!(
            parse_dimacs("1 2 0\n"),
            Err(ParseError::MissingHeader { line: 1 })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(ParseError::ClauseCount { declared: 2, found: 1, .. })
        ));
    }

    #[test]
    fn order_file() {
        assert_eq!(parse_order("2\n3\n1\n", 3).unwrap(), vec![2, 3, 1]);
        assert!(matches!(
            parse_order("1\n1\n", 2),
            Err(ParseError::Order { line: 2, .. })
        ));
        assert!(parse_order("1\n", 2).is_err());
    }
}
