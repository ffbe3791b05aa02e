mod common;

use allsat::harness::{collect, verify, verify_with, Collected, HarnessError, SolverConfig};
use allsat::formula::CnfFormula;

/// Drops the smallest model whenever there is more than one.
fn lossy(f: &CnfFormula) -> Result<Collected, HarnessError> {
    let mut c = collect(f, SolverConfig::Oracle)?;
    if let Some(models) = &mut c.models {
        if models.len() > 1 {
            models.remove(0);
            c.count -= 1u32;
        }
    }
    Ok(c)
}

fn honest(f: &CnfFormula) -> Result<Collected, HarnessError> {
    collect(f, "nonblocking/sublevel/bjcbj".parse().unwrap())
}

#[test]
fn faulty_solver_is_caught_and_reduced() {
    let f = common::six_vars();
    let report = verify_with(&f, [("honest", &honest), ("lossy", &lossy)]).unwrap();
    assert!(!report.ok());
    assert!(!report.problems.is_empty());
    let cx = report.counterexample.expect("counterexample");
    assert!(cx.clauses().len() < f.clauses().len());
    // the reduced formula still shows the fault
    let again = verify_with(&cx, [("honest", &honest), ("lossy", &lossy)]).unwrap();
    assert!(!again.ok());
}

#[test]
fn engines_agree_under_verify() {
    for f in [common::six_vars(), common::cycle()] {
        for (a, b) in [("bdd/cutset", "bdd/separator"), ("blocking", "nonblocking/dlevel/cbj")] {
            let report = verify(&f, a.parse().unwrap(), b.parse().unwrap()).unwrap();
            assert!(report.ok(), "{a} vs {b}: {:?}", report.problems);
            assert!(report.counterexample.is_none());
        }
    }
}
