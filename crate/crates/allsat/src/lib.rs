//! Enumeration of all satisfying assignments of CNF formulas.
//!
//! Three families of enumerators share one CDCL kernel:
//!
//! * [`blocking`] records a blocking clause after every solution;
//! * [`nonblocking`] walks the search space without blocking clauses, using
//!   chronological backtracking and several conflict-resolution strategies;
//! * [`bddcache`] compiles the solutions into an ordered BDD while caching
//!   subformulas by their cutset or separator.
//!
//! [`oracle`] is a brute-force reference used by tests and `verify`.

pub mod bddcache;
pub mod blocking;
pub mod formula;
pub mod harness;
pub mod kernel;
pub mod nonblocking;
pub mod obdd;
pub mod observe;
pub mod oracle;
pub mod trail;
