//! Hooks, resource limits and results shared by the enumerators.

use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::formula::Lit;
use crate::kernel::{KernelStats, Learned};

/// Receives events from an enumerator. Every hook defaults to a no-op.
pub trait Observer {
    /// A satisfying cube (total for non-blocking engines), internal numbering.
    fn cube(&mut self, _lits: &[Lit]) {}
    /// A learned clause, before it is added to the store.
    fn learned(&mut self, _clause: &Learned) {}
    /// A clause produced by resolution during conflict-directed backjumping.
    fn resolved(&mut self, _lits: &[Lit]) {}
    /// A blocking clause, before it is added to the store.
    fn blocking(&mut self, _lits: &[Lit]) {}
    /// A cache lookup: the cut index, its key, the values of variables
    /// `1..=cut` (index 0 unused) and whether the key was already solved.
    fn cache_lookup(&mut self, _cut: usize, _key: &[usize], _prefix: &[bool], _hit: bool) {}
}

/// Observer that ignores everything.
pub struct Silent;

impl Observer for Silent {}

/// Why a run stopped early.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Limit {
    Time,
    Memory,
}

/// Wall-clock and memory limits, checked once per search-loop iteration.
#[derive(Clone, Debug)]
pub struct Budget {
    deadline: Option<Instant>,
    mem_limit: Option<usize>,
    peak_bytes: usize,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget {
            deadline: None,
            mem_limit: None,
            peak_bytes: 0,
        }
    }

    pub fn new(time_limit: Option<Duration>, mem_limit: Option<usize>) -> Budget {
        Budget {
            deadline: time_limit.map(|d| Instant::now() + d),
            mem_limit,
            peak_bytes: 0,
        }
    }

    /// Records the current footprint and reports a limit that was crossed.
    pub fn check(&mut self, bytes: usize) -> Result<(), Limit> {
        self.peak_bytes = self.peak_bytes.max(bytes);
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(Limit::Time);
            }
        }
        match self.mem_limit {
            Some(m) if bytes > m => Err(Limit::Memory),
            _ => Ok(()),
        }
    }

    pub fn peak_bytes(&self) -> usize {
        self.peak_bytes
    }
}

/// Result of one enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// `None` if the run finished, otherwise the limit that stopped it.
    pub stopped: Option<Limit>,
    /// Models covered by everything reported so far.
    pub models: BigUint,
    /// Cubes reported (equal to `models` for non-blocking engines).
    pub cubes: u64,
    pub kernel: KernelStats,
    pub peak_bytes: usize,
}

impl Outcome {
    pub fn complete(&self) -> bool {
        self.stopped.is_none()
    }
}
