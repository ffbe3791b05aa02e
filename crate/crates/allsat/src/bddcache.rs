//! Compilation of all solutions into an OBDD with formula caching.
//!
//! Variables are decided in index order. Whenever `x_1..x_{i-1}` are assigned
//! and `x_i` is not, the residual formula over `x_i..x_n` is summarised by a
//! key: the set of cutset clauses already satisfied by the prefix, or the
//! separator variables set to 1. Equal keys mean equal residual formulas, so
//! once a residual formula is solved its OBDD node is reused: the current
//! prefix is joined to that node and the search backtracks.
//!
//! A key becomes solved when the search backtracks past the decision made
//! right after it was computed, provided the last added path still runs
//! through the prefix. The OBDD can be flushed to disk (or kept in memory)
//! when it grows past a threshold, after which caching starts afresh.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use num_bigint::BigUint;

use crate::formula::{compute_cuts, CnfFormula, CutStructure, Lit, Origin, Var};
use crate::kernel::{Heuristic, Kernel, Scheme};
use crate::nonblocking::{NonBlocking, NonBlockingConfig, Resolution};
use crate::obdd::{NodeId, ObddError, ObddStore, TOP};
use crate::observe::{Budget, Observer, Outcome};
use crate::trail::Value;

/// How residual formulas are keyed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CacheMode {
    /// Satisfied clauses of the cutset. Suits formulas of small cutwidth.
    Cutset,
    /// Separator variables assigned 1. Suits formulas with many clauses.
    Separator,
}

/// Where flushed diagrams go.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DumpTarget {
    Memory,
    /// Files `<instance>.part<k>.obdd` plus `<instance>.manifest`.
    Dir { dir: PathBuf, instance: String },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RefreshPolicy {
    /// Flush once the diagram has at least `threshold - n` nodes.
    pub threshold: usize,
    pub target: DumpTarget,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BddConfig {
    pub mode: CacheMode,
    pub nonblocking: NonBlockingConfig,
    pub refresh: Option<RefreshPolicy>,
}

impl Default for BddConfig {
    fn default() -> Self {
        BddConfig {
            mode: CacheMode::Cutset,
            nonblocking: NonBlockingConfig::default(),
            refresh: None,
        }
    }
}

/// A flushed diagram.
#[derive(Clone, Debug)]
pub struct Part {
    pub count: BigUint,
    pub path: Option<PathBuf>,
    pub store: Option<ObddStore>,
}

#[derive(Debug)]
pub struct BddOutcome {
    /// `models` sums the final diagram and every part; `cubes` counts added
    /// paths.
    pub outcome: Outcome,
    pub diagram: ObddStore,
    pub parts: Vec<Part>,
    pub hits: u64,
    pub misses: u64,
    /// Largest diagram size reached.
    pub peak_nodes: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BddError {
    #[error(transparent)]
    Obdd(#[from] ObddError),
    #[error("writing {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Cut index used for the key of a complete assignment.
pub const COMPLETE: usize = usize::MAX;

/// Key of the residual formula after `x_1..x_cut`. Reads only variables up
/// to `cut`, which must all be assigned.
pub fn make_key(f: &CnfFormula, cuts: &CutStructure, mode: CacheMode, k: &Kernel, cut: usize) -> Vec<usize> {
    let t = k.trail();
    if cut == COMPLETE {
        return Vec::new();
    }
    match mode {
        CacheMode::Cutset => cuts.cutsets[cut]
            .iter()
            .copied()
            .filter(|&id| {
                f.clauses()[id].lits.iter().any(|&l| {
                    l.var().index() <= cut && t.lit_value(l) == Value::True
                })
            })
            .collect(),
        CacheMode::Separator => cuts.separators[cut]
            .iter()
            .copied()
            .filter(|&v| {
                debug_assert!(t.is_assigned(Var::new(v as u32)));
                t.var_value(Var::new(v as u32)) == Value::True
            })
            .collect(),
    }
}

struct Cache<'a> {
    f: &'a CnfFormula,
    cuts: CutStructure,
    mode: CacheMode,
    refresh: Option<RefreshPolicy>,
    diagram: ObddStore,
    solved: HashMap<(usize, Vec<usize>), NodeId>,
    /// Key computed at each cut before its variable was decided.
    pending: Vec<Option<Vec<usize>>>,
    path: Vec<(NodeId, bool)>,
    parts: Vec<Part>,
    hits: u64,
    misses: u64,
    paths: u64,
    peak_nodes: usize,
}

impl<'a> Cache<'a> {
    fn new(f: &'a CnfFormula, mode: CacheMode, refresh: Option<RefreshPolicy>) -> Cache<'a> {
        let n = f.num_vars();
        let mut c = Cache {
            f,
            cuts: compute_cuts(f),
            mode,
            refresh,
            diagram: ObddStore::new(n),
            solved: HashMap::new(),
            pending: vec![None; n + 1],
            path: Vec::new(),
            parts: Vec::new(),
            hits: 0,
            misses: 0,
            paths: 0,
            peak_nodes: 0,
        };
        c.solved.insert((COMPLETE, Vec::new()), TOP);
        c
    }

    fn approx_bytes(&self) -> usize {
        let keys: usize = self.solved.keys().map(|(_, code)| code.len() * 8 + 64).sum();
        self.diagram.approx_bytes() + keys
    }

    /// Looks up the residual formula at the current state. Returns the
    /// solved node, or records the key as pending at `cut`.
    fn lookup(&mut self, k: &mut Kernel, obs: &mut dyn Observer) -> (usize, Option<NodeId>) {
        let cut = match k.first_unassigned() {
            Some(v) => v.index() - 1,
            None => COMPLETE,
        };
        let key = make_key(self.f, &self.cuts, self.mode, k, cut);
        let hit = self.solved.get(&(cut, key.clone())).copied();
        if cut != COMPLETE {
            obs.cache_lookup(cut, &key, &prefix_values(k, cut), hit.is_some());
        }
        match hit {
            Some(_) => self.hits += 1,
            None => {
                self.misses += 1;
                self.pending[cut] = Some(key);
            }
        }
        (cut, hit)
    }

    fn extend(&mut self, k: &Kernel, cut: usize, node: NodeId) -> Result<(), ObddError> {
        let m = if cut == COMPLETE { k.num_vars() } else { cut };
        self.path = self.diagram.extend(node, &prefix_values(k, m))?;
        self.paths += 1;
        self.peak_nodes = self.peak_nodes.max(self.diagram.size());
        Ok(())
    }

    /// Enrolls nodes of the last path whose pending key is about to lose its
    /// decision: the search is returning to level `bl`.
    fn associate(&mut self, k: &Kernel, bl: u32) {
        let t = k.trail();
        for (idx, &(node, bit)) in self.path.iter().enumerate() {
            let j = idx + 1;
            let var = Var::new(j as u32);
            if !t.is_assigned(var) {
                break;
            }
            if t.var_level(var) > bl {
                if let Some(code) = &self.pending[j - 1] {
                    self.solved.insert((j - 1, code.clone()), node);
                }
            }
            if (t.var_value(var) == Value::True) != bit {
                break;
            }
        }
    }

    /// Drops pending keys whose decision is cancelled by returning to `bl`.
    fn prune(&mut self, k: &Kernel, bl: u32) {
        let t = k.trail();
        for (cut, slot) in self.pending.iter_mut().enumerate().take(k.num_vars()) {
            let var = Var::new(cut as u32 + 1);
            if slot.is_some() && (!t.is_assigned(var) || t.var_level(var) > bl) {
                *slot = None;
            }
        }
    }

    fn maybe_refresh(&mut self) -> Result<(), BddError> {
        let Some(policy) = &self.refresh else {
            return Ok(());
        };
        let n = self.f.num_vars();
        if self.diagram.size() < policy.threshold.saturating_sub(n) {
            return Ok(());
        }
        let count = self.diagram.count();
        let k = self.parts.len();
        let part = match &policy.target {
            DumpTarget::Memory => Part {
                count,
                path: None,
                store: Some(self.diagram.clone()),
            },
            DumpTarget::Dir { dir, instance } => {
                let path = dir.join(format!("{instance}.part{k}.obdd"));
                let io = |source| BddError::Io {
                    path: path.clone(),
                    source,
                };
                fs::create_dir_all(dir).map_err(io)?;
                fs::write(&path, self.diagram.dump()).map_err(io)?;
                let manifest = dir.join(format!("{instance}.manifest"));
                let mut m = fs::OpenOptions::new()
                    .create(true)
                    .append(k > 0)
                    .write(true)
                    .truncate(k == 0)
                    .open(&manifest)
                    .map_err(|source| BddError::Io {
                        path: manifest.clone(),
                        source,
                    })?;
                writeln!(m, "{}.part{k}.obdd {count}", instance).map_err(|source| BddError::Io {
                    path: manifest.clone(),
                    source,
                })?;
                log::info!("flushed part {k} ({} nodes) to {}", self.diagram.size(), path.display());
                Part {
                    count,
                    path: Some(path),
                    store: None,
                }
            }
        };
        self.parts.push(part);
        self.diagram.reset();
        self.solved.clear();
        self.solved.insert((COMPLETE, Vec::new()), TOP);
        self.pending.iter_mut().for_each(|p| *p = None);
        self.path.clear();
        Ok(())
    }

    fn finish(self, stopped: Option<crate::observe::Limit>, k: &Kernel, budget: &Budget) -> BddOutcome {
        let mut models = self.diagram.count();
        for p in &self.parts {
            models += &p.count;
        }
        BddOutcome {
            outcome: Outcome {
                stopped,
                models,
                cubes: self.paths,
                kernel: k.stats,
                peak_bytes: budget.peak_bytes(),
            },
            diagram: self.diagram,
            parts: self.parts,
            hits: self.hits,
            misses: self.misses,
            peak_nodes: self.peak_nodes,
        }
    }
}

/// Values of `x_1..x_m` (index 0 unused); all must be assigned.
fn prefix_values(k: &Kernel, m: usize) -> Vec<bool> {
    let t = k.trail();
    let mut v = vec![false; m + 1];
    for (j, slot) in v.iter_mut().enumerate().skip(1) {
        *slot = t.var_value(Var::new(j as u32)) == Value::True;
    }
    v
}

/// Non-blocking search with caching.
pub fn enumerate_bdd(
    f: &CnfFormula,
    cfg: &BddConfig,
    budget: &mut Budget,
    obs: &mut dyn Observer,
) -> Result<BddOutcome, BddError> {
    let mut s = NonBlocking::new(f, cfg.nonblocking, Heuristic::IndexOrder);
    let mut cache = Cache::new(f, cfg.mode, cfg.refresh.clone());
    let mut stopped = None;

    loop {
        debug_assert!(s.lim <= s.kernel.level());
        if let Err(limit) = budget.check(s.kernel.approx_bytes() + cache.approx_bytes()) {
            stopped = Some(limit);
            break;
        }
        if let Some(conflict) = s.kernel.propagate() {
            if s.kernel.level() == 0 {
                break;
            }
            let mut enroll = |k: &Kernel, bl: u32| {
                cache.associate(k, bl);
                cache.prune(k, bl);
            };
            if s.resolve(conflict, obs, &mut enroll) == Resolution::Halt {
                break;
            }
            continue;
        }
        let (cut, hit) = cache.lookup(&mut s.kernel, obs);
        match hit {
            Some(node) => {
                cache.extend(&s.kernel, cut, node)?;
                if s.kernel.level() == 0 {
                    break;
                }
                s.after_solution(&mut |k: &Kernel, bl: u32| {
                    cache.associate(k, bl);
                    cache.prune(k, bl);
                });
                cache.maybe_refresh()?;
            }
            None => {
                let var = Var::new(cut as u32 + 1);
                s.kernel.decide(var.neg());
            }
        }
    }
    Ok(cache.finish(stopped, &s.kernel, budget))
}

/// Blocking-clause search with caching.
///
/// A cache hit is handled like a solution: the path is added, the decisions
/// are blocked and the search restarts from level 0. Before restarting, the
/// prefixes along the new path are tested by unit propagation; a node is
/// enrolled once its prefix is refuted, since every solution below it is
/// then in the diagram.
pub fn enumerate_bdd_blocking(
    f: &CnfFormula,
    cfg: &BddConfig,
    budget: &mut Budget,
    obs: &mut dyn Observer,
) -> Result<BddOutcome, BddError> {
    let mut k = Kernel::new(f, Heuristic::IndexOrder);
    let mut cache = Cache::new(f, cfg.mode, cfg.refresh.clone());
    let mut stopped = None;

    loop {
        if let Err(limit) = budget.check(k.approx_bytes() + cache.approx_bytes()) {
            stopped = Some(limit);
            break;
        }
        if let Some(conflict) = k.propagate() {
            if k.level() == 0 {
                break;
            }
            let learned = k.analyze(conflict, Scheme::FirstUip);
            obs.learned(&learned);
            let bl = learned.backjump;
            cache.prune(&k, bl);
            k.add_clause(learned.lits, Origin::Learned, false);
            k.cancel_to(bl);
            continue;
        }
        let (cut, hit) = cache.lookup(&mut k, obs);
        let Some(node) = hit else {
            k.decide(Var::new(cut as u32 + 1).neg());
            continue;
        };
        cache.extend(&k, cut, node)?;
        if k.level() == 0 {
            break;
        }
        let clause: Vec<Lit> = k.trail().decisions().map(|d| !d).collect();
        obs.blocking(&clause);
        let prefix = prefix_values(&k, cut.min(k.num_vars()));
        k.add_clause(clause, Origin::Blocking, false);
        k.cancel_to(0);
        let Some(refuted_from) = refuted_prefix(&mut k, &prefix) else {
            break;
        };
        for (idx, &(node, _)) in cache.path.iter().enumerate() {
            let j = idx + 1;
            if j - 1 >= refuted_from {
                if let Some(code) = &cache.pending[j - 1] {
                    cache.solved.insert((j - 1, code.clone()), node);
                }
            }
        }
        cache.pending.iter_mut().for_each(|p| *p = None);
        cache.maybe_refresh()?;
    }
    Ok(cache.finish(stopped, &k, budget))
}

/// Shortest length `m` such that unit propagation refutes `x_1..x_m` taken
/// from `prefix`; `usize::MAX` if none is refuted, `None` if the clauses
/// are refuted at level 0. Leaves the kernel at level 0.
fn refuted_prefix(k: &mut Kernel, prefix: &[bool]) -> Option<usize> {
    if k.propagate().is_some() {
        return None;
    }
    let mut result = usize::MAX;
    for (j, &value) in prefix.iter().enumerate().skip(1) {
        let lit = Lit::new(Var::new(j as u32), value);
        match k.trail().lit_value(lit) {
            Value::True => continue,
            Value::False => {
                result = j;
                break;
            }
            Value::Unassigned => {
                k.decide(lit);
                if k.propagate().is_some() {
                    result = j;
                    break;
                }
            }
        }
    }
    k.cancel_to(0);
    Some(result)
}
