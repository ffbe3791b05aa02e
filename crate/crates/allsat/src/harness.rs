//! Running solvers on files: configurations, limits, statistics, benchmark
//! suites and differential checks.
//!
//! A solver configuration is written as a slash-separated string:
//!
//! ```text
//! blocking[/simplify][/continue]
//! nonblocking/<sublevel|dlevel>/<bt|bj|cbj|bjcbj>
//! bdd/<cutset|separator>[/<sublevel|dlevel>/<bt|bj|cbj|bjcbj>]
//! bdd-blocking/<cutset|separator>
//! oracle
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::bddcache::{
    enumerate_bdd, enumerate_bdd_blocking, BddConfig, BddError, BddOutcome, CacheMode, DumpTarget, RefreshPolicy,
};
use crate::blocking::{enumerate_blocking, BlockingConfig};
use crate::formula::{parse_dimacs, parse_order, CnfFormula, Lit, ParseError, Var};
use crate::kernel::Scheme;
use crate::nonblocking::{enumerate_nonblocking, NonBlockingConfig, Strategy};
use crate::obdd::ObddStore;
use crate::observe::{Budget, Limit, Observer, Outcome};
use crate::oracle::{self, cube_masks, mask_of, ModelSet};

/// Environment variable overriding where OBDD parts are written.
pub const DUMP_DIR_ENV: &str = "ALLSAT_DUMP_DIR";

/// Largest instance for which the suite runner adds an oracle count.
pub const SUITE_ORACLE_MAX_VARS: usize = 20;

pub const EXIT_COMPLETE: i32 = 0;
pub const EXIT_LIMIT: i32 = 10;
pub const EXIT_INPUT: i32 = 20;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("reading {path}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("instance has {0} variables, too many for the oracle")]
    TooLarge(usize),
    #[error(transparent)]
    Bdd(#[from] BddError),
    #[error("writing output")]
    Output(#[from] std::io::Error),
    #[error("writing csv")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolverConfig {
    Blocking(BlockingConfig),
    NonBlocking(NonBlockingConfig),
    Bdd { cache: CacheMode, search: NonBlockingConfig },
    BddBlocking { cache: CacheMode },
    Oracle,
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Sublevel => "sublevel",
        Scheme::DecisionLevel => "dlevel",
        Scheme::FirstUip => "firstuip",
    }
}

fn strategy_name(s: Strategy) -> &'static str {
    match s {
        Strategy::Bt => "bt",
        Strategy::Bj => "bj",
        Strategy::Cbj => "cbj",
        Strategy::BjCbj => "bjcbj",
    }
}

fn cache_name(c: CacheMode) -> &'static str {
    match c {
        CacheMode::Cutset => "cutset",
        CacheMode::Separator => "separator",
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme, HarnessError> {
    match s {
        "sublevel" => Ok(Scheme::Sublevel),
        "dlevel" => Ok(Scheme::DecisionLevel),
        _ => Err(HarnessError::Config(format!("unknown uip scheme `{s}`"))),
    }
}

pub fn parse_strategy(s: &str) -> Result<Strategy, HarnessError> {
    match s {
        "bt" => Ok(Strategy::Bt),
        "bj" => Ok(Strategy::Bj),
        "cbj" => Ok(Strategy::Cbj),
        "bjcbj" => Ok(Strategy::BjCbj),
        _ => Err(HarnessError::Config(format!("unknown backtrack method `{s}`"))),
    }
}

pub fn parse_cache(s: &str) -> Result<CacheMode, HarnessError> {
    match s {
        "cutset" => Ok(CacheMode::Cutset),
        "separator" => Ok(CacheMode::Separator),
        _ => Err(HarnessError::Config(format!("unknown cache mode `{s}`"))),
    }
}

/// Settings given as separate options, as on the command line.
#[derive(Clone, Debug, Default)]
pub struct ConfigParts {
    pub mode: String,
    pub uip: Option<String>,
    pub backtrack: Option<String>,
    pub simplify: bool,
    pub continue_search: bool,
    pub cache: Option<String>,
}

impl SolverConfig {
    /// Builds a configuration from separate options, rejecting options that
    /// do not apply to the mode.
    pub fn from_parts(p: &ConfigParts) -> Result<SolverConfig, HarnessError> {
        let reject = |what: &str, given: bool| {
            if given {
                Err(HarnessError::Config(format!("{what} does not apply to mode {}", p.mode)))
            } else {
                Ok(())
            }
        };
        let search = || -> Result<NonBlockingConfig, HarnessError> {
            Ok(NonBlockingConfig {
                scheme: p.uip.as_deref().map(parse_scheme).transpose()?.unwrap_or(Scheme::DecisionLevel),
                strategy: p.backtrack.as_deref().map(parse_strategy).transpose()?.unwrap_or(Strategy::Bt),
            })
        };
        let cache = || p.cache.as_deref().map(parse_cache).transpose().map(|c| c.unwrap_or(CacheMode::Cutset));
        match p.mode.as_str() {
            "blocking" => {
                reject("--uip", p.uip.is_some())?;
                reject("--backtrack", p.backtrack.is_some())?;
                reject("--cache", p.cache.is_some())?;
                Ok(SolverConfig::Blocking(BlockingConfig {
                    simplify: p.simplify,
                    continue_search: p.continue_search,
                    full_clauses: false,
                }))
            }
            "nonblocking" => {
                reject("--simplify", p.simplify)?;
                reject("--continue", p.continue_search)?;
                reject("--cache", p.cache.is_some())?;
                Ok(SolverConfig::NonBlocking(search()?))
            }
            "bdd" => {
                reject("--simplify", p.simplify)?;
                reject("--continue", p.continue_search)?;
                Ok(SolverConfig::Bdd {
                    cache: cache()?,
                    search: search()?,
                })
            }
            "bdd-blocking" => {
                reject("--simplify", p.simplify)?;
                reject("--continue", p.continue_search)?;
                reject("--uip", p.uip.is_some())?;
                reject("--backtrack", p.backtrack.is_some())?;
                Ok(SolverConfig::BddBlocking { cache: cache()? })
            }
            "oracle" => {
                reject("--simplify", p.simplify)?;
                reject("--continue", p.continue_search)?;
                reject("--uip", p.uip.is_some())?;
                reject("--backtrack", p.backtrack.is_some())?;
                reject("--cache", p.cache.is_some())?;
                Ok(SolverConfig::Oracle)
            }
            other => Err(HarnessError::Config(format!("unknown mode `{other}`"))),
        }
    }

    pub fn is_bdd(&self) -> bool {
        matches!(self, SolverConfig::Bdd { .. } | SolverConfig::BddBlocking { .. })
    }
}

/// The sixteen solver configurations: four blocking, eight non-blocking and
/// four with caching.
pub fn all_configs() -> Vec<SolverConfig> {
    let mut out = Vec::new();
    for simplify in [false, true] {
        for continue_search in [false, true] {
            out.push(SolverConfig::Blocking(BlockingConfig {
                simplify,
                continue_search,
                full_clauses: false,
            }));
        }
    }
    for scheme in [Scheme::Sublevel, Scheme::DecisionLevel] {
        for strategy in [Strategy::Bt, Strategy::Bj, Strategy::Cbj, Strategy::BjCbj] {
            out.push(SolverConfig::NonBlocking(NonBlockingConfig { scheme, strategy }));
        }
    }
    for cache in [CacheMode::Cutset, CacheMode::Separator] {
        out.push(SolverConfig::Bdd {
            cache,
            search: NonBlockingConfig::default(),
        });
        out.push(SolverConfig::BddBlocking { cache });
    }
    out
}

impl fmt::Display for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverConfig::Blocking(c) => {
                write!(f, "blocking")?;
                if c.simplify {
                    write!(f, "/simplify")?;
                }
                if c.continue_search {
                    write!(f, "/continue")?;
                }
                Ok(())
            }
            SolverConfig::NonBlocking(c) => {
                write!(f, "nonblocking/{}/{}", scheme_name(c.scheme), strategy_name(c.strategy))
            }
            SolverConfig::Bdd { cache, search } => {
                write!(f, "bdd/{}", cache_name(*cache))?;
                if *search != NonBlockingConfig::default() {
                    write!(f, "/{}/{}", scheme_name(search.scheme), strategy_name(search.strategy))?;
                }
                Ok(())
            }
            SolverConfig::BddBlocking { cache } => write!(f, "bdd-blocking/{}", cache_name(*cache)),
            SolverConfig::Oracle => write!(f, "oracle"),
        }
    }
}

impl FromStr for SolverConfig {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split('/').collect();
        let bad = || HarnessError::Config(format!("cannot parse configuration `{s}`"));
        let mut p = ConfigParts {
            mode: parts[0].to_string(),
            ..ConfigParts::default()
        };
        let rest = &parts[1..];
        match p.mode.as_str() {
            "blocking" => {
                for &flag in rest {
                    match flag {
                        "simplify" if !p.simplify => p.simplify = true,
                        "continue" if !p.continue_search => p.continue_search = true,
                        _ => return Err(bad()),
                    }
                }
            }
            "nonblocking" => match rest {
                [] => {}
                [uip, bt] => {
                    p.uip = Some(uip.to_string());
                    p.backtrack = Some(bt.to_string());
                }
                _ => return Err(bad()),
            },
            "bdd" => match rest {
                [cache] => p.cache = Some(cache.to_string()),
                [cache, uip, bt] => {
                    p.cache = Some(cache.to_string());
                    p.uip = Some(uip.to_string());
                    p.backtrack = Some(bt.to_string());
                }
                _ => return Err(bad()),
            },
            "bdd-blocking" => {
                let [cache] = rest else { return Err(bad()) };
                p.cache = Some(cache.to_string());
            }
            "oracle" if rest.is_empty() => {}
            _ => return Err(bad()),
        }
        SolverConfig::from_parts(&p)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum OutputKind {
    #[default]
    Count,
    Cubes,
    Obdd,
    Quiet,
}

impl FromStr for OutputKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(OutputKind::Count),
            "cubes" => Ok(OutputKind::Cubes),
            "obdd" => Ok(OutputKind::Obdd),
            "quiet" => Ok(OutputKind::Quiet),
            _ => Err(HarnessError::Config(format!("unknown output kind `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub solver: SolverConfig,
    /// Node threshold for flushing the OBDD; caching modes only.
    pub refresh_threshold: Option<usize>,
    pub order_file: Option<PathBuf>,
    pub time_limit: Option<Duration>,
    pub mem_limit: Option<usize>,
    pub output: OutputKind,
    /// Where OBDD parts go; overridden by `ALLSAT_DUMP_DIR`. Parts stay in
    /// memory when neither is set.
    pub dump_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(solver: SolverConfig) -> RunConfig {
        RunConfig {
            solver,
            refresh_threshold: None,
            order_file: None,
            time_limit: None,
            mem_limit: None,
            output: OutputKind::Quiet,
            dump_dir: None,
        }
    }
}

/// Statistics of one run. Produced for limit-exceeded runs too.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunStats {
    pub instance: String,
    pub config: String,
    pub solved: bool,
    pub stopped: Option<Limit>,
    pub solutions: BigUint,
    pub wall: Duration,
    pub peak_bytes: usize,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub obdd_nodes: usize,
    pub dumps: usize,
}

impl RunStats {
    pub fn exit_code(&self) -> i32 {
        if self.solved {
            EXIT_COMPLETE
        } else {
            EXIT_LIMIT
        }
    }
}

pub fn read_formula(path: &Path) -> Result<CnfFormula, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dimacs(&text).map_err(|source| HarnessError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string())
}

/// Reads, reorders and solves one file.
pub fn run_instance(path: &Path, cfg: &RunConfig, out: &mut dyn Write) -> Result<RunStats, HarnessError> {
    let mut f = read_formula(path)?;
    if let Some(order) = &cfg.order_file {
        let text = fs::read_to_string(order).map_err(|source| HarnessError::Read {
            path: order.clone(),
            source,
        })?;
        let perm = parse_order(&text, f.num_vars()).map_err(|source| HarnessError::Parse {
            path: order.clone(),
            source,
        })?;
        f = f
            .apply_order(&perm)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", order.display())))?;
    }
    run_formula(&f, &instance_name(path), cfg, out)
}

/// Writes cubes in original variable names, DIMACS style.
struct CubeWriter<'a> {
    f: &'a CnfFormula,
    out: &'a mut dyn Write,
    error: Option<std::io::Error>,
}

impl CubeWriter<'_> {
    fn write(&mut self, lits: &[Lit]) {
        if self.error.is_some() {
            return;
        }
        let mut line = String::new();
        for &l in lits {
            line.push_str(&self.f.external_lit(l).to_dimacs().to_string());
            line.push(' ');
        }
        line.push_str("0\n");
        if let Err(e) = self.out.write_all(line.as_bytes()) {
            self.error = Some(e);
        }
    }

    fn write_values(&mut self, values: &[bool]) {
        let lits: Vec<Lit> = (1..values.len())
            .map(|j| Lit::new(Var::new(j as u32), values[j]))
            .collect();
        self.write(&lits);
    }

    fn finish(self) -> Result<(), std::io::Error> {
        self.error.map_or(Ok(()), Err)
    }
}

impl Observer for CubeWriter<'_> {
    fn cube(&mut self, lits: &[Lit]) {
        self.write(lits);
    }
}

fn bdd_config(cfg: &RunConfig, name: &str, cache: CacheMode, search: NonBlockingConfig) -> BddConfig {
    let dir = std::env::var_os(DUMP_DIR_ENV)
        .map(PathBuf::from)
        .or_else(|| cfg.dump_dir.clone());
    let target = match dir {
        Some(dir) => DumpTarget::Dir {
            dir,
            instance: name.to_string(),
        },
        None => DumpTarget::Memory,
    };
    BddConfig {
        mode: cache,
        nonblocking: search,
        refresh: cfg.refresh_threshold.map(|threshold| RefreshPolicy { threshold, target }),
    }
}

/// Solves an already loaded formula.
pub fn run_formula(f: &CnfFormula, name: &str, cfg: &RunConfig, out: &mut dyn Write) -> Result<RunStats, HarnessError> {
    if cfg.refresh_threshold.is_some() && !cfg.solver.is_bdd() {
        return Err(HarnessError::Config("--refresh-threshold needs a caching mode".into()));
    }
    if cfg.output == OutputKind::Obdd && !cfg.solver.is_bdd() {
        return Err(HarnessError::Config("--output obdd needs a caching mode".into()));
    }
    let start = Instant::now();
    let mut budget = Budget::new(cfg.time_limit, cfg.mem_limit);
    let mut writer = CubeWriter {
        f,
        out: &mut *out,
        error: None,
    };
    let mut silent = crate::observe::Silent;
    let obs: &mut dyn Observer = if cfg.output == OutputKind::Cubes {
        &mut writer
    } else {
        &mut silent
    };
    let mut bdd: Option<BddOutcome> = None;
    let outcome = match cfg.solver {
        SolverConfig::Blocking(c) => enumerate_blocking(f, c, &mut budget, obs),
        SolverConfig::NonBlocking(c) => enumerate_nonblocking(f, c, &mut budget, obs),
        SolverConfig::Bdd { cache, search } => {
            let r = enumerate_bdd(f, &bdd_config(cfg, name, cache, search), &mut budget, obs)?;
            let o = r.outcome.clone();
            bdd = Some(r);
            o
        }
        SolverConfig::BddBlocking { cache } => {
            let r = enumerate_bdd_blocking(
                f,
                &bdd_config(cfg, name, cache, NonBlockingConfig::default()),
                &mut budget,
                obs,
            )?;
            let o = r.outcome.clone();
            bdd = Some(r);
            o
        }
        SolverConfig::Oracle => {
            if budget.check(0).is_err() {
                Outcome {
                    stopped: Some(Limit::Time),
                    models: BigUint::zero(),
                    cubes: 0,
                    kernel: Default::default(),
                    peak_bytes: 0,
                }
            } else {
                let set = oracle::enumerate_all(f).map_err(|e| HarnessError::TooLarge(e.0))?;
                if cfg.output == OutputKind::Cubes {
                    for &m in &set.models {
                        let values: Vec<bool> = (0..=f.num_vars())
                            .map(|j| j > 0 && m >> (j - 1) & 1 == 1)
                            .collect();
                        writer.write_values(&values);
                    }
                }
                Outcome {
                    stopped: None,
                    models: set.count().into(),
                    cubes: set.count() as u64,
                    kernel: Default::default(),
                    peak_bytes: 0,
                }
            }
        }
    };
    if let Some(r) = &bdd {
        match cfg.output {
            OutputKind::Cubes => {
                for store in part_stores(r)? {
                    store.for_each_path(|v| writer.write_values(v));
                }
                r.diagram.for_each_path(|v| writer.write_values(v));
            }
            OutputKind::Obdd => {
                for (k, part) in r.parts.iter().enumerate() {
                    match (&part.store, &part.path) {
                        (Some(store), _) => write!(writer.out, "c part {k}\n{}", store.dump())?,
                        (None, Some(path)) => writeln!(writer.out, "c part {k} {}", path.display())?,
                        (None, None) => {}
                    }
                }
                write!(writer.out, "{}", r.diagram.dump())?;
            }
            OutputKind::Count | OutputKind::Quiet => {}
        }
    }
    writer.finish()?;
    if cfg.output == OutputKind::Count {
        writeln!(out, "{}", outcome.models)?;
    }
    let (hits, misses, nodes, dumps) = bdd
        .as_ref()
        .map_or((0, 0, 0, 0), |r| (r.hits, r.misses, r.peak_nodes, r.parts.len()));
    Ok(RunStats {
        instance: name.to_string(),
        config: cfg.solver.to_string(),
        solved: outcome.complete(),
        stopped: outcome.stopped,
        solutions: outcome.models,
        wall: start.elapsed(),
        peak_bytes: outcome.peak_bytes,
        decisions: outcome.kernel.decisions,
        conflicts: outcome.kernel.conflicts,
        propagations: outcome.kernel.propagations,
        cache_hits: hits,
        cache_misses: misses,
        obdd_nodes: nodes,
        dumps,
    })
}

/// Every flushed diagram of a run, loading parts that went to disk.
pub fn part_stores(r: &BddOutcome) -> Result<Vec<ObddStore>, HarnessError> {
    r.parts
        .iter()
        .map(|p| match (&p.store, &p.path) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|source| HarnessError::Read {
                    path: path.clone(),
                    source,
                })?;
                ObddStore::load(&text).map_err(|e| HarnessError::Bdd(e.into()))
            }
            (None, None) => Ok(ObddStore::new(r.diagram.num_vars())),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Suites

pub const RUNS_COLUMNS: [&str; 16] = [
    "instance",
    "config",
    "solved",
    "stopped",
    "solutions",
    "wall_seconds",
    "peak_bytes",
    "decisions",
    "conflicts",
    "propagations",
    "cache_hits",
    "cache_misses",
    "obdd_nodes",
    "dumps",
    "oracle",
    "oracle_match",
];

pub const CACTUS_COLUMNS: [&str; 3] = ["config", "rank", "wall_seconds"];
pub const HISTOGRAM_COLUMNS: [&str; 3] = ["config", "solutions_bucket", "instances"];

/// One row of a suite: a run or the reason it could not be made.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub instance: String,
    pub config: String,
    pub result: Result<RunStats, String>,
    pub oracle: Option<BigUint>,
}

impl SuiteRow {
    /// False if a complete run disagrees with the oracle.
    pub fn oracle_match(&self) -> Option<bool> {
        match (&self.result, &self.oracle) {
            (Ok(s), Some(o)) if s.solved => Some(&s.solutions == o),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| r.oracle_match() == Some(false)).count()
    }
}

/// Reads a configuration list: one configuration per line, `#` comments.
pub fn parse_config_list(text: &str) -> Result<Vec<SolverConfig>, HarnessError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(SolverConfig::from_str)
        .collect()
}

/// Bucket label by powers of ten: `0`, `1e0` for 1..9, `1e1` for 10..99, ...
pub fn solutions_bucket(n: &BigUint) -> String {
    if n.is_zero() {
        "0".to_string()
    } else {
        format!("1e{}", n.to_string().len() - 1)
    }
}

/// Runs every configuration on every `.cnf` file of `dir` and writes
/// `runs.csv`, `cactus.csv` and `histogram.csv` to `out_dir`.
pub fn run_suite(
    dir: &Path,
    configs: &[SolverConfig],
    limits: &RunConfig,
    out_dir: &Path,
) -> Result<SuiteReport, HarnessError> {
    let read_dir = fs::read_dir(dir).map_err(|source| HarnessError::Read {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = read_dir
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "cnf"))
        .collect();
    files.sort();

    let mut report = SuiteReport::default();
    for path in &files {
        let name = instance_name(path);
        let formula = read_formula(path);
        let oracle = match &formula {
            Ok(f) if f.num_vars() <= SUITE_ORACLE_MAX_VARS => {
                oracle::enumerate_all(f).ok().map(|s| BigUint::from(s.count()))
            }
            _ => None,
        };
        for &solver in configs {
            let cfg = RunConfig {
                solver,
                output: OutputKind::Quiet,
                ..limits.clone()
            };
            let result = match &formula {
                Ok(f) => run_formula(f, &name, &cfg, &mut std::io::sink()).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            };
            if let Err(e) = &result {
                log::warn!("{name} with {solver}: {e}");
            }
            report.rows.push(SuiteRow {
                instance: name.clone(),
                config: solver.to_string(),
                result,
                oracle: oracle.clone(),
            });
        }
    }
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Read {
        path: out_dir.to_path_buf(),
        source,
    })?;
    write_runs(&report, &out_dir.join("runs.csv"))?;
    write_cactus(&report, configs, &out_dir.join("cactus.csv"))?;
    write_histogram(&report, configs, &out_dir.join("histogram.csv"))?;
    Ok(report)
}

fn write_runs(report: &SuiteReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUNS_COLUMNS)?;
    for row in &report.rows {
        let oracle = row.oracle.as_ref().map(|o| o.to_string()).unwrap_or_default();
        let matched = row.oracle_match().map(|m| m.to_string()).unwrap_or_default();
        match &row.result {
            Ok(s) => {
                let stopped = match s.stopped {
                    None => "",
                    Some(Limit::Time) => "time",
                    Some(Limit::Memory) => "memory",
                };
                w.write_record([
                    s.instance.clone(),
                    s.config.clone(),
                    s.solved.to_string(),
                    stopped.to_string(),
                    s.solutions.to_string(),
                    format!("{:.6}", s.wall.as_secs_f64()),
                    s.peak_bytes.to_string(),
                    s.decisions.to_string(),
                    s.conflicts.to_string(),
                    s.propagations.to_string(),
                    s.cache_hits.to_string(),
                    s.cache_misses.to_string(),
                    s.obdd_nodes.to_string(),
                    s.dumps.to_string(),
                    oracle,
                    matched,
                ])?;
            }
            Err(e) => {
                let mut rec = vec![row.instance.clone(), row.config.clone(), "false".into(), format!("error: {e}")];
                rec.resize(RUNS_COLUMNS.len() - 2, String::new());
                rec.push(oracle);
                rec.push(matched);
                w.write_record(rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_cactus(report: &SuiteReport, configs: &[SolverConfig], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CACTUS_COLUMNS)?;
    for cfg in configs {
        let name = cfg.to_string();
        let mut times: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.config == name)
            .filter_map(|r| r.result.as_ref().ok())
            .filter(|s| s.solved)
            .map(|s| s.wall.as_secs_f64())
            .collect();
        times.sort_by(f64::total_cmp);
        for (rank, t) in times.iter().enumerate() {
            w.write_record([name.clone(), (rank + 1).to_string(), format!("{t:.6}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_histogram(report: &SuiteReport, configs: &[SolverConfig], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HISTOGRAM_COLUMNS)?;
    for cfg in configs {
        let name = cfg.to_string();
        // unsolved runs count by the solutions they found
        let mut buckets: BTreeMap<(usize, String), usize> = BTreeMap::new();
        for s in report.rows.iter().filter(|r| r.config == name).filter_map(|r| r.result.as_ref().ok()) {
            let digits = if s.solutions.is_zero() { 0 } else { s.solutions.to_string().len() };
            *buckets.entry((digits, solutions_bucket(&s.solutions))).or_insert(0) += 1;
        }
        for ((_, label), count) in buckets {
            w.write_record([name.clone(), label, count.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Differential checks

/// What one solver produced, as sets of total assignments where possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collected {
    pub count: BigUint,
    /// Total assignments covered, as oracle masks; `None` for instances too
    /// large to expand.
    pub models: Option<Vec<u32>>,
    /// Assignments produced twice (non-blocking) or covered by two cubes
    /// (blocking), or present in two OBDD parts.
    pub duplicates: usize,
}

struct CubeCollector(Vec<Vec<Lit>>);

impl Observer for CubeCollector {
    fn cube(&mut self, lits: &[Lit]) {
        self.0.push(lits.to_vec());
    }
}

fn expand(cubes: &[(u32, u32)], n: usize) -> (Vec<u32>, usize) {
    let mut all = Vec::new();
    for &(care, val) in cubes {
        let free: Vec<u32> = (0..n as u32).filter(|b| care >> b & 1 == 0).collect();
        for s in 0..1u64 << free.len() {
            let mut a = val;
            for (k, &b) in free.iter().enumerate() {
                if s >> k & 1 == 1 {
                    a |= 1 << b;
                }
            }
            all.push(a);
        }
    }
    let len = all.len();
    all.sort_unstable();
    all.dedup();
    let dups = len - all.len();
    (all, dups)
}

/// Runs `solver` without limits and collects what it produced.
pub fn collect(f: &CnfFormula, solver: SolverConfig) -> Result<Collected, HarnessError> {
    let n = f.num_vars();
    let small = n <= oracle::MAX_VARS;
    let mut budget = Budget::unlimited();
    let mut cubes = CubeCollector(Vec::new());
    let finish = |count: BigUint, masks: Vec<(u32, u32)>| {
        if small {
            let (models, duplicates) = expand(&masks, n);
            Collected {
                count,
                models: Some(models),
                duplicates,
            }
        } else {
            Collected {
                count,
                models: None,
                duplicates: 0,
            }
        }
    };
    match solver {
        SolverConfig::Blocking(c) => {
            let out = enumerate_blocking(f, c, &mut budget, &mut cubes);
            Ok(finish(out.models, cubes.0.iter().map(|c| cube_masks(c)).collect()))
        }
        SolverConfig::NonBlocking(c) => {
            let out = enumerate_nonblocking(f, c, &mut budget, &mut cubes);
            Ok(finish(out.models, cubes.0.iter().map(|c| cube_masks(c)).collect()))
        }
        SolverConfig::Bdd { .. } | SolverConfig::BddBlocking { .. } => {
            let cfg = BddConfig {
                mode: match solver {
                    SolverConfig::Bdd { cache, .. } | SolverConfig::BddBlocking { cache } => cache,
                    _ => unreachable!(),
                },
                nonblocking: match solver {
                    SolverConfig::Bdd { search, .. } => search,
                    _ => NonBlockingConfig::default(),
                },
                refresh: None,
            };
            let r = match solver {
                SolverConfig::Bdd { .. } => enumerate_bdd(f, &cfg, &mut budget, &mut cubes)?,
                _ => enumerate_bdd_blocking(f, &cfg, &mut budget, &mut cubes)?,
            };
            let mut masks = Vec::new();
            if small {
                let full = ((1u64 << n) - 1) as u32;
                r.diagram.for_each_path(|v| masks.push((full, mask_of(v))));
            }
            Ok(finish(r.outcome.models, masks))
        }
        SolverConfig::Oracle => {
            let set: ModelSet = oracle::enumerate_all(f).map_err(|e| HarnessError::TooLarge(e.0))?;
            Ok(Collected {
                count: set.count().into(),
                models: Some(set.models),
                duplicates: 0,
            })
        }
    }
}

/// A named solver for differential checks.
pub type Runner<'a> = &'a dyn Fn(&CnfFormula) -> Result<Collected, HarnessError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub names: [String; 2],
    pub results: [Collected; 2],
    pub oracle: Option<Collected>,
    pub problems: Vec<String>,
    /// Smallest clause subset found that still shows a problem.
    pub counterexample: Option<CnfFormula>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

fn problems(names: &[String; 2], results: &[Collected; 2], oracle: Option<&Collected>) -> Vec<String> {
    let mut out = Vec::new();
    for (name, r) in names.iter().zip(results) {
        if r.duplicates > 0 {
            out.push(format!("{name}: {} assignments produced more than once", r.duplicates));
        }
        if let Some(o) = oracle {
            if r.count != o.count {
                out.push(format!("{name}: count {} but oracle says {}", r.count, o.count));
            } else if let (Some(m), Some(om)) = (&r.models, &o.models) {
                if m != om {
                    out.push(format!("{name}: model set differs from the oracle"));
                }
            }
        }
    }
    if results[0].count != results[1].count {
        out.push(format!(
            "{} counts {} but {} counts {}",
            names[0], results[0].count, names[1], results[1].count
        ));
    }
    out
}

fn check(f: &CnfFormula, runners: [(&str, Runner<'_>); 2]) -> Result<(VerifyReport, bool), HarnessError> {
    let names = [runners[0].0.to_string(), runners[1].0.to_string()];
    let results = [(runners[0].1)(f)?, (runners[1].1)(f)?];
    let oracle = if f.num_vars() <= oracle::MAX_VARS {
        Some(collect(f, SolverConfig::Oracle)?)
    } else {
        None
    };
    let problems = problems(&names, &results, oracle.as_ref());
    let bad = !problems.is_empty();
    Ok((
        VerifyReport {
            names,
            results,
            oracle,
            problems,
            counterexample: None,
        },
        bad,
    ))
}

fn subformula(f: &CnfFormula, keep: &[usize]) -> CnfFormula {
    let mut g = CnfFormula::new(f.num_vars());
    for &i in keep {
        let lits: Vec<i64> = f.clauses()[i].lits.iter().map(|l| l.to_dimacs()).collect();
        g.add_clause(&lits).expect("clause of a valid formula");
    }
    g
}

/// Removes clauses one chunk at a time while the problem persists.
fn minimize(f: &CnfFormula, runners: [(&str, Runner<'_>); 2]) -> CnfFormula {
    let mut keep: Vec<usize> = (0..f.clauses().len()).collect();
    let mut chunk = keep.len().div_ceil(2).max(1);
    loop {
        let mut shrunk = false;
        let mut start = 0;
        while start < keep.len() {
            let end = (start + chunk).min(keep.len());
            let trial: Vec<usize> = keep[..start].iter().chain(&keep[end..]).copied().collect();
            let failing = matches!(check(&subformula(f, &trial), runners), Ok((_, true)));
            if failing {
                keep = trial;
                shrunk = true;
            } else {
                start = end;
            }
        }
        if chunk == 1 && !shrunk {
            break;
        }
        if !shrunk {
            chunk = chunk.div_ceil(2);
        }
    }
    subformula(f, &keep)
}

/// Runs two solvers and the oracle and compares them. On a mismatch the
/// formula is reduced to a smaller one that still shows it.
pub fn verify_with(f: &CnfFormula, runners: [(&str, Runner<'_>); 2]) -> Result<VerifyReport, HarnessError> {
    let (mut report, bad) = check(f, runners)?;
    if bad {
        report.counterexample = Some(minimize(f, runners));
    }
    Ok(report)
}

pub fn verify(f: &CnfFormula, a: SolverConfig, b: SolverConfig) -> Result<VerifyReport, HarnessError> {
    let (na, nb) = (a.to_string(), b.to_string());
    let ra = move |g: &CnfFormula| collect(g, a);
    let rb = move |g: &CnfFormula| collect(g, b);
    verify_with(f, [(&na, &ra), (&nb, &rb)])
}

/// Models that appear in more than one of the given diagrams.
pub fn shared_paths(stores: &[ObddStore]) -> usize {
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut shared = 0;
    for s in stores {
        s.for_each_path(|v| {
            if !seen.insert(v.to_vec()) {
                shared += 1;
            }
        });
    }
    shared
}
