use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use allsat::formula::render_dimacs;
use allsat::harness::{
    self, all_configs, parse_config_list, read_formula, run_instance, ConfigParts, HarnessError, OutputKind,
    RunConfig, SolverConfig, EXIT_COMPLETE, EXIT_INPUT,
};

/// Exit status when `verify` or `bench` finds a disagreement.
const EXIT_MISMATCH: u8 = 1;

#[derive(Parser)]
#[command(name = "allsat", version, about = "Enumerate all solutions of a CNF formula")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one DIMACS file.
    Solve(SolveArgs),
    /// Run configurations over a directory of `.cnf` files and write CSVs.
    Bench(BenchArgs),
    /// Compare two configurations and the brute-force oracle on one file.
    Verify(VerifyArgs),
    /// Brute-force model count (at most 25 variables).
    #[command(hide = true)]
    Oracle {
        file: PathBuf,
        /// Print every model instead of the count.
        #[arg(long)]
        models: bool,
    },
}

#[derive(Args)]
struct Limits {
    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "S")]
    time_limit: Option<f64>,
    /// Memory limit in bytes, by the solver's own accounting.
    #[arg(long, value_name = "BYTES")]
    mem_limit: Option<usize>,
}

impl Limits {
    fn time(&self) -> anyhow::Result<Option<Duration>> {
        self.time_limit
            .map(|s| Duration::try_from_secs_f64(s).context("--time-limit must be a non-negative number"))
            .transpose()
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// blocking, nonblocking, bdd, bdd-blocking or oracle.
    #[arg(long, default_value = "nonblocking")]
    mode: String,
    /// First-UIP scheme for non-blocking search: sublevel or dlevel.
    #[arg(long)]
    uip: Option<String>,
    /// Conflict handling for non-blocking search: bt, bj, cbj or bjcbj.
    #[arg(long)]
    backtrack: Option<String>,
    /// Shorten blocking clauses.
    #[arg(long)]
    simplify: bool,
    /// Replay the previous decisions after each blocking restart.
    #[arg(long = "continue")]
    continue_search: bool,
    /// Cache key for caching modes: cutset or separator.
    #[arg(long)]
    cache: Option<String>,
    /// Flush the OBDD once it reaches this many nodes plus the variable count.
    #[arg(long, value_name = "N")]
    refresh_threshold: Option<usize>,
    /// Variable order file: line k names the variable placed at position k.
    #[arg(long, value_name = "FILE")]
    order: Option<PathBuf>,
    /// Directory for flushed OBDD parts (ALLSAT_DUMP_DIR takes precedence).
    #[arg(long, value_name = "DIR")]
    dump_dir: Option<PathBuf>,
    #[command(flatten)]
    limits: Limits,
    /// count, cubes, obdd or quiet.
    #[arg(long, default_value = "count")]
    output: String,
    /// Print run statistics to stderr.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// File with one configuration per line; all sixteen when omitted.
    #[arg(long, value_name = "FILE")]
    configs: Option<PathBuf>,
    /// Output directory for runs.csv, cactus.csv and histogram.csv.
    #[arg(long, value_name = "DIR", default_value = "bench-out")]
    out: PathBuf,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    #[arg(long = "a", value_name = "CFG")]
    a: String,
    #[arg(long = "b", value_name = "CFG")]
    b: String,
    /// Where to save the reduced formula on a mismatch.
    #[arg(long, value_name = "FILE")]
    save: Option<PathBuf>,
}

fn solve(args: SolveArgs) -> anyhow::Result<u8> {
    let solver = SolverConfig::from_parts(&ConfigParts {
        mode: args.mode.clone(),
        uip: args.uip.clone(),
        backtrack: args.backtrack.clone(),
        simplify: args.simplify,
        continue_search: args.continue_search,
        cache: args.cache.clone(),
    })?;
    let cfg = RunConfig {
        solver,
        refresh_threshold: args.refresh_threshold,
        order_file: args.order.clone(),
        time_limit: args.limits.time()?,
        mem_limit: args.limits.mem_limit,
        output: args.output.parse::<OutputKind>()?,
        dump_dir: args.dump_dir.clone(),
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let stats = run_instance(&args.file, &cfg, &mut out)?;
    out.flush()?;
    if let Some(limit) = stats.stopped {
        eprintln!("limit exceeded ({limit:?}) after {} solutions", stats.solutions);
    }
    if args.stats {
        eprintln!(
            "config {} solved {} solutions {} time {:.3}s peak_bytes {} decisions {} conflicts {} propagations {} hits {} misses {} nodes {} dumps {}",
            stats.config,
            stats.solved,
            stats.solutions,
            stats.wall.as_secs_f64(),
            stats.peak_bytes,
            stats.decisions,
            stats.conflicts,
            stats.propagations,
            stats.cache_hits,
            stats.cache_misses,
            stats.obdd_nodes,
            stats.dumps
        );
    }
    Ok(stats.exit_code() as u8)
}

fn bench(args: BenchArgs) -> anyhow::Result<u8> {
    let configs = match &args.configs {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config_list(&text)?
        }
        None => all_configs(),
    };
    let mut limits = RunConfig::new(SolverConfig::Oracle);
    limits.time_limit = args.limits.time()?;
    limits.mem_limit = args.limits.mem_limit;
    let report = harness::run_suite(&args.dir, &configs, &limits, &args.out)?;
    let mismatches = report.mismatches();
    println!(
        "{} runs written to {}; {} disagree with the oracle",
        report.rows.len(),
        args.out.display(),
        mismatches
    );
    Ok(if mismatches > 0 { EXIT_MISMATCH } else { EXIT_COMPLETE as u8 })
}

fn verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let a: SolverConfig = args.a.parse()?;
    let b: SolverConfig = args.b.parse()?;
    let f = read_formula(&args.file)?;
    let report = harness::verify(&f, a, b)?;
    for (name, r) in report.names.iter().zip(&report.results) {
        println!("{name}: {}", r.count);
    }
    if let Some(o) = &report.oracle {
        println!("oracle: {}", o.count);
    }
    if report.ok() {
        println!("agree");
        return Ok(EXIT_COMPLETE as u8);
    }
    for p in &report.problems {
        println!("mismatch: {p}");
    }
    if let Some(cx) = &report.counterexample {
        let path = args.save.unwrap_or_else(|| {
            let stem = args.file.file_stem().map(|s| s.to_string_lossy().into_owned());
            PathBuf::from(format!("{}.counterexample.cnf", stem.as_deref().unwrap_or("instance")))
        });
        std::fs::write(&path, render_dimacs(cx)).with_context(|| format!("writing {}", path.display()))?;
        println!("counterexample with {} clauses saved to {}", cx.clauses().len(), path.display());
    }
    Ok(EXIT_MISMATCH)
}

fn oracle(file: PathBuf, models: bool) -> anyhow::Result<u8> {
    let f = read_formula(&file)?;
    let set = allsat::oracle::enumerate_all(&f).map_err(|e| HarnessError::TooLarge(e.0))?;
    if models {
        let stdout = io::stdout();
        let mut out = io::BufWriter::new(stdout.lock());
        for m in &set.models {
            for v in 1..=f.num_vars() {
                let lit = if m >> (v - 1) & 1 == 1 { v as i64 } else { -(v as i64) };
                write!(out, "{lit} ")?;
            }
            writeln!(out, "0")?;
        }
    } else {
        println!("{}", set.count());
    }
    Ok(EXIT_COMPLETE as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
        Command::Oracle { file, models } => oracle(file, models),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
