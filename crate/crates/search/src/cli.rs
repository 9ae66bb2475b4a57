//! Command-line driver.
//!
//! Exit status: 0 completed, 1 usage or configuration error, 2 resource or
//! I/O failure, 3 verification failure or internal inconsistency.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use sortbound_core::canonical::canonical_with_hash;
use sortbound_core::efficiency::Bandwidth;
use sortbound_core::oracle::minimax_sortable;
use sortbound_core::Poset;

use crate::advice::Advice;
use crate::backward::BackwardSearch;
use crate::config::{table_defaults, LayerBandwidth, Mode, ParentOrder, SearchConfig, DEFAULT_CHUNK_LIMIT};
use crate::error::SearchError;
use crate::forward::ForwardSearch;
use crate::known::verify_known;
use crate::stats::SearchStats;
use crate::store::Status;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sortbound",
    version,
    about = "Decide whether n elements can be sorted with C comparisons by exhaustive poset search"
)]
pub struct Args {
    /// Number of elements.
    #[arg(long, required_unless_present = "verify_known")]
    pub n: Option<usize>,
    /// Comparison budget C; defaults to ceil(log2 n!).
    #[arg(long)]
    pub budget: Option<usize>,
    /// forward, backward or bidirectional (default)
    #[arg(long, value_parser = clap::value_parser!(Mode))]
    pub mode: Option<Mode>,
    /// Number of top levels the backward search stores completely.
    #[arg(long)]
    pub full_layers: Option<usize>,
    /// E_thr - E_tot as a fraction (5/100) or decimal (0.05).
    #[arg(long)]
    pub bandwidth: Option<Bandwidth>,
    /// Bandwidth for a range of levels, e.g. 36-40=23/100. Repeatable.
    #[arg(long = "layer-bandwidth")]
    pub layer_bandwidth: Vec<LayerBandwidth>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Children queued per forward chunk before they are evaluated
    #[arg(long, default_value_t = DEFAULT_CHUNK_LIMIT)]
    pub chunk_limit: usize,
    /// Resident posets per forward level, and in total for the backward
    /// search.
    #[arg(long)]
    pub store_cap: Option<usize>,
    /// Directory for finished backward levels.
    #[arg(long, env = "SORTBOUND_SPILL_DIR")]
    pub spill_dir: Option<PathBuf>,
    /// Per-level counts as CSV.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
    /// Write the backward levels to this directory.
    #[arg(long)]
    pub advice_out: Option<PathBuf>,
    /// Read the backward levels from this directory instead of computing them.
    #[arg(long)]
    pub advice_in: Option<PathBuf>,
    /// Recompute S(1..=7) by forward search and by the game-tree oracle.
    #[arg(long)]
    pub verify_known: bool,
    /// Check the verdict against the game-tree oracle (n <= 8).
    #[arg(long)]
    pub oracle_check: bool,
    /// Consider every comparison, including pair creations that could be
    /// postponed.
    #[arg(long)]
    pub no_pair_heuristic: bool,
    /// Expand each layer's posets by ascending or descending number of
    /// linear extensions.
    #[arg(long, value_parser = clap::value_parser!(ParentOrder))]
    pub parent_order: Option<ParentOrder>,
}

fn exit_code(e: &SearchError) -> i32 {
    match e {
        SearchError::Core(_) | SearchError::Config(_) | SearchError::Format { .. } => EXIT_USAGE,
        SearchError::Io { .. } | SearchError::Resource(_) => EXIT_RESOURCE,
        SearchError::Inconsistent { .. } => EXIT_VERIFY,
    }
}

/// Outcome of a search: `Some(true)` sortable, `Some(false)` not sortable,
/// `None` when a backward search with partial levels cannot tell.
pub struct Report {
    pub verdict: Option<bool>,
    pub stats: SearchStats,
}

pub fn config_from(args: &Args) -> Result<SearchConfig, SearchError> {
    let n = args.n.ok_or_else(|| SearchError::Config("--n is required".into()))?;
    if n == 0 || n > sortbound_core::MAX_N {
        return Err(SearchError::Config(format!("n must be in 1..={}", sortbound_core::MAX_N)));
    }
    let budget = args.budget.unwrap_or_else(|| SearchConfig::default_budget(n));
    let mode = args.mode.unwrap_or(Mode::Bidirectional);
    let mut cfg = match mode {
        Mode::Forward => SearchConfig::new(n, budget),
        Mode::Backward => SearchConfig::backward(n, budget),
        Mode::Bidirectional => SearchConfig::bidirectional(n, budget),
    };
    if mode == Mode::Backward {
        if let Some((_, bw)) = table_defaults(n) {
            cfg.bandwidth = bw;
        }
    }
    if let Some(f) = args.full_layers {
        cfg.full_layers = f;
    }
    if let Some(b) = &args.bandwidth {
        cfg.bandwidth = b.clone();
    }
    cfg.layer_bandwidth = args.layer_bandwidth.clone();
    cfg.threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |x| x.get()));
    cfg.chunk_limit = args.chunk_limit;
    cfg.store_cap = args.store_cap;
    cfg.spill_dir = args.spill_dir.clone();
    cfg.pair_heuristic = !args.no_pair_heuristic;
    if let Some(o) = args.parent_order {
        cfg.parent_order = o;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the configured search, printing progress to `log`.
pub fn search(
    cfg: &SearchConfig,
    advice_in: Option<&PathBuf>,
    advice_out: Option<&PathBuf>,
    log: &mut dyn Write,
) -> Result<Report, SearchError> {
    let mut advice: Option<Advice> = None;
    if cfg.mode != Mode::Forward {
        let started = Instant::now();
        let a = match advice_in {
            Some(dir) => {
                let a = Advice::read_dir(dir, cfg.threads)?;
                if a.n() != cfg.n || a.budget() != cfg.budget {
                    return Err(SearchError::Config(format!(
                        "advice in {} is for n={} C={}",
                        dir.display(),
                        a.n(),
                        a.budget()
                    )));
                }
                a
            }
            None => BackwardSearch::new(cfg)?.run(|_, _| {})?,
        };
        let _ = writeln!(
            log,
            "backward: {} posets, first full level {}, {:.2}s",
            a.total_len(),
            a.first_full(),
            started.elapsed().as_secs_f64()
        );
        if let Some(dir) = advice_out {
            a.write_dir(dir)?;
        }
        advice = Some(a);
    }
    if cfg.mode == Mode::Backward {
        let a = advice.as_ref().unwrap();
        let mut stats = SearchStats::new(cfg.budget);
        for (c, l) in stats.levels.iter_mut().enumerate() {
            l.backward = a.level_len(c) as u64;
        }
        let p0 = canonical_with_hash(&Poset::antichain(cfg.n));
        let e0: u128 = (1..=cfg.n as u128).product();
        let verdict = match a.find(&p0, e0, 0)? {
            Some((_, Status::Sortable)) => Some(true),
            _ if a.first_full() == 0 => Some(false),
            _ => None,
        };
        return Ok(Report { verdict, stats });
    }
    let started = Instant::now();
    let mut f = ForwardSearch::new(cfg, advice.as_ref())?;
    let verdict = f.run()?;
    let stats = f.into_stats();
    let _ = writeln!(
        log,
        "forward: {} posets explored, {:.2}s",
        stats.forward_total(),
        started.elapsed().as_secs_f64()
    );
    Ok(Report {
        verdict: Some(verdict),
        stats,
    })
}

pub fn verdict_line(n: usize, budget: usize, verdict: Option<bool>) -> String {
    match verdict {
        Some(true) => format!("verdict: sortable: {n} sortable in {budget}"),
        Some(false) => format!("verdict: not sortable: S({n}) > {budget}"),
        None => "verdict: undecided: partial backward levels do not cover the unordered poset".to_string(),
    }
}

fn run_verify_known(threads: usize, out: &mut (dyn Write + Send)) -> i32 {
    let started = Instant::now();
    let rows = match verify_known(7, threads) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return exit_code(&e);
        }
    };
    let mut ok = true;
    for r in &rows {
        ok &= r.ok();
        let _ = writeln!(
            out,
            "S({}) = {}: forward {}, oracle {} {}",
            r.n,
            r.expected,
            r.forward,
            r.oracle,
            if r.ok() { "ok" } else { "MISMATCH" }
        );
    }
    let _ = writeln!(
        out,
        "verify-known: {} ({:.2}s)",
        if ok { "pass" } else { "fail" },
        started.elapsed().as_secs_f64()
    );
    if ok {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

/// Parses `args` (including the program name) and runs. Normal output
/// goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |x| x.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return EXIT_RESOURCE;
        }
    };
    pool.install(|| {
        if args.verify_known {
            return run_verify_known(threads, out);
        }
        let cfg = match config_from(&args) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return exit_code(&e);
            }
        };
        let _ = writeln!(
            out,
            "n={} C={} mode={} full_layers={} bandwidth={} threads={}",
            cfg.n, cfg.budget, cfg.mode, cfg.full_layers, cfg.bandwidth, cfg.threads
        );
        let report = match search(&cfg, args.advice_in.as_ref(), args.advice_out.as_ref(), out) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return exit_code(&e);
            }
        };
        let s = &report.stats;
        let _ = writeln!(out, "stored posets: {}", s.stored_total());
        if cfg.mode != Mode::Backward {
            let _ = writeln!(
                out,
                "max down-sets (at most one singleton): {}, above sqrt(3)^(n+2): {}",
                s.max_down_sets, s.down_set_bound_violations
            );
        }
        if let Some(path) = &args.stats_out {
            let written = File::create(path).and_then(|f| {
                let mut w = BufWriter::new(f);
                s.write_csv(&mut w)?;
                w.flush()
            });
            if let Err(e) = written {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                return EXIT_RESOURCE;
            }
        }
        let _ = writeln!(out, "{}", verdict_line(cfg.n, cfg.budget, report.verdict));
        if args.oracle_check {
            if cfg.n > 8 {
                let _ = writeln!(err, "error: --oracle-check supports at most 8 elements");
                return EXIT_USAGE;
            }
            let truth = minimax_sortable(&Poset::antichain(cfg.n), cfg.budget);
            let agrees = report.verdict.is_none_or(|v| v == truth);
            let _ = writeln!(out, "oracle: {}", if agrees { "agrees" } else { "DISAGREES" });
            if !agrees {
                return EXIT_VERIFY;
            }
        }
        EXIT_OK
    })
}
