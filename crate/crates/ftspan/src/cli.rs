//! The `ftspan` command line: generate, build, verify, sweep, simulate.
//!
//! Exit codes: 0 success, 2 invalid spanner, 3 budget exceeded, 64 usage,
//! 65 incompatible or malformed input, 66 missing input, 70 internal
//! failure, 74 output error. JSON goes to stdout, diagnostics to stderr.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ftspan_core::convert::{conversion_iteration, ft_convert, ConversionConfig, ConvertError};
use ftspan_core::local::padded::{DecompositionConfig, PaddedNode};
use ftspan_core::local::sim::{SimError, Session};
use ftspan_core::local::{distributed_ft2, distributed_ft_convert, ClusterSpanner, DistConvertError, DistError, DistFt2Config, DistributedBase, Partition};
use ftspan_core::lp::{build_base_lp, solve_model, SolveError, SolveOptions};
use ftspan_core::oracle::{self, verify_ft, verify_ft2_char, OracleError, DEFAULT_BUDGET};
use ftspan_core::round::{approx_ft2_from, lll_ft2, AlphaMode, RoundError, RoundingConfig};
use ftspan_core::spanner::{greedy_spanner, Greedy, SpannerError};
use ftspan_core::{generators, Graph, Spanner, SpannerMeta};
use serde_json::{json, Value};

use crate::io::{self, ParseError};
use crate::report::{self, Metrics};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NOINPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IOERR: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "ftspan", version, about = "Fault-tolerant spanner construction and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated graph in edge-list format.
    Generate(GenerateArgs),
    /// Build a spanner of a graph file.
    Build(BuildArgs),
    /// Check a spanner file against a graph exhaustively.
    Verify(VerifyArgs),
    /// Run a grid of experiments and append one CSV row per run.
    Sweep(SweepArgs),
    /// Run a distributed algorithm and emit its round trace as JSON lines.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Complete,
    Gnp,
    Grid,
    Regular,
    Gap,
    Path,
    Cycle,
    Star,
    Petersen,
    Tree,
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// Vertex count.
    #[arg(long, short)]
    pub n: Option<usize>,
    /// Edge probability for gnp.
    #[arg(long, short)]
    pub p: Option<f64>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Degree for regular (circulant) graphs.
    #[arg(long, short)]
    pub degree: Option<usize>,
    /// Cost of the heavy arc of the gap fixture.
    #[arg(long, default_value_t = 1000.0)]
    pub heavy: f64,
    /// Number of midpoints of the gap fixture.
    #[arg(long)]
    pub midpoints: Option<usize>,
    /// Directed output; undirected families become symmetric arc sets.
    #[arg(long)]
    pub directed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GeneratorKind,
    #[command(flatten)]
    pub params: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Greedy,
    FtGreedy,
    Ft2Lp,
    Ft2Lll,
    Ft2Dist,
    FtDist,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::FtGreedy => "ft-greedy",
            Algorithm::Ft2Lp => "ft2-lp",
            Algorithm::Ft2Lll => "ft2-lll",
            Algorithm::Ft2Dist => "ft2-dist",
            Algorithm::FtDist => "ft-dist",
        }
    }

    fn is_ft2(self) -> bool {
        matches!(self, Algorithm::Ft2Lp | Algorithm::Ft2Lll | Algorithm::Ft2Dist)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TuningArgs {
    /// Multiplier in the default conversion iteration count.
    #[arg(long, default_value_t = 4.0)]
    pub c_iter: f64,
    /// Multiplier in the rounding factor alpha.
    #[arg(long, default_value_t = 3.0)]
    pub c_alpha: f64,
    /// Overrides the default iteration count.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Drop knapsack-cover cuts (weak relaxation).
    #[arg(long)]
    pub no_kc_cuts: bool,
    /// Rounding attempts for ft2-lp.
    #[arg(long, default_value_t = 20)]
    pub max_attempts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(long, short)]
    pub graph: PathBuf,
    #[arg(long, short, value_enum)]
    pub algorithm: Algorithm,
    /// Stretch; 2 for the ft2 algorithms, 3 otherwise.
    #[arg(long, short)]
    pub k: Option<u32>,
    #[arg(long, short, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Spanner output file.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the metrics JSON here.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Write the LP solution (ft2-lp, ft2-lll).
    #[arg(long)]
    pub lp_dump: Option<PathBuf>,
    /// Write the round trace (ft2-dist, ft-dist) as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// ft-greedy: stop adding iterations as soon as the union verifies.
    #[arg(long)]
    pub until_verified: bool,
    /// Fault-set budget for verification.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Round cap for simulated algorithms.
    #[arg(long)]
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, short)]
    pub graph: PathBuf,
    #[arg(long, short)]
    pub spanner: PathBuf,
    /// Stretch; defaults to the spanner file header.
    #[arg(long, short)]
    pub k: Option<f64>,
    /// Fault budget; defaults to the spanner file header.
    #[arg(long, short)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorKind,
    #[arg(long, short, value_enum)]
    pub algorithm: Algorithm,
    /// Vertex counts: `a`, `a..b`, `a..b:step` (inclusive) or `a,b,c`.
    #[arg(long, short, default_value = "8")]
    pub n: String,
    #[arg(long, short, default_value = "1")]
    pub r: String,
    #[arg(long, short)]
    pub k: Option<String>,
    #[arg(long, default_value = "0")]
    pub seeds: String,
    #[arg(long, short)]
    pub p: Option<f64>,
    #[arg(long, short)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 1000.0)]
    pub heavy: f64,
    #[arg(long)]
    pub directed: bool,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Check every greedy-family output exhaustively (within the budget).
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// CSV file; existing rows are kept and finished runs skipped.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimAlgorithm {
    Padded,
    Ft2Dist,
    FtDist,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, short)]
    pub graph: PathBuf,
    #[arg(long, short, value_enum)]
    pub algorithm: SimAlgorithm,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hard cap on rounds.
    #[arg(long)]
    pub max_rounds: Option<usize>,
    #[arg(long, short, default_value_t = 1)]
    pub r: usize,
    #[arg(long, short, default_value_t = 3)]
    pub k: u32,
    #[arg(long)]
    pub p_geom: Option<f64>,
    #[arg(long)]
    pub r_cap: Option<usize>,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// JSON-lines output; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// A failed command: exit code and message for stderr.
#[derive(Debug)]
pub struct Fail {
    pub code: i32,
    pub msg: String,
    /// JSON printed to stdout alongside the failure.
    pub json: Option<Value>,
}

impl Fail {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        Fail { code, msg: msg.into(), json: None }
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail::new(EXIT_USAGE, msg)
}

fn data(msg: impl Into<String>) -> Fail {
    Fail::new(EXIT_DATA, msg)
}

fn software(msg: impl Into<String>) -> Fail {
    Fail::new(EXIT_SOFTWARE, msg)
}

fn ioerr(path: &Path, e: std::io::Error) -> Fail {
    Fail::new(EXIT_IOERR, format!("{}: {e}", path.display()))
}

impl From<ParseError> for Fail {
    fn from(e: ParseError) -> Self {
        match &e {
            ParseError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                Fail::new(EXIT_NOINPUT, e.to_string())
            }
            ParseError::Io { .. } => Fail::new(EXIT_IOERR, e.to_string()),
            _ => data(e.to_string()),
        }
    }
}

fn from_spanner(e: SpannerError) -> Fail {
    data(e.to_string())
}

fn from_convert(e: ConvertError) -> Fail {
    match e {
        ConvertError::Base { .. } => software(e.to_string()),
        ConvertError::InvalidConfig(_) => usage(e.to_string()),
        _ => data(e.to_string()),
    }
}

fn from_solve(e: SolveError) -> Fail {
    match e {
        SolveError::Model(_) => data(e.to_string()),
        _ => software(e.to_string()),
    }
}

fn from_sim(e: SimError) -> Fail {
    match e {
        SimError::RoundCap { .. } => Fail::new(EXIT_BUDGET, e.to_string()),
        _ => software(e.to_string()),
    }
}

fn from_dist(e: DistError) -> Fail {
    match e {
        DistError::Sim(s) => from_sim(s),
        DistError::Model(_) | DistError::Unsupported(_) => data(e.to_string()),
        _ => software(e.to_string()),
    }
}

fn from_dist_convert(e: DistConvertError) -> Fail {
    match e {
        DistConvertError::Config(c) => from_convert(c),
        DistConvertError::Sim(s) => from_sim(s),
    }
}

fn from_oracle(e: OracleError) -> Fail {
    match e {
        OracleError::BudgetExceeded { .. } => Fail::new(EXIT_BUDGET, e.to_string()),
        _ => data(e.to_string()),
    }
}

/// The invocation as a single shell-style line, program name normalized.
pub fn invocation_line(args: &[String]) -> String {
    let mut parts = vec!["ftspan".to_string()];
    for a in args.iter().skip(1) {
        if a.is_empty() || a.contains(|c: char| c.is_whitespace() || "'\"\\$`".contains(c)) {
            parts.push(format!("'{}'", a.replace('\'', "'\\''")));
        } else {
            parts.push(a.clone());
        }
    }
    parts.join(" ")
}

/// Parses `args` (including the program name) and runs the command.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let invocation = invocation_line(args);
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a, &invocation, stdout),
        Command::Build(a) => cmd_build(a, &invocation, stdout),
        Command::Verify(a) => cmd_verify(a, &invocation, stdout),
        Command::Sweep(a) => cmd_sweep(a, &invocation, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, &invocation, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            if let Some(j) = &f.json {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(j).unwrap());
            }
            let _ = writeln!(stderr, "ftspan: {}", f.msg);
            f.code
        }
    }
}

fn need<T>(v: Option<T>, what: &str, kind: GeneratorKind) -> Result<T, Fail> {
    v.ok_or_else(|| usage(format!("{kind:?} needs --{what}").to_lowercase()))
}

/// Builds the graph described by `kind` and `p`, validating parameters.
pub fn make_graph(kind: GeneratorKind, p: &GeneratorArgs, seed: u64) -> Result<Graph, Fail> {
    let n = || need(p.n, "n", kind);
    let g = match kind {
        GeneratorKind::Complete => generators::complete(n()?, p.directed),
        GeneratorKind::Gnp => {
            let prob = need(p.p, "p", kind)?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(usage(format!("edge probability {prob} outside [0, 1]")));
            }
            generators::gnp(n()?, prob, p.directed, seed)
        }
        GeneratorKind::Grid => {
            let (w, h) = (need(p.width, "width", kind)?, need(p.height, "height", kind)?);
            generators::grid(w, h)
        }
        GeneratorKind::Regular => {
            let (n, d) = (n()?, need(p.degree, "degree", kind)?);
            generators::circulant(n, d, p.directed)
                .ok_or_else(|| usage(format!("no {d}-regular circulant on {n} vertices")))?
        }
        GeneratorKind::Gap => {
            if !(p.heavy >= 0.0 && p.heavy.is_finite()) {
                return Err(usage("heavy cost must be finite and nonnegative"));
            }
            generators::gap_fixture(p.heavy, need(p.midpoints, "midpoints", kind)?)
        }
        GeneratorKind::Path => generators::path(n()?),
        GeneratorKind::Cycle => {
            let n = n()?;
            if n < 3 {
                return Err(usage("a cycle needs at least 3 vertices"));
            }
            generators::cycle(n)
        }
        GeneratorKind::Star => generators::star(n()?),
        GeneratorKind::Petersen => generators::petersen(),
        GeneratorKind::Tree => generators::random_tree(n()?, seed),
    };
    Ok(if p.directed && !g.directed() { g.to_directed() } else { g })
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<(), Fail> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap()).map_err(|e| Fail::new(EXIT_IOERR, e.to_string()))
}

fn write_file(path: &Path, body: &str) -> Result<(), Fail> {
    fs::write(path, body).map_err(|e| ioerr(path, e))
}

fn cmd_generate(a: &GenerateArgs, invocation: &str, stdout: &mut dyn Write) -> Result<i32, Fail> {
    let g = make_graph(a.kind, &a.params, a.seed)?;
    match &a.out {
        Some(path) => io::write_graph(path, &g, Some(invocation)).map_err(|e| ioerr(path, e))?,
        None => write!(stdout, "# {invocation}\n{}", io::format_graph(&g)).map_err(|e| Fail::new(EXIT_IOERR, e.to_string()))?,
    }
    Ok(EXIT_OK)
}

/// Output of one build, shared by `build` and `sweep`.
struct Built {
    spanner: Spanner,
    lp_value: Option<f64>,
    rounds: Option<usize>,
    iterations: Option<usize>,
    report: Option<Value>,
    lp_dump: Option<Value>,
    trace: Option<ftspan_core::local::SimTrace>,
    /// Known validity, when the algorithm establishes it.
    valid: Option<bool>,
    /// The algorithm gave up and returned its best effort.
    rejected: bool,
}

impl Built {
    fn plain(spanner: Spanner) -> Self {
        Built {
            spanner,
            lp_value: None,
            rounds: None,
            iterations: None,
            report: None,
            lp_dump: None,
            trace: None,
            valid: None,
            rejected: false,
        }
    }
}

struct BuildSpec<'a> {
    algorithm: Algorithm,
    k: u32,
    r: usize,
    seed: u64,
    tuning: &'a TuningArgs,
    until_verified: bool,
    budget: u64,
    max_rounds: Option<usize>,
    want_lp_dump: bool,
}

fn resolve_k(algorithm: Algorithm, k: Option<u32>) -> Result<u32, Fail> {
    match (algorithm.is_ft2(), k) {
        (true, None | Some(2)) => Ok(2),
        (true, Some(k)) => Err(usage(format!("{} builds 2-spanners, not {k}-spanners", algorithm.name()))),
        (false, None) => Ok(3),
        (false, Some(k)) => Ok(k),
    }
}

fn conversion_config(g: &Graph, r: usize, seed: u64, t: &TuningArgs) -> ConversionConfig {
    let mut cfg = ConversionConfig::with_c_iter(g.n(), r, seed, t.c_iter);
    if let Some(it) = t.iterations {
        cfg.iterations = it;
    }
    cfg
}

fn rounding_config(t: &TuningArgs, mode: AlphaMode) -> RoundingConfig {
    RoundingConfig {
        c_alpha: t.c_alpha,
        mode,
        max_attempts: t.max_attempts,
        lp: SolveOptions { kc_cuts: !t.no_kc_cuts, ..SolveOptions::default() },
        ..RoundingConfig::default()
    }
}

fn check_ft2_input(g: &Graph) -> Result<(), Fail> {
    if !g.directed() {
        return Err(data("2-spanner algorithms need a directed graph (generate with --directed)"));
    }
    if !g.is_unit_length() {
        return Err(data("2-spanner algorithms need unit lengths"));
    }
    Ok(())
}

fn build_with(g: &Graph, s: &BuildSpec<'_>, invocation: &str) -> Result<Built, Fail> {
    let t = s.tuning;
    if t.c_iter <= 0.0 || t.c_alpha <= 0.0 || t.iterations == Some(0) || t.max_attempts == 0 {
        return Err(usage("c-iter, c-alpha, iterations and max-attempts must be positive"));
    }
    match s.algorithm {
        Algorithm::Greedy => Ok(Built::plain(greedy_spanner(g, s.k).map_err(from_spanner)?)),
        Algorithm::FtGreedy => {
            let cfg = conversion_config(g, s.r, s.seed, t);
            if !s.until_verified {
                let h = ft_convert(g, s.k, &cfg, &Greedy).map_err(from_convert)?;
                return Ok(Built { iterations: Some(if s.r == 0 { 1 } else { cfg.iterations }), ..Built::plain(h) });
            }
            let first = ft_convert(g, s.k, &ConversionConfig { iterations: 1, ..cfg.clone() }, &Greedy)
                .map_err(from_convert)?;
            let mut h = first;
            let mut used = 1;
            loop {
                let verdict = verify_ft(g, &h, s.k as f64, s.r, s.budget).map_err(from_oracle)?;
                if verdict.ok || used >= cfg.iterations || s.r == 0 {
                    return Ok(Built { iterations: Some(used), valid: Some(verdict.ok), ..Built::plain(h) });
                }
                let next = conversion_iteration(g, s.k, &cfg, used, &Greedy).map_err(from_convert)?;
                h.extend(next.edges);
                used += 1;
            }
        }
        Algorithm::FtDist => {
            let cfg = conversion_config(g, s.r, s.seed, t);
            let base = ClusterSpanner;
            if let Some(cap) = s.max_rounds {
                let need = if s.r == 0 { 1 } else { cfg.iterations } * base.rounds(s.k.max(1));
                if need > cap {
                    return Err(Fail::new(EXIT_BUDGET, format!("schedule needs {need} rounds, cap is {cap}")));
                }
            }
            let out = distributed_ft_convert(g, s.k, &cfg, &base).map_err(from_dist_convert)?;
            Ok(Built {
                rounds: Some(out.trace.rounds_used),
                iterations: Some(out.sampled.len()),
                trace: Some(out.trace),
                ..Built::plain(out.spanner)
            })
        }
        Algorithm::Ft2Lp => {
            check_ft2_input(g)?;
            if s.r > g.n() {
                return Err(data(format!("fault budget r = {} exceeds n = {}", s.r, g.n())));
            }
            let cfg = rounding_config(t, AlphaMode::LogN);
            let mut model = build_base_lp(g, s.r).map_err(|e| data(e.to_string()))?;
            let sol = solve_model(&mut model, &cfg.lp).map_err(from_solve)?;
            let dump = s.want_lp_dump.then(|| report::lp_dump(invocation, g, &model, &sol));
            let (rounded, rejected) = match approx_ft2_from(g, s.r, &sol, &cfg, s.seed) {
                Ok(r) => (r, false),
                Err(RoundError::AttemptsExhausted { best, .. }) => (*best, true),
                Err(e) => return Err(software(e.to_string())),
            };
            let valid = verify_ft2_char(g, &rounded.spanner, s.r).ok;
            let mut rep = report::rounding_report(&rounded.report);
            rep["accepted"] = json!(!rejected);
            Ok(Built {
                lp_value: Some(sol.objective_value),
                report: Some(rep),
                lp_dump: dump,
                valid: Some(valid),
                rejected,
                ..Built::plain(rounded.spanner)
            })
        }
        Algorithm::Ft2Lll => {
            check_ft2_input(g)?;
            let cfg = rounding_config(t, AlphaMode::LogDelta);
            let out = match lll_ft2(g, s.r, &cfg, s.seed) {
                Ok(o) => o,
                Err(e @ RoundError::ResamplesExceeded { .. }) => return Err(Fail::new(EXIT_BUDGET, e.to_string())),
                Err(e @ (RoundError::NonUnitCost | RoundError::DegreeTooSmall | RoundError::FaultBudgetTooLarge { .. })) => {
                    return Err(data(e.to_string()))
                }
                Err(e) => return Err(software(e.to_string())),
            };
            let dump = if s.want_lp_dump {
                let mut model = build_base_lp(g, s.r).map_err(|e| data(e.to_string()))?;
                let sol = solve_model(&mut model, &cfg.lp).map_err(from_solve)?;
                Some(report::lp_dump(invocation, g, &model, &sol))
            } else {
                None
            };
            let valid = verify_ft2_char(g, &out.rounded.spanner, s.r).ok;
            Ok(Built {
                lp_value: Some(out.rounded.report.lp_value),
                report: Some(report::rounding_report(&out.rounded.report)),
                lp_dump: dump,
                valid: Some(valid),
                ..Built::plain(out.rounded.spanner)
            })
        }
        Algorithm::Ft2Dist => {
            check_ft2_input(g)?;
            let mut cfg = DistFt2Config::new(g.n(), s.r);
            cfg.c_alpha = t.c_alpha;
            cfg.lp.kc_cuts = !t.no_kc_cuts;
            if let Some(it) = t.iterations {
                cfg.iterations = it;
            }
            if let Some(cap) = s.max_rounds {
                cfg.max_rounds = cap;
            }
            let out = distributed_ft2(g, &cfg, s.seed).map_err(from_dist)?;
            Ok(Built {
                lp_value: Some(out.report.lp_value),
                rounds: Some(out.report.rounds_used),
                iterations: Some(out.report.iterations),
                report: Some(report::distributed_report(&out.report)),
                valid: Some(out.report.valid),
                trace: Some(out.trace),
                ..Built::plain(out.spanner)
            })
        }
    }
}

fn cmd_build(a: &BuildArgs, invocation: &str, stdout: &mut dyn Write) -> Result<i32, Fail> {
    let g = io::read_graph(&a.graph)?;
    let spec = BuildSpec {
        algorithm: a.algorithm,
        k: resolve_k(a.algorithm, a.k)?,
        r: a.r,
        seed: a.seed,
        tuning: &a.tuning,
        until_verified: a.until_verified,
        budget: a.budget,
        max_rounds: a.max_rounds,
        want_lp_dump: a.lp_dump.is_some(),
    };
    if a.until_verified && a.algorithm != Algorithm::FtGreedy {
        return Err(usage("--until-verified applies to ft-greedy only"));
    }
    let built = build_with(&g, &spec, invocation)?;
    let mut spanner = built.spanner;
    spanner.meta = SpannerMeta::new(a.algorithm.name(), spec.k, a.r, a.seed);
    if let Some(path) = &a.out {
        io::write_spanner(path, &spanner, Some(invocation)).map_err(|e| ioerr(path, e))?;
    }
    if let (Some(path), Some(dump)) = (&a.lp_dump, &built.lp_dump) {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(dump).unwrap()))?;
    }
    if let (Some(path), Some(trace)) = (&a.trace, &built.trace) {
        write_file(path, &report::trace_lines(invocation, trace, json!({})))?;
    }
    let mut m = Metrics::new(invocation, &g, &spanner);
    m.lp_value = built.lp_value;
    m.ratio = built.lp_value.map(|lp| if lp > 0.0 { m.cost / lp } else if m.cost == 0.0 { 1.0 } else { f64::INFINITY });
    m.ratio = m.ratio.filter(|r| r.is_finite());
    m.rounds = built.rounds;
    m.iterations = built.iterations;
    m.report = built.report;
    let mut v = serde_json::to_value(&m).unwrap();
    if let Some(valid) = built.valid {
        v["valid"] = json!(valid);
    }
    if let Some(path) = &a.metrics {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))?;
    }
    emit_json(stdout, &v)?;
    Ok(if built.rejected || built.valid == Some(false) { EXIT_INVALID } else { EXIT_OK })
}

fn cmd_verify(a: &VerifyArgs, invocation: &str, stdout: &mut dyn Write) -> Result<i32, Fail> {
    let g = io::read_graph(&a.graph)?;
    let h = io::read_spanner(&a.spanner)?;
    h.check_host(&g).map_err(from_spanner)?;
    let k = a.k.unwrap_or(h.meta.k as f64);
    let r = a.r.unwrap_or(h.meta.r);
    if !(k >= 1.0) {
        return Err(usage(format!("stretch must be at least 1, got {k}")));
    }
    let total = oracle::count_fault_sets(g.n(), r);
    let verdict = match verify_ft(&g, &h, k, r, a.budget) {
        Ok(v) => v,
        Err(e @ OracleError::BudgetExceeded { .. }) => {
            let mut f = Fail::new(EXIT_BUDGET, e.to_string());
            f.json = Some(json!({ "invocation": invocation, "ok": null, "fault_sets": total, "budget": a.budget }));
            return Err(f);
        }
        Err(e) => return Err(from_oracle(e)),
    };
    let mut v = report::verdict(&verdict);
    v["invocation"] = json!(invocation);
    v["k"] = json!(k);
    v["r"] = json!(r);
    emit_json(stdout, &v)?;
    Ok(if verdict.ok { EXIT_OK } else { EXIT_INVALID })
}

/// Parses `a`, `a..b`, `a..b:step` (inclusive) or `a,b,c`.
pub fn parse_range(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad number '{t}' in range '{s}'"));
    if s.contains(',') {
        return s.split(',').map(num).collect();
    }
    let Some((a, rest)) = s.split_once("..") else {
        return Ok(vec![num(s)?]);
    };
    let (b, step) = match rest.split_once(':') {
        Some((b, st)) => (b, num(st)?),
        None => (rest, 1),
    };
    if step == 0 {
        return Err(format!("zero step in range '{s}'"));
    }
    let (a, b) = (num(a)?, num(b)?);
    Ok((a..=b).step_by(step as usize).collect())
}

const CSV_HEADER: [&str; 14] =
    ["algorithm", "generator", "n", "r", "k", "seed", "size", "cost", "lp", "ratio", "rounds", "iterations", "valid", "status"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_sweep(a: &SweepArgs, invocation: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Fail> {
    let ns = parse_range(&a.n).map_err(usage)?;
    let rs = parse_range(&a.r).map_err(usage)?;
    let default_k = if a.algorithm.is_ft2() { "2" } else { "3" };
    let ks = parse_range(a.k.as_deref().unwrap_or(default_k)).map_err(usage)?;
    let seeds = parse_range(&a.seeds).map_err(usage)?;
    for &k in &ks {
        resolve_k(a.algorithm, Some(k as u32))?;
    }
    let generator = format!("{:?}", a.generator).to_lowercase();

    let mut done: BTreeSet<(u64, u64, u64, u64)> = BTreeSet::new();
    let mut fresh_file = true;
    if let Some(path) = &a.out {
        if path.exists() {
            let mut rd = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .from_path(path)
                .map_err(|e| data(format!("{}: {e}", path.display())))?;
            for row in rd.records() {
                let row = row.map_err(|e| data(format!("{}: {e}", path.display())))?;
                let field = |i: usize| row.get(i).unwrap_or("").parse::<u64>().unwrap_or(u64::MAX);
                if row.get(13) == Some("ok") && row.get(0) == Some(a.algorithm.name()) && row.get(1) == Some(&generator) {
                    done.insert((field(2), field(3), field(4), field(5)));
                }
            }
            fresh_file = false;
        }
    }
    let mut sink: Box<dyn Write + '_> = match &a.out {
        Some(path) => Box::new(
            OpenOptions::new().create(true).append(true).open(path).map_err(|e| ioerr(path, e))?,
        ),
        None => Box::new(&mut *stdout),
    };
    if fresh_file {
        sink.write_all(format!("# {invocation}\n").as_bytes()).map_err(|e| Fail::new(EXIT_IOERR, e.to_string()))?;
    }
    let mut w = csv::WriterBuilder::new().from_writer(sink);
    let csv_err = |e: csv::Error| Fail::new(EXIT_IOERR, e.to_string());
    if fresh_file {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    let mut failures = 0;
    for &n in &ns {
        for &r in &rs {
            for &k in &ks {
                for &seed in &seeds {
                    if done.contains(&(n, r, k, seed)) {
                        continue;
                    }
                    let params = GeneratorArgs {
                        n: Some(n as usize),
                        p: a.p,
                        width: Some(n as usize),
                        height: Some(n as usize),
                        degree: a.degree,
                        heavy: a.heavy,
                        midpoints: Some(r as usize),
                        directed: a.directed,
                    };
                    let spec = BuildSpec {
                        algorithm: a.algorithm,
                        k: k as u32,
                        r: r as usize,
                        seed,
                        tuning: &a.tuning,
                        until_verified: false,
                        budget: a.budget,
                        max_rounds: None,
                        want_lp_dump: false,
                    };
                    let outcome = make_graph(a.generator, &params, seed).and_then(|g| {
                        let b = build_with(&g, &spec, invocation)?;
                        let valid = match b.valid {
                            Some(v) => Some(v),
                            None if a.verify => {
                                match verify_ft(&g, &b.spanner, k as f64, r as usize, a.budget) {
                                    Ok(v) => Some(v.ok),
                                    Err(OracleError::BudgetExceeded { .. }) => None,
                                    Err(e) => return Err(from_oracle(e)),
                                }
                            }
                            None => None,
                        };
                        Ok((g, b, valid))
                    });
                    let mut row: Vec<String> = vec![
                        a.algorithm.name().into(),
                        generator.clone(),
                        n.to_string(),
                        r.to_string(),
                        k.to_string(),
                        seed.to_string(),
                    ];
                    match outcome {
                        Ok((g, b, valid)) => {
                            let cost = b.spanner.cost(&g);
                            let ratio = b.lp_value.filter(|&lp| lp > 0.0).map(|lp| cost / lp);
                            row.extend([
                                b.spanner.len().to_string(),
                                cost.to_string(),
                                opt(b.lp_value),
                                opt(ratio),
                                opt(b.rounds),
                                opt(b.iterations),
                                opt(valid),
                                if b.rejected { "rejected".into() } else { "ok".into() },
                            ]);
                        }
                        Err(f) => {
                            failures += 1;
                            let _ = writeln!(stderr, "ftspan: n={n} r={r} k={k} seed={seed}: {}", f.msg);
                            row.extend(std::iter::repeat_n(String::new(), 7));
                            row.push(format!("error: {}", f.msg));
                        }
                    }
                    w.write_record(&row).map_err(csv_err)?;
                    w.flush().map_err(|e| Fail::new(EXIT_IOERR, e.to_string()))?;
                }
            }
        }
    }
    Ok(if failures > 0 { EXIT_SOFTWARE } else { EXIT_OK })
}

fn cmd_simulate(a: &SimulateArgs, invocation: &str, stdout: &mut dyn Write) -> Result<i32, Fail> {
    let g = io::read_graph(&a.graph)?;
    let (trace, extra) = match a.algorithm {
        SimAlgorithm::Padded => {
            let mut cfg = DecompositionConfig::for_n(g.n());
            if let Some(p) = a.p_geom {
                cfg.p_geom = p;
            }
            if let Some(c) = a.r_cap {
                cfg.r_cap = c;
            }
            if !(cfg.p_geom > 0.0 && cfg.p_geom <= 1.0) || cfg.r_cap == 0 {
                return Err(usage("need 0 < p-geom <= 1 and r-cap >= 1"));
            }
            let mut session = Session::new(&g, a.seed, a.max_rounds.unwrap_or(cfg.r_cap + 1));
            let mut nodes = vec![PaddedNode::new(cfg); g.n()];
            session.run("decompose", &mut nodes).map_err(from_sim)?;
            let centers: Vec<usize> = nodes.iter().map(|p| p.center()).collect();
            let partition = Partition::from_centers(&centers);
            let padded = (0..g.n()).filter(|&v| partition.is_padded(&g, v)).count();
            let extra = json!({
                "algorithm": "padded",
                "p_geom": cfg.p_geom,
                "r_cap": cfg.r_cap,
                "clusters": partition.clusters.len(),
                "padded_vertices": padded,
                "centers": centers,
            });
            (session.into_trace(), extra)
        }
        SimAlgorithm::Ft2Dist | SimAlgorithm::FtDist => {
            let algorithm = if a.algorithm == SimAlgorithm::Ft2Dist { Algorithm::Ft2Dist } else { Algorithm::FtDist };
            let spec = BuildSpec {
                algorithm,
                k: if algorithm.is_ft2() { 2 } else { a.k },
                r: a.r,
                seed: a.seed,
                tuning: &a.tuning,
                until_verified: false,
                budget: DEFAULT_BUDGET,
                max_rounds: a.max_rounds,
                want_lp_dump: false,
            };
            let b = build_with(&g, &spec, invocation)?;
            let mut extra = json!({
                "algorithm": algorithm.name(),
                "size": b.spanner.len(),
                "cost": b.spanner.cost(&g),
                "edges": b.spanner.edges().iter().map(|e| e.0).collect::<Vec<_>>(),
            });
            if let Some(rep) = b.report {
                extra["report"] = rep;
            }
            (b.trace.expect("simulated algorithms return a trace"), extra)
        }
    };
    let body = report::trace_lines(invocation, &trace, extra);
    match &a.out {
        Some(path) => write_file(path, &body)?,
        None => stdout.write_all(body.as_bytes()).map_err(|e| Fail::new(EXIT_IOERR, e.to_string()))?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("8..64:8").unwrap(), [8, 16, 24, 32, 40, 48, 56, 64]);
        assert_eq!(parse_range("3").unwrap(), [3]);
        assert_eq!(parse_range("1,4, 9").unwrap(), [1, 4, 9]);
        assert_eq!(parse_range("0..2").unwrap(), [0, 1, 2]);
        assert!(parse_range("5..2").unwrap().is_empty());
        assert!(parse_range("1..4:0").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn invocation_quotes_awkward_arguments() {
        let args: Vec<String> = ["whatever/ftspan", "generate", "a b", "it's"].iter().map(|s| s.to_string()).collect();
        assert_eq!(invocation_line(&args), "ftspan generate 'a b' 'it'\\''s'");
    }
}
