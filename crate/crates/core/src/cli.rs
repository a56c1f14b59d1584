//! Command-line front end.
//!
//! Every record is one JSON object per line carrying `"schema": "v1"`.
//! Wall-clock data lives under a `"meta"` key; [`canonical_payload`] strips
//! it so reruns with the same seed compare byte for byte. Trial `i` of a
//! run seeded with `seed` uses [`trial_seed`]`(seed, i)`.

use std::cell::RefCell;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::rc::Rc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bounds::BoundsProfile;
use crate::learner::{self, Algorithm, LearnParams, LearnReport, Outcome, QueryLedger};
use crate::oracle::QueryOracle;
use crate::poly::{random_sparse_poly, PolyError, SparsePoly, TruthTable, DEFAULT_EXHAUSTIVE_LIMIT};
use crate::tester::{self, Decision, TesterConfig};
use crate::{Assignment, Oracle};

pub const SCHEMA: &str = "v1";

/// Uniform samples used to judge a hypothesis when the exact distance is
/// out of reach.
pub const JUDGE_SAMPLES: u64 = 100_000;

/// Largest sparsity of `f + h` for which the exact distance is computed by
/// inclusion-exclusion.
const JUDGE_EXACT_SPARSITY: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "sparse-gf2", version, about = "Learn and test sparse GF(2) polynomials from membership queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random sparse polynomial as JSON.
    Gen(GenArgs),
    /// Run a learner on a target for several seeded trials.
    Learn(LearnArgs),
    /// Run the sparsity tester for several seeded trials.
    Test(TestArgs),
    /// Print every query bound for (s, epsilon, n).
    Bounds(BoundsArgs),
    /// Sweep (s, epsilon) on random targets and print a summary table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    /// Random polynomial with `s` monomials of degree at most `d`.
    Sparse,
    /// Uniformly random truth table.
    Table,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Polynomial JSON file. Without it every trial draws a fresh random
    /// target from `--n`, `--d`, `--s`.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Sparsity bound; defaults to the target's sparsity.
    #[arg(long)]
    pub s: Option<u64>,
    /// Degree bound; defaults to the target's degree.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value = "auto")]
    pub algorithm: Algorithm,
    /// Overrides the projection exponent of the main pipeline.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    /// Query budget per trial.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Writes every query as `<hex assignment> <bit>`, trials in order.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Polynomial JSON file; random targets of `--target-kind` otherwise.
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TargetKind::Sparse)]
    pub target_kind: TargetKind,
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree of random sparse targets; defaults to `n`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Expected decision; defaults to accept for targets with at most `s`
    /// monomials and reject otherwise.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    /// Learning budget as a multiple of the learner's worst-case ceiling.
    #[arg(long, default_value_t = tester::DEFAULT_BUDGET_FACTOR)]
    pub budget_factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Accept,
    Reject,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub s: u64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1 << 16)]
    pub n: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    pub s: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.0625")]
    pub epsilon: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Degree of the random targets.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    pub algorithm: Vec<Algorithm>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("no trial succeeded")]
    NoSuccess,
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid_config",
            CliError::Io { .. } => "io",
            CliError::Poly(_) => "invalid_polynomial",
            CliError::NoSuccess => "no_successful_trial",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NoSuccess => 1,
            CliError::Config(_) | CliError::Poly(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    /// The machine-readable error record.
    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "kind": "error",
            "error": { "code": self.code(), "message": self.to_string() },
        })
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Seed of trial `i`: `seed` XOR a SplitMix64 scramble of `i`.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    let mut z = i.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    seed ^ z ^ (z >> 31)
}

/// Generator for random instances (targets of a trial, `gen` output),
/// independent of the learner's stream for the same seed.
pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Drops every `"meta"` key from the JSON lines of `text`. Non-JSON lines
/// (CSV) pass through unchanged.
pub fn canonical_payload(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(mut map)) => {
                map.remove("meta");
                out.push_str(&Value::Object(map).to_string());
            }
            _ => out.push_str(line),
        }
        out.push('\n');
    }
    out
}

/// Distance between `target` and `h`, exact when feasible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Judged {
    pub distance: f64,
    pub exact: bool,
}

/// Exact distance for small arity or small `f + h`; otherwise an estimate
/// from [`JUDGE_SAMPLES`] uniform points drawn with `seed`. The judge's
/// evaluations are not oracle queries.
pub fn judge_distance(target: &SparsePoly, h: &SparsePoly, seed: u64) -> Result<Judged, PolyError> {
    let diff = target.add(h)?;
    let n = diff.arity();
    if diff.is_zero() {
        return Ok(Judged { distance: 0.0, exact: true });
    }
    if n <= DEFAULT_EXHAUSTIVE_LIMIT || (diff.sparsity() <= JUDGE_EXACT_SPARSITY && n <= 126) {
        return Ok(Judged {
            distance: diff.satisfying_fraction(DEFAULT_EXHAUSTIVE_LIMIT)?,
            exact: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut x = Assignment::zeros(n);
    let mut ones = 0u64;
    for _ in 0..JUDGE_SAMPLES {
        for i in 0..n {
            x.set(i, rng.gen());
        }
        ones += u64::from(diff.eval(&x));
    }
    Ok(Judged {
        distance: ones as f64 / JUDGE_SAMPLES as f64,
        exact: false,
    })
}

fn exact_algorithm(alg: Algorithm) -> bool {
    matches!(alg, Algorithm::ExactLowdeg | Algorithm::ReducedVars)
}

/// A trial succeeds when the learner finished within budget and its
/// hypothesis is the target (exact learners) or within `epsilon` of it.
fn judge(target: &SparsePoly, report: &LearnReport, epsilon: f64, seed: u64) -> Result<(bool, Judged), PolyError> {
    let judged = judge_distance(target, &report.hypothesis, seed)?;
    let ok = report.outcome != Outcome::GaveUpBudget
        && if exact_algorithm(report.algorithm) {
            report.hypothesis == *target
        } else {
            judged.distance <= epsilon
        };
    Ok((ok, judged))
}

#[derive(Clone, Default)]
struct SharedBuf(Rc<RefCell<Vec<u8>>>);

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.borrow_mut().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Root oracle for `p`, optionally recording its queries into the
/// returned buffer.
fn build_oracle(p: SparsePoly, trace: bool) -> (QueryOracle, Option<SharedBuf>) {
    let o = QueryOracle::from_poly(p);
    if trace {
        let buf = SharedBuf::default();
        (o.with_trace(Box::new(buf.clone())), Some(buf))
    } else {
        (o, None)
    }
}

fn take_trace(buf: Option<SharedBuf>) -> Vec<u8> {
    buf.map(|b| b.0.take()).unwrap_or_default()
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_meta(start: Instant) -> Value {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "timestamp_unix": ts,
        "elapsed_ms": ms(start),
        "threads": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn read_target(path: &PathBuf) -> Result<SparsePoly, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    Ok(SparsePoly::from_json(&text)?)
}

/// Destination of the main output.
struct Sink {
    path: Option<PathBuf>,
    buf: Vec<u8>,
}

impl Sink {
    fn new(path: Option<PathBuf>) -> Self {
        Sink { path, buf: Vec::new() }
    }

    fn line(&mut self, v: &Value) {
        self.buf.extend_from_slice(v.to_string().as_bytes());
        self.buf.push(b'\n');
    }

    fn finish(self, stdout: &mut dyn Write) -> Result<(), CliError> {
        match self.path {
            Some(p) => fs::write(&p, &self.buf).map_err(io_err(format!("writing {}", p.display()))),
            None => stdout.write_all(&self.buf).map_err(io_err("writing stdout")),
        }
    }
}

fn write_trace(path: &Option<PathBuf>, chunks: impl Iterator<Item = Vec<u8>>) -> Result<(), CliError> {
    if let Some(p) = path {
        let mut all = Vec::new();
        for c in chunks {
            all.extend_from_slice(&c);
        }
        fs::write(p, all).map_err(io_err(format!("writing {}", p.display())))?;
    }
    Ok(())
}

fn json_only(format: Format, command: &str) -> Result<(), CliError> {
    if format == Format::Csv {
        return config(format!("{command} only emits JSON lines"));
    }
    Ok(())
}

/// Parses `args` and runs the command, writing to `stdout` unless `--out`
/// is given.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen(a, stdout),
        Command::Learn(a) => learn(a, stdout),
        Command::Test(a) => test(a, stdout),
        Command::Bounds(a) => bounds(a, stdout),
        Command::Bench(a) => bench(a, stdout),
    }
}

/// Entry point of the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::Config(e.to_string().trim_end().to_owned());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit_code();
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn gen(a: GenArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if a.n == 0 {
        return config("n must be at least 1");
    }
    let mut rng = instance_rng(a.seed);
    let p = random_sparse_poly(a.n, a.d, a.s, &mut rng)?;
    let mut text = p.to_json();
    text.push('\n');
    match a.out {
        Some(path) => fs::write(&path, text).map_err(io_err(format!("writing {}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(io_err("writing stdout")),
    }
}

/// Where the targets of a learn run come from.
enum Targets {
    Fixed(SparsePoly),
    Random { n: usize, d: usize, s: usize },
}

impl Targets {
    fn draw(&self, seed: u64) -> Result<SparsePoly, PolyError> {
        match self {
            Targets::Fixed(p) => Ok(p.clone()),
            Targets::Random { n, d, s } => random_sparse_poly(*n, *d, *s, &mut instance_rng(seed)),
        }
    }
}

#[derive(Serialize)]
struct LearnTrial {
    schema: &'static str,
    kind: &'static str,
    trial: u64,
    seed: u64,
    success: bool,
    algorithm: Algorithm,
    outcome: Option<Outcome>,
    error: Option<String>,
    queries_used: u64,
    predicted: Option<f64>,
    ceiling: Option<f64>,
    ratio: Option<f64>,
    distance: Option<f64>,
    distance_exact: Option<bool>,
    hypothesis: Option<SparsePoly>,
    ledger: Option<QueryLedger>,
    meta: Value,
}

struct TrialResult {
    record: LearnTrial,
    trace: Vec<u8>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn learn_trial(
    targets: &Targets,
    base: &LearnParams,
    algorithm: Algorithm,
    i: u64,
    seed: u64,
    trace: bool,
) -> Result<TrialResult, CliError> {
    let start = Instant::now();
    let t = trial_seed(seed, i);
    let target = targets.draw(t)?;
    let params = base.clone().with_seed(t);
    let (oracle, buf) = build_oracle(target.clone(), trace);
    let result = learner::run(&oracle, &params, algorithm);
    let _ = oracle.flush_trace();
    let record = match result {
        Ok(report) => {
            let (success, judged) = judge(&target, &report, params.epsilon, t)?;
            LearnTrial {
                schema: SCHEMA,
                kind: "trial",
                trial: i,
                seed: t,
                success,
                algorithm: report.algorithm,
                outcome: Some(report.outcome),
                error: None,
                queries_used: report.queries_used,
                predicted: finite(report.predicted_bound),
                ceiling: report.ceiling,
                ratio: finite(report.queries_used as f64 / report.predicted_bound),
                distance: Some(judged.distance),
                distance_exact: Some(judged.exact),
                hypothesis: Some(report.hypothesis),
                ledger: Some(report.ledger),
                meta: json!({ "elapsed_ms": ms(start) }),
            }
        }
        Err(learner::LearnError::InvalidParams(m)) => return config(m),
        Err(e) => LearnTrial {
            schema: SCHEMA,
            kind: "trial",
            trial: i,
            seed: t,
            success: false,
            algorithm: match algorithm {
                Algorithm::Auto => learner::auto_branch(&params),
                a => a,
            },
            outcome: None,
            error: Some(e.to_string()),
            queries_used: oracle.queries(),
            predicted: None,
            ceiling: None,
            ratio: None,
            distance: None,
            distance_exact: None,
            hypothesis: None,
            ledger: None,
            meta: json!({ "elapsed_ms": ms(start) }),
        },
    };
    Ok(TrialResult {
        record,
        trace: take_trace(buf),
    })
}

/// Runs `trials` independent learner trials in parallel, ordered by index.
fn learn_trials(
    targets: &Targets,
    base: &LearnParams,
    algorithm: Algorithm,
    trials: u64,
    seed: u64,
    trace: bool,
) -> Result<Vec<TrialResult>, CliError> {
    (0..trials)
        .into_par_iter()
        .map(|i| learn_trial(targets, base, algorithm, i, seed, trace))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LearnSummary {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub mean_queries: f64,
    pub max_queries: u64,
    pub mean_predicted: Option<f64>,
    pub mean_ratio: Option<f64>,
}

fn summarize(records: &[&LearnTrial]) -> LearnSummary {
    let trials = records.len() as u64;
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    LearnSummary {
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        mean_queries: mean(records.iter().map(|r| r.queries_used as f64).collect()).unwrap_or(0.0),
        max_queries: records.iter().map(|r| r.queries_used).max().unwrap_or(0),
        mean_predicted: mean(records.iter().filter_map(|r| r.predicted).collect()),
        mean_ratio: mean(records.iter().filter_map(|r| r.ratio).collect()),
    }
}

fn learn(a: LearnArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    json_only(a.format, "learn")?;
    let targets = match &a.target {
        Some(path) => {
            let p = read_target(path)?;
            if a.n.is_some_and(|n| n != p.arity()) {
                return config(format!("--n {} does not match the target arity {}", a.n.unwrap(), p.arity()));
            }
            Targets::Fixed(p)
        }
        None => {
            let (Some(n), Some(d), Some(s)) = (a.n, a.d, a.s) else {
                return config("without --target, --n, --d and --s are required");
            };
            Targets::Random { n, d, s: s as usize }
        }
    };
    let (n, s, d) = match &targets {
        Targets::Fixed(p) => (
            p.arity(),
            a.s.unwrap_or(p.sparsity() as u64).max(1),
            a.d.unwrap_or(p.degree()),
        ),
        Targets::Random { n, d, s } => (*n, (*s as u64).max(1), *d),
    };
    let mut params = LearnParams::new(s, a.epsilon, a.delta, n)
        .with_degree(d)
        .with_budget(a.budget)
        .with_eta(a.eta);
    params.seed = a.seed;
    params.validate().or_else(|e| config(e.to_string()))?;
    if a.trials == 0 {
        return config("trials must be at least 1");
    }
    let results = learn_trials(&targets, &params, a.algorithm, a.trials, a.seed, a.trace.is_some())?;
    let mut sink = Sink::new(a.out);
    for r in &results {
        sink.line(&serde_json::to_value(&r.record).expect("trial record serializes"));
    }
    let records: Vec<&LearnTrial> = results.iter().map(|r| &r.record).collect();
    let summary = summarize(&records);
    let ok = summary.successes > 0;
    sink.line(&json!({
        "schema": SCHEMA,
        "kind": "aggregate",
        "command": "learn",
        "algorithm": a.algorithm,
        "s": s,
        "epsilon": a.epsilon,
        "delta": a.delta,
        "n": n,
        "d": d,
        "seed": a.seed,
        "summary": summary,
        "meta": run_meta(start),
    }));
    write_trace(&a.trace, results.into_iter().map(|r| r.trace))?;
    sink.finish(stdout)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::NoSuccess)
    }
}

enum TestTargets {
    Fixed(SparsePoly),
    Sparse { n: usize, d: usize, s: usize },
    Table { n: usize },
}

fn test(a: TestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    json_only(a.format, "test")?;
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return config(format!("epsilon {} outside (0, 1)", a.epsilon));
    }
    if a.s == 0 {
        return config("s must be at least 1");
    }
    if a.trials == 0 {
        return config("trials must be at least 1");
    }
    if !(a.budget_factor > 0.0) {
        return config("budget factor must be positive");
    }
    let targets = match (&a.target, a.target_kind) {
        (Some(path), _) => TestTargets::Fixed(read_target(path)?),
        (None, kind) => {
            let Some(n) = a.n else {
                return config("without --target, --n is required");
            };
            match kind {
                TargetKind::Sparse => TestTargets::Sparse {
                    n,
                    d: a.d.unwrap_or(n),
                    s: a.s as usize,
                },
                TargetKind::Table if n > DEFAULT_EXHAUSTIVE_LIMIT => {
                    return config(format!("truth-table targets need n <= {DEFAULT_EXHAUSTIVE_LIMIT}"))
                }
                TargetKind::Table => TestTargets::Table { n },
            }
        }
    };
    let expect = a.expect.unwrap_or(match &targets {
        TestTargets::Fixed(p) if p.sparsity() as u64 <= a.s => Expect::Accept,
        TestTargets::Fixed(_) | TestTargets::Table { .. } => Expect::Reject,
        TestTargets::Sparse { .. } => Expect::Accept,
    });
    let cfg = TesterConfig {
        budget_factor: a.budget_factor,
    };
    let trace = a.trace.is_some();
    let results: Vec<Result<(Value, u64, bool, Decision, Vec<u8>), CliError>> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let t0 = Instant::now();
            let t = trial_seed(a.seed, i);
            let oracle = match &targets {
                TestTargets::Fixed(p) => QueryOracle::from_poly(p.clone()),
                TestTargets::Sparse { n, d, s } => {
                    QueryOracle::from_poly(random_sparse_poly(*n, *d, *s, &mut instance_rng(t))?)
                }
                TestTargets::Table { n } => QueryOracle::from_truth_table(TruthTable::random(*n, &mut instance_rng(t))),
            };
            let buf = trace.then(SharedBuf::default);
            let oracle = match &buf {
                Some(b) => oracle.with_trace(Box::new(b.clone())),
                None => oracle,
            };
            let verdict = tester::test_sparsity(&oracle, a.s, a.epsilon, t, &cfg)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let _ = oracle.flush_trace();
            let success = match expect {
                Expect::Accept => verdict.decision == Decision::Accept,
                Expect::Reject => verdict.decision == Decision::Reject,
            };
            let record = json!({
                "schema": SCHEMA,
                "kind": "trial",
                "trial": i,
                "seed": t,
                "success": success,
                "decision": verdict.decision,
                "queries_used": verdict.queries_used,
                "budget": verdict.budget,
                "failure": verdict.failure,
                "evidence": verdict.evidence,
                "ledger": verdict.ledger,
                "meta": { "elapsed_ms": ms(t0) },
            });
            Ok((record, verdict.queries_used, success, verdict.decision, take_trace(buf)))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut sink = Sink::new(a.out);
    for r in &results {
        sink.line(&r.0);
    }
    let trials = results.len() as u64;
    let successes = results.iter().filter(|r| r.2).count() as u64;
    let accepts = results.iter().filter(|r| r.3 == Decision::Accept).count() as u64;
    let mean_queries = results.iter().map(|r| r.1 as f64).sum::<f64>() / trials as f64;
    let n = results_arity(&targets);
    let q_tester = BoundsProfile::new(a.s, a.epsilon, n as u64).map(|p| p.q_tester).ok();
    sink.line(&json!({
        "schema": SCHEMA,
        "kind": "aggregate",
        "command": "test",
        "s": a.s,
        "epsilon": a.epsilon,
        "n": n,
        "seed": a.seed,
        "expect": expect,
        "summary": {
            "trials": trials,
            "successes": successes,
            "success_rate": successes as f64 / trials as f64,
            "accepts": accepts,
            "rejects": trials - accepts,
            "mean_queries": mean_queries,
            "max_queries": results.iter().map(|r| r.1).max().unwrap_or(0),
            "predicted": q_tester,
        },
        "meta": run_meta(start),
    }));
    write_trace(&a.trace, results.into_iter().map(|r| r.4))?;
    sink.finish(stdout)?;
    if successes > 0 {
        Ok(())
    } else {
        Err(CliError::NoSuccess)
    }
}

fn results_arity(t: &TestTargets) -> usize {
    match t {
        TestTargets::Fixed(p) => p.arity(),
        TestTargets::Sparse { n, .. } | TestTargets::Table { n } => *n,
    }
}

fn bounds(a: BoundsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    json_only(a.format, "bounds")?;
    let profile = BoundsProfile::new(a.s, a.epsilon, a.n).or_else(|e| config(e.to_string()))?;
    let mut v = serde_json::to_value(&profile).expect("profile serializes");
    let obj = v.as_object_mut().expect("profile is an object");
    obj.insert("schema".into(), json!(SCHEMA));
    obj.insert("kind".into(), json!("bounds"));
    obj.insert("meta".into(), run_meta(start));
    let mut sink = Sink::new(a.out);
    sink.line(&v);
    sink.finish(stdout)
}

/// One `(s, epsilon, algorithm)` cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub s: u64,
    pub epsilon: f64,
    pub beta: Option<f64>,
    pub algorithm: Algorithm,
    pub trials: u64,
    pub success_rate: f64,
    pub mean_queries: f64,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
}

pub const BENCH_COLUMNS: &str = "s,epsilon,beta,algorithm,trials,success_rate,mean_queries,predicted,ratio";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.s,
            self.epsilon,
            opt(self.beta),
            self.algorithm,
            self.trials,
            self.success_rate,
            self.mean_queries,
            opt(self.predicted),
            opt(self.ratio)
        )
    }
}

fn bench(a: BenchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    if a.s.is_empty() || a.epsilon.is_empty() || a.algorithm.is_empty() {
        return config("bench needs at least one s, epsilon and algorithm");
    }
    if a.trials == 0 {
        return config("trials must be at least 1");
    }
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &s in &a.s {
        for &eps in &a.epsilon {
            for &alg in &a.algorithm {
                let params = LearnParams::new(s, eps, a.delta, a.n).with_degree(a.d).with_budget(a.budget);
                params.validate().or_else(|e| config(e.to_string()))?;
                let targets = Targets::Random {
                    n: a.n,
                    d: a.d,
                    s: s as usize,
                };
                let results = learn_trials(&targets, &params, alg, a.trials, trial_seed(a.seed, cell), false)?;
                cell += 1;
                let records: Vec<&LearnTrial> = results.iter().map(|r| &r.record).collect();
                let sum = summarize(&records);
                let chosen = records.first().map(|r| r.algorithm).unwrap_or(alg);
                let predicted = records.iter().find_map(|r| r.predicted);
                rows.push(BenchRow {
                    s,
                    epsilon: eps,
                    beta: params.beta(),
                    algorithm: chosen,
                    trials: sum.trials,
                    success_rate: sum.success_rate,
                    mean_queries: sum.mean_queries,
                    predicted,
                    ratio: predicted.map(|p| sum.mean_queries / p),
                });
            }
        }
    }
    let mut sink = Sink::new(a.out);
    match a.format {
        Format::Csv => {
            sink.buf.extend_from_slice(BENCH_COLUMNS.as_bytes());
            sink.buf.push(b'\n');
            for r in &rows {
                sink.buf.extend_from_slice(r.to_csv().as_bytes());
                sink.buf.push(b'\n');
            }
        }
        Format::Json => {
            for r in &rows {
                let mut v = serde_json::to_value(r).expect("row serializes");
                let obj = v.as_object_mut().expect("row is an object");
                obj.insert("schema".into(), json!(SCHEMA));
                obj.insert("kind".into(), json!("bench_row"));
                sink.line(&v);
            }
            sink.line(&json!({
                "schema": SCHEMA,
                "kind": "aggregate",
                "command": "bench",
                "n": a.n,
                "d": a.d,
                "seed": a.seed,
                "rows": rows.len(),
                "meta": run_meta(start),
            }));
        }
    }
    sink.finish(stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
        assert_eq!(trial_seed(7, 3) ^ trial_seed(0, 3), 7);
    }

    #[test]
    fn canonical_strips_meta() {
        let a = "{\"a\":1,\"meta\":{\"t\":1}}\ns,eps\n";
        let b = "{\"meta\":{\"t\":2},\"a\":1}\ns,eps\n";
        assert_eq!(canonical_payload(a), canonical_payload(b));
        assert_eq!(canonical_payload(a), "{\"a\":1}\ns,eps\n");
    }

    #[test]
    fn judge_exact_and_sampled() {
        let p = SparsePoly::from_monomials(40, [vec![0usize, 1]]).unwrap();
        let z = SparsePoly::zero(40);
        let j = judge_distance(&p, &z, 0).unwrap();
        assert_eq!(j, Judged { distance: 0.25, exact: true });
        let many = SparsePoly::from_monomials(200, (0..30).map(|i| vec![i, i + 1])).unwrap();
        let j = judge_distance(&many, &SparsePoly::zero(200), 0).unwrap();
        assert!(!j.exact);
        assert!((0.0..=1.0).contains(&j.distance));
    }

    #[test]
    fn bench_row_csv() {
        let row = BenchRow {
            s: 4,
            epsilon: 0.25,
            beta: None,
            algorithm: Algorithm::SmallBeta,
            trials: 3,
            success_rate: 1.0,
            mean_queries: 10.5,
            predicted: Some(21.0),
            ratio: Some(0.5),
        };
        assert_eq!(row.to_csv(), "4,0.25,,small-beta,3,1,10.5,21,0.5");
        assert_eq!(BENCH_COLUMNS.split(',').count(), row.to_csv().split(',').count());
    }

    #[test]
    fn errors_are_machine_readable() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(["sparse-gf2", "bounds", "--s", "0", "--epsilon", "0.1"], &mut out, &mut err);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(v["error"]["code"], "invalid_config");
        assert_eq!(v["schema"], SCHEMA);
    }
}
