//! `nqa` command-line front end: argument handling, dispatch and reporting.
//!
//! [`run`] is the whole program minus process plumbing, so tests can drive it with
//! in-memory writers.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nqa_core::{
    check::{flatten_for, Stats},
    gen_resource, gen_response, monitor_prefix, nqa_emptiness, nqa_eval_lasso,
    nqa_eval_lasso_nondet, nqa_universality, parse_nqa, running_aggregate, serialize_nqa,
    text::serialize_automaton,
    validate_nqa, DecisionOptions, Error, FiniteKind, FiniteValueFn, InfiniteValueFn, Lasso,
    Limits, NestedAutomaton, RcParams, RtParams, Weight,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_TIMEOUT: i32 = 5;

/// Exploration budget of the nondeterministic lasso evaluator behind `eval`.
const EVAL_BUDGET: usize = 2_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "nqa",
    version,
    about = "Threshold emptiness and universality for nested quantitative automata"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Is there a word whose value is at least lambda?
    Empty(DecideArgs),
    /// Do all words have value at least lambda?
    Universal(DecideArgs),
    /// Print the flattened automaton used for emptiness (silent weights as `_`).
    Flatten(FlattenArgs),
    /// Value of the lasso word stem·loop^ω.
    Eval(EvalArgs),
    /// Run a finite prefix and report returned child values.
    Monitor(MonitorArgs),
    /// Write a benchmark instance.
    Gen(GenArgs),
    /// Check an NQA file and summarize it.
    Validate(ValidateArgs),
    /// Sweep a benchmark family and print CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ValueArgs {
    /// Parent value function: Inf, Sup, LimInf, LimSup, LimInfAvg, LimSupAvg
    #[arg(long = "f")]
    pub f: InfiniteValueFn,
    /// Child value function: Min, Max, SumB, Sum+, Sum-
    #[arg(long = "g")]
    pub g: FiniteKind,
    /// Bound of SumB
    #[arg(long, allow_hyphen_values = true)]
    pub bound: Option<Weight>,
}

#[derive(Args, Debug, Clone)]
pub struct DecideArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub value: ValueArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Weight,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Print flattened sizes and per-phase wall time
    #[arg(long)]
    pub stats: bool,
    /// Print a witness or counterexample lasso
    #[arg(long)]
    pub witness: bool,
}

#[derive(Args, Debug, Clone)]
pub struct Tuning {
    /// Per-state instance cap of the multiset construction
    #[arg(long)]
    pub multiplicity_cap: Option<usize>,
    /// Eliminate silent transitions everywhere, not only in accepting SCCs
    #[arg(long)]
    pub no_silent_scc_opt: bool,
    #[arg(long)]
    pub timeout_seconds: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct FlattenArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub value: ValueArgs,
    /// Threshold (used by the threshold and multiset routes)
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub lambda: Weight,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub value: ValueArgs,
    /// Space-separated stem letters (may be empty)
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub stem: String,
    /// Space-separated loop letters
    #[arg(long = "loop", allow_hyphen_values = true)]
    pub cycle: String,
}

#[derive(Args, Debug, Clone)]
pub struct MonitorArgs {
    pub input: PathBuf,
    /// Child value function: Min, Max, SumB, Sum+, Sum-
    #[arg(long = "g")]
    pub g: FiniteKind,
    #[arg(long, allow_hyphen_values = true)]
    pub bound: Option<Weight>,
    /// Parent value function used for the running aggregate
    #[arg(long = "f", default_value = "LimSupAvg")]
    pub f: InfiniteValueFn,
    /// Space-separated prefix letters
    #[arg(long, allow_hyphen_values = true)]
    pub word: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Response time A(n, k)
    Rt,
    /// Resource consumption B(n, k)
    Rc,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    /// Output file; standard output if absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    pub input: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Empty,
    Universal,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    pub family: Family,
    #[arg(long)]
    pub nmax: usize,
    #[arg(long)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value = "empty")]
    pub problem: Problem,
    /// Parent value function; defaults to Sup
    #[arg(long = "f")]
    pub f: Option<InfiniteValueFn>,
    /// Child value function; defaults to Sum+ for rt and Max for rc
    #[arg(long = "g")]
    pub g: Option<FiniteKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub bound: Option<Weight>,
    /// Threshold; defaults to k
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<Weight>,
    #[arg(long)]
    pub multiplicity_cap: Option<usize>,
    #[arg(long)]
    pub no_silent_scc_opt: bool,
    /// Per-instance budget
    #[arg(long, default_value_t = 300.0)]
    pub timeout_seconds: f64,
}

/// A failure with its exit code; the message goes to standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unsupported(_) | Error::Undecidable(_) => EXIT_UNSUPPORTED,
            Error::Timeout => EXIT_TIMEOUT,
            Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Runs one invocation; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut buf = String::new();
    let result = dispatch(cli.command, &mut buf);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut String) -> Outcome {
    match cmd {
        Command::Empty(a) => decide(a, false, out),
        Command::Universal(a) => decide(a, true, out),
        Command::Flatten(a) => flatten(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Monitor(a) => monitor(a, out),
        Command::Gen(a) => generate(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

/// Builds `g`, enforcing that a bound is given exactly for SumB.
pub fn finite_fn(kind: FiniteKind, bound: Option<&Weight>) -> Result<FiniteValueFn, Failure> {
    match (kind, bound) {
        (FiniteKind::SumB, Some(b)) => {
            FiniteValueFn::sum_b(b.clone()).map_err(|e| Failure::usage(e.to_string()))
        }
        (FiniteKind::SumB, None) => Err(Failure::usage("--g SumB requires --bound")),
        (_, Some(_)) => Err(Failure::usage("--bound is only meaningful with --g SumB")),
        (FiniteKind::Min, None) => Ok(FiniteValueFn::Min),
        (FiniteKind::Max, None) => Ok(FiniteValueFn::Max),
        (FiniteKind::SumPlus, None) => Ok(FiniteValueFn::SumPlus),
        (FiniteKind::SumMinus, None) => Ok(FiniteValueFn::SumMinus),
    }
}

fn load(path: &Path) -> Result<NestedAutomaton, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_nqa(&text).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", path.display()),
    })
}

fn options(t: &Tuning) -> Result<DecisionOptions, Failure> {
    let mut limits = Limits::none();
    if let Some(s) = t.timeout_seconds {
        let d = Duration::try_from_secs_f64(s)
            .map_err(|_| Failure::usage("--timeout-seconds must be a non-negative number"))?;
        limits = limits.with_timeout(d);
    }
    if t.multiplicity_cap == Some(0) {
        return Err(Failure::usage("--multiplicity-cap must be positive"));
    }
    Ok(DecisionOptions {
        silent_scc_opt: !t.no_silent_scc_opt,
        multiplicity_cap: t.multiplicity_cap,
        limits,
    })
}

/// Verdict line for routing errors, printed to standard output like any verdict.
fn verdict_for_error(e: &Error) -> Option<&'static str> {
    match e {
        Error::Unsupported(_) => Some("UNSUPPORTED-OPEN"),
        Error::Undecidable(_) => Some("UNDECIDABLE"),
        Error::Timeout => Some("TIMEOUT"),
        _ => None,
    }
}

fn decide(a: DecideArgs, universal: bool, out: &mut String) -> Outcome {
    let g = finite_fn(a.value.g, a.value.bound.as_ref())?;
    let opts = options(&a.tuning)?;
    let parse_started = Instant::now();
    let n = load(&a.input)?;
    let parse_time = parse_started.elapsed();
    let result = if universal {
        nqa_universality(&n, a.value.f, &g, &a.lambda, &opts).map(|r| {
            (
                if r.universal {
                    "UNIVERSAL"
                } else {
                    "NOT-UNIVERSAL"
                },
                r.counterexample,
                r.stats,
            )
        })
    } else {
        nqa_emptiness(&n, a.value.f, &g, &a.lambda, &opts).map(|r| {
            (
                if r.nonempty { "NONEMPTY" } else { "EMPTY" },
                r.witness,
                r.stats,
            )
        })
    };
    match result {
        Ok((verdict, lasso, mut stats)) => {
            stats.phases.insert(0, ("parse", parse_time));
            writeln!(out, "{verdict}").unwrap();
            if a.witness && matches!(verdict, "NONEMPTY" | "NOT-UNIVERSAL") {
                match lasso {
                    Some(l) => writeln!(out, "{}", l.display(n.alphabet())).unwrap(),
                    None => writeln!(
                        out,
                        "witness: none (the supremum is not attained by a lasso)"
                    )
                    .unwrap(),
                }
            }
            if a.stats {
                write_stats(out, &stats);
            }
            Ok(())
        }
        Err(e) => {
            if let Some(v) = verdict_for_error(&e) {
                writeln!(out, "{v}").unwrap();
            }
            Err(e.into())
        }
    }
}

fn write_stats(out: &mut String, s: &Stats) {
    if let Some(r) = s.route {
        writeln!(out, "route: {r}").unwrap();
    }
    writeln!(out, "flattened states: {}", s.flattened_states).unwrap();
    writeln!(out, "flattened transitions: {}", s.flattened_transitions).unwrap();
    writeln!(out, "qa states: {}", s.qa_states).unwrap();
    writeln!(out, "qa transitions: {}", s.qa_transitions).unwrap();
    for (name, d) in &s.phases {
        writeln!(out, "time {name}: {:.6}s", d.as_secs_f64()).unwrap();
    }
}

fn flatten(a: FlattenArgs, out: &mut String) -> Outcome {
    let g = finite_fn(a.value.g, a.value.bound.as_ref())?;
    let opts = options(&a.tuning)?;
    let n = load(&a.input)?;
    let q = flatten_for(&n, a.value.f, &g, &a.lambda, &opts).map_err(|e| {
        if let Some(v) = verdict_for_error(&e) {
            writeln!(out, "{v}").unwrap();
        }
        Failure::from(e)
    })?;
    out.push_str(&serialize_automaton(&q));
    Ok(())
}

fn eval(a: EvalArgs, out: &mut String) -> Outcome {
    let g = finite_fn(a.value.g, a.value.bound.as_ref())?;
    let n = load(&a.input)?;
    let lasso =
        Lasso::parse(n.alphabet(), &a.stem, &a.cycle).map_err(|e| Failure::usage(e.to_string()))?;
    let v = if n.is_deterministic() {
        nqa_eval_lasso(&n, a.value.f, &g, &lasso)?
    } else {
        nqa_eval_lasso_nondet(&n, a.value.f, &g, &lasso, EVAL_BUDGET)?
    };
    writeln!(out, "{v}").unwrap();
    Ok(())
}

fn monitor(a: MonitorArgs, out: &mut String) -> Outcome {
    let g = finite_fn(a.g, a.bound.as_ref())?;
    let n = load(&a.input)?;
    let word = a
        .word
        .split_whitespace()
        .map(|l| {
            n.parent()
                .letter_index(l)
                .ok_or_else(|| Failure::usage(format!("unknown letter `{l}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let r = monitor_prefix(&n, &g, &word)?;
    let values = r.values();
    let shown: Vec<String> = values.iter().map(ToString::to_string).collect();
    writeln!(out, "returned: [{}]", shown.join(", ")).unwrap();
    writeln!(out, "active: {}", r.still_active).unwrap();
    if !r.stuck.is_empty() {
        let pos: Vec<String> = r.stuck.iter().map(ToString::to_string).collect();
        writeln!(out, "stuck children spawned at: {}", pos.join(" ")).unwrap();
    }
    if let Some(pos) = r.parent_stuck_at {
        writeln!(out, "parent stuck at position {pos}").unwrap();
    }
    match running_aggregate(a.f, &values) {
        Ok(v) => writeln!(out, "running {}: {v}", a.f).unwrap(),
        Err(_) => writeln!(out, "running {}: undefined", a.f).unwrap(),
    }
    Ok(())
}

fn instance(family: Family, n: usize, k: usize) -> Result<NestedAutomaton, Failure> {
    Ok(match family {
        Family::Rt => gen_response(RtParams::new(n, k).map_err(|e| Failure::usage(e.to_string()))?),
        Family::Rc => gen_resource(RcParams::new(n, k).map_err(|e| Failure::usage(e.to_string()))?),
    })
}

fn generate(a: GenArgs, out: &mut String) -> Outcome {
    let text = serialize_nqa(&instance(a.family, a.n, a.k)?);
    match a.out {
        Some(path) => std::fs::write(&path, text).map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            out.push_str(&text);
            Ok(())
        }
    }
}

fn validate(a: ValidateArgs, out: &mut String) -> Outcome {
    let n = load(&a.input)?;
    for d in validate_nqa(&n) {
        writeln!(out, "{d}").unwrap();
    }
    writeln!(out, "OK").unwrap();
    writeln!(out, "parent states: {}", n.parent().num_states()).unwrap();
    writeln!(out, "children: {}", n.num_children()).unwrap();
    for (j, c) in n.children().iter().enumerate() {
        writeln!(out, "child {} states: {}", j + 1, c.num_states()).unwrap();
    }
    writeln!(out, "letters: {}", n.num_letters()).unwrap();
    writeln!(
        out,
        "deterministic: {}",
        if n.is_deterministic() { "yes" } else { "no" }
    )
    .unwrap();
    Ok(())
}

/// One CSV row of a benchmark sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub verdict: String,
    pub states: usize,
    pub transitions: usize,
    pub seconds: f64,
}

pub const BENCH_HEADER: &str = "n,k,verdict,states,transitions,seconds";

/// Runs the sweep; instances that exceed the budget report `TIMEOUT`.
pub fn bench_rows(a: &BenchArgs) -> Result<Vec<BenchRow>, Failure> {
    let f = a.f.unwrap_or(InfiniteValueFn::Sup);
    let kind = a.g.unwrap_or(match a.family {
        Family::Rt => FiniteKind::SumPlus,
        Family::Rc => FiniteKind::Max,
    });
    let g = finite_fn(kind, a.bound.as_ref())?;
    let mut rows = Vec::new();
    for n in 1..=a.nmax {
        for k in 1..=a.kmax {
            if a.family == Family::Rt && k < n {
                continue;
            }
            let nqa = instance(a.family, n, k)?;
            let lambda = a
                .lambda
                .clone()
                .unwrap_or_else(|| Weight::from_int(k as i64));
            let opts = options(&Tuning {
                multiplicity_cap: a.multiplicity_cap,
                no_silent_scc_opt: a.no_silent_scc_opt,
                timeout_seconds: Some(a.timeout_seconds),
            })?;
            let start = Instant::now();
            let result = match a.problem {
                Problem::Empty => nqa_emptiness(&nqa, f, &g, &lambda, &opts)
                    .map(|r| (if r.nonempty { "NONEMPTY" } else { "EMPTY" }, r.stats)),
                Problem::Universal => nqa_universality(&nqa, f, &g, &lambda, &opts).map(|r| {
                    (
                        if r.universal {
                            "UNIVERSAL"
                        } else {
                            "NOT-UNIVERSAL"
                        },
                        r.stats,
                    )
                }),
            };
            let seconds = start.elapsed().as_secs_f64();
            let (verdict, stats) = match result {
                Ok((v, s)) => (v.to_string(), s),
                Err(e) => match verdict_for_error(&e) {
                    Some(v) => (v.to_string(), Stats::default()),
                    None => return Err(e.into()),
                },
            };
            rows.push(BenchRow {
                n,
                k,
                verdict,
                states: stats.flattened_states,
                transitions: stats.flattened_transitions,
                seconds,
            });
        }
    }
    Ok(rows)
}

fn bench(a: BenchArgs, out: &mut String) -> Outcome {
    writeln!(out, "{BENCH_HEADER}").unwrap();
    for r in bench_rows(&a)? {
        writeln!(
            out,
            "{},{},{},{},{},{:.6}",
            r.n, r.k, r.verdict, r.states, r.transitions, r.seconds
        )
        .unwrap();
    }
    Ok(())
}
