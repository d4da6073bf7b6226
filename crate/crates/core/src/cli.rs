//! Command-line driver: safety checking, complete and goal-driven prefix
//! construction, goal-configuration extraction and the sequence oracle.
//!
//! Exit codes: 0 success, 1 goal unreachable (or, for `check-safe`, a safety
//! violation), 2 input error, 3 resource cap hit.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::format::{self, FormatError};
use crate::goal_driven::{self, GdOptions, Strategy};
use crate::net::{Goal, GoalMode, Net, NetError, SafeNet, SafetyReport, TransId};
use crate::occurrence::Prefix;
use crate::oracle;
use crate::reduction::{ExactOracleReducer, FlowReducer, NullReducer, Reducer};
use crate::unfolder::{self, BuildError, PrefixStats};

const EXIT_OK: i32 = 0;
const EXIT_UNREACHABLE: i32 = 1;
const EXIT_INPUT: i32 = 2;
const EXIT_RESOURCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "godunf",
    about = "Safe Petri net unfolding with goal-driven finite prefixes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct NetArgs {
    /// Net description file.
    net: PathBuf,
    /// Skip the exhaustive 1-safety check.
    #[arg(long)]
    assume_safe: bool,
    /// Marking bound for the safety check.
    #[arg(long, default_value_t = 1_000_000)]
    safety_bound: usize,
}

#[derive(Args)]
struct GoalArgs {
    /// Goal places, comma-separated; defaults to the net file's goal line.
    #[arg(long)]
    goal: Option<String>,
    /// Goal interpretation: the marking itself or a submarking.
    #[arg(long, value_parser = ["exact", "subset"])]
    goal_mode: Option<String>,
}

#[derive(Args)]
struct GdArgs {
    /// Reduction procedure.
    #[arg(long, default_value = "null", value_parser = ["null", "flow", "oracle"])]
    reducer: String,
    /// When to invoke the reduction: always, first:N or level:K.
    #[arg(long, default_value = "always")]
    strategy: String,
    /// Search bound for the oracle reducer and sequence oracle.
    #[arg(long, default_value_t = 1_000_000)]
    oracle_bound: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Write the prefix document (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a DOT rendering here.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively check 1-safety of a net.
    CheckSafe {
        /// Net description file.
        net: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        safety_bound: usize,
    },
    /// Build the finite complete prefix.
    Unfold {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build the converged goal-driven prefix.
    GdUnfold {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        goal: GoalArgs,
        #[command(flatten)]
        gd: GdArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build the goal-driven prefix and list the goal-reaching
    /// configurations it identifies, with minimality verdicts.
    MinimalConfigs {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        goal: GoalArgs,
        #[command(flatten)]
        gd: GdArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Enumerate minimal firing sequences by brute force.
    Oracle {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        goal: GoalArgs,
        /// Search bound on enumeration steps.
        #[arg(long, default_value_t = 1_000_000)]
        oracle_bound: usize,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Failure {
        Failure::new(EXIT_INPUT, e.to_string())
    }
}

impl From<NetError> for Failure {
    fn from(e: NetError) -> Failure {
        let code = match e {
            NetError::SafetyBoundExceeded { .. } => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Failure {
        Failure::new(EXIT_RESOURCE, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new(EXIT_INPUT, e.to_string())
    }
}

/// Runs the CLI on explicit arguments (the first is the program name) and
/// returns the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed.
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::CheckSafe { net, safety_bound } => {
            let doc = load(&net)?;
            match doc.net.check_safe(safety_bound) {
                SafetyReport::Safe { reachable } => {
                    println!("safe: {reachable} reachable markings");
                    Ok(EXIT_OK)
                }
                SafetyReport::Unsafe { witness } => {
                    println!(
                        "unsafe: witness: {}",
                        join_names(&doc.net, witness.iter().copied())
                    );
                    Ok(EXIT_UNREACHABLE)
                }
                SafetyReport::BoundExceeded => Err(Failure::new(
                    EXIT_RESOURCE,
                    format!("safety check exceeded {safety_bound} markings"),
                )),
            }
        }
        Command::Unfold { net, out } => {
            let doc = load(&net.net)?;
            let safe = into_safe(doc.net, &net)?;
            let started = Instant::now();
            let (prefix, stats) = unfolder::complete_prefix(&safe);
            let elapsed = started.elapsed();
            write_outputs(&prefix, &stats, &out)?;
            print_stats(&stats, elapsed.as_secs_f64());
            Ok(EXIT_OK)
        }
        Command::GdUnfold { net, goal, gd, out } => {
            let doc = load(&net.net)?;
            let goal = resolve_goal(&doc.net, doc.goal, &goal)?;
            let safe = into_safe(doc.net, &net)?;
            let reducer = make_reducer(&gd)?;
            let strategy = parse_strategy(&gd.strategy)?;
            let opts = options_from_env()?;
            let started = Instant::now();
            let (prefix, stats) = goal_driven::gd_prefix_with(
                &safe,
                &goal,
                reducer.as_ref(),
                strategy,
                &unfolder::ErvOrder::new(&safe),
                &opts,
            )?;
            let elapsed = started.elapsed();
            write_outputs(&prefix, &stats, &out)?;
            print_stats(&stats, elapsed.as_secs_f64());
            Ok(EXIT_OK)
        }
        Command::MinimalConfigs { net, goal, gd, out } => {
            let doc = load(&net.net)?;
            let goal = resolve_goal(&doc.net, doc.goal, &goal)?;
            let safe = into_safe(doc.net, &net)?;
            let reducer = make_reducer(&gd)?;
            let strategy = parse_strategy(&gd.strategy)?;
            let opts = options_from_env()?;
            let started = Instant::now();
            let (prefix, stats) = goal_driven::gd_prefix_with(
                &safe,
                &goal,
                reducer.as_ref(),
                strategy,
                &unfolder::ErvOrder::new(&safe),
                &opts,
            )?;
            let configs = goal_driven::extract_goal_configurations(&prefix, &goal, &opts)?;
            let elapsed = started.elapsed();
            write_outputs(&prefix, &stats, &out)?;
            for config in &configs {
                let verdict = if config.minimal { "minimal" } else { "not minimal" };
                println!(
                    "config: {} [{}]",
                    join_names(&safe, config.linearization.iter().copied()),
                    verdict
                );
            }
            print_stats(&stats, elapsed.as_secs_f64());
            if configs.is_empty() {
                eprintln!("goal is unreachable");
                Ok(EXIT_UNREACHABLE)
            } else {
                Ok(EXIT_OK)
            }
        }
        Command::Oracle {
            net,
            goal,
            oracle_bound,
        } => {
            let doc = load(&net.net)?;
            let goal = resolve_goal(&doc.net, doc.goal, &goal)?;
            let safe = into_safe(doc.net, &net)?;
            let sequences =
                oracle::minimal_sequences(&safe, safe.initial_marking(), &goal, oracle_bound)
                    .map_err(|e| match e {
                        oracle::OracleError::BoundExceeded { .. } => {
                            Failure::new(EXIT_RESOURCE, e.to_string())
                        }
                        other => Failure::new(EXIT_INPUT, other.to_string()),
                    })?;
            for seq in &sequences {
                println!("minimal sequence: {}", join_names(&safe, seq.iter().copied()));
            }
            if sequences.is_empty() {
                eprintln!("goal is unreachable");
                Ok(EXIT_UNREACHABLE)
            } else {
                Ok(EXIT_OK)
            }
        }
    }
}

fn load(path: &PathBuf) -> Result<format::NetDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    Ok(format::parse_net(&text)?)
}

fn into_safe(net: Net, args: &NetArgs) -> Result<SafeNet, Failure> {
    if args.assume_safe {
        return Ok(net.assume_safe());
    }
    net.into_safe(args.safety_bound).map_err(|e| match &e {
        NetError::Unsafe { .. } => Failure::new(
            EXIT_INPUT,
            format!("{e}; pass --assume-safe to override at your own risk"),
        ),
        _ => Failure::from(e),
    })
}

fn resolve_goal(net: &Net, from_doc: Option<Goal>, args: &GoalArgs) -> Result<Goal, Failure> {
    let mode = match args.goal_mode.as_deref() {
        Some("exact") => Some(GoalMode::Exact),
        Some("subset") => Some(GoalMode::Subset),
        Some(other) => {
            return Err(Failure::new(
                EXIT_INPUT,
                format!("unknown goal mode `{other}`"),
            ))
        }
        None => None,
    };
    match &args.goal {
        Some(list) => {
            let mut ids = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                ids.push(net.place(name).map_err(Failure::from)?);
            }
            Ok(Goal::new(net, ids, mode.unwrap_or(GoalMode::Subset))?)
        }
        None => match from_doc {
            Some(goal) => match mode {
                Some(mode) => Ok(Goal::new(net, goal.places().iter().copied(), mode)?),
                None => Ok(goal),
            },
            None => Err(Failure::new(
                EXIT_INPUT,
                "no goal: pass --goal or add a goal line to the net file",
            )),
        },
    }
}

fn make_reducer(args: &GdArgs) -> Result<Box<dyn Reducer>, Failure> {
    match args.reducer.as_str() {
        "null" => Ok(Box::new(NullReducer)),
        "flow" => Ok(Box::new(FlowReducer)),
        "oracle" => Ok(Box::new(ExactOracleReducer {
            state_bound: args.oracle_bound,
        })),
        other => Err(Failure::new(
            EXIT_INPUT,
            format!("unknown reducer `{other}`"),
        )),
    }
}

fn parse_strategy(text: &str) -> Result<Strategy, Failure> {
    if text == "always" {
        return Ok(Strategy::Always);
    }
    if let Some(n) = text.strip_prefix("first:") {
        let n = n
            .parse()
            .map_err(|_| Failure::new(EXIT_INPUT, format!("bad strategy `{text}`")))?;
        return Ok(Strategy::FirstN(n));
    }
    if let Some(k) = text.strip_prefix("level:") {
        let k = k
            .parse()
            .map_err(|_| Failure::new(EXIT_INPUT, format!("bad strategy `{text}`")))?;
        return Ok(Strategy::LevelAtMost(k));
    }
    Err(Failure::new(
        EXIT_INPUT,
        format!("strategy must be always, first:N or level:K, got `{text}`"),
    ))
}

/// GODUNF_ALT_CAP overrides the alternating-configuration cap.
fn options_from_env() -> Result<GdOptions, Failure> {
    let mut opts = GdOptions::default();
    if let Ok(value) = std::env::var("GODUNF_ALT_CAP") {
        opts.alt_cap = value.parse().map_err(|_| {
            Failure::new(
                EXIT_INPUT,
                format!("GODUNF_ALT_CAP must be an integer, got `{value}`"),
            )
        })?;
    }
    Ok(opts)
}

fn write_outputs(prefix: &Prefix, stats: &PrefixStats, out: &OutArgs) -> Result<(), Failure> {
    if let Some(path) = &out.out {
        let doc = format::prefix_document(prefix, stats);
        std::fs::write(path, doc.to_json())?;
    }
    if let Some(path) = &out.dot {
        std::fs::write(path, format::emit_dot(prefix))?;
    }
    Ok(())
}

fn print_stats(stats: &PrefixStats, seconds: f64) {
    println!("non-cutoff events: {}", stats.non_cutoff_events);
    println!("cutoff events: {}", stats.cutoff_events);
    println!("conditions: {}", stats.conditions);
    println!("reducer calls: {}", stats.reducer_calls);
    println!("iterations: {}", stats.iterations);
    println!("wall time: {seconds:.3}s");
}

fn join_names(net: &Net, ids: impl Iterator<Item = TransId>) -> String {
    let names: Vec<&str> = ids.map(|t| net.transition_name(t)).collect();
    if names.is_empty() {
        "(empty)".to_string()
    } else {
        names.join(" ")
    }
}
