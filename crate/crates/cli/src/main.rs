use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use regbundle::dsl::{self, render_diagnostics};
use regbundle::explorer::{
    self, export_dot, export_json, query_reach, state_from_json, state_to_json, ExploreError,
    DEFAULT_MAX_STATES,
};
use regbundle::render::render_svg;
use regbundle::{BundleState, ExploreLimits, Model, StateGraph};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "regbundle", version, about = "Explore spatial bundles of regulatory modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and report diagnostics
    Validate { file: PathBuf },
    /// List the one-step successors of the initial (or given) state as JSON
    Successors {
        file: PathBuf,
        /// State as inline JSON or a path to a JSON file
        #[arg(long)]
        state: Option<String>,
    },
    /// Build the reachable state graph and print a summary
    Explore {
        file: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        /// Write the graph as JSON to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a shortest trace to a state satisfying a predicate
    Query {
        file: PathBuf,
        #[arg(long)]
        reach: String,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Write the explored graph in DOT format
    Export {
        file: PathBuf,
        #[arg(long)]
        dot: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Draw a state as SVG
    Render {
        file: PathBuf,
        /// State as inline JSON or a path to a JSON file
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_STATES, value_parser = clap::value_parser!(u64).range(1..).map(|n| n as usize))]
    max_states: usize,
    /// Worker threads; the result does not depend on this
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..).map(|n| n as usize))]
    jobs: usize,
}

impl LimitArgs {
    fn limits(&self) -> ExploreLimits {
        ExploreLimits {
            max_states: self.max_states,
            jobs: self.jobs,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    dsl::load(&text).map_err(|diags| {
        Failure::new(
            EXIT_DIAGNOSTICS,
            render_diagnostics(&path.display().to_string(), &diags).trim_end(),
        )
    })
}

fn load_state(model: &Model, arg: Option<&str>) -> Result<BundleState, Failure> {
    let Some(arg) = arg else {
        return Ok(model.initial().clone());
    };
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    let state = state_from_json(model, &text)
        .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("invalid state: {e}")))?;
    model
        .check_state(&state)
        .map_err(|e| Failure::new(EXIT_DIAGNOSTICS, format!("invalid state: {e}")))?;
    Ok(state)
}

/// Explore; a truncated graph is returned alongside a flag instead of an error.
fn explore(model: &Model, limits: &LimitArgs) -> Result<(StateGraph, bool), Failure> {
    match explorer::explore(model, model.initial(), limits.limits()) {
        Ok(g) => Ok((g, false)),
        Err(ExploreError::LimitExceeded { partial, .. }) => Ok((*partial, true)),
        Err(e) => Err(Failure::new(EXIT_DIAGNOSTICS, e.to_string())),
    }
}

fn limit_failure(limits: &LimitArgs) -> Failure {
    Failure::new(
        EXIT_LIMIT,
        format!("state limit of {} reached before completion", limits.max_states),
    )
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { file } => {
            load(&file)?;
            Ok(())
        }
        Command::Successors { file, state } => {
            let model = load(&file)?;
            let state = load_state(&model, state.as_deref())?;
            let list: Vec<Value> = model
                .successors(&state)
                .iter()
                .map(|(e, s)| {
                    let s: Value = serde_json::from_str(&state_to_json(&model, s))
                        .expect("state JSON is well formed");
                    json!({ "event": model.display_event(e).to_string(), "state": s })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&list).expect("serializable"));
            Ok(())
        }
        Command::Explore { file, limits, out } => {
            let model = load(&file)?;
            let (graph, truncated) = explore(&model, &limits)?;
            println!(
                "states={} edges={} truncated={}",
                graph.node_count(),
                graph.edge_count(),
                truncated
            );
            if let Some(out) = out {
                write(&out, &export_json(&graph, &model))?;
            }
            if truncated {
                return Err(limit_failure(&limits));
            }
            Ok(())
        }
        Command::Query {
            file,
            reach,
            limits,
        } => {
            let model = load(&file)?;
            let pred = dsl::parse_query(&reach, &model).map_err(|diags| {
                Failure::new(
                    EXIT_DIAGNOSTICS,
                    render_diagnostics("query", &diags).trim_end(),
                )
            })?;
            let (graph, truncated) = explore(&model, &limits)?;
            match query_reach(&graph, &model, &pred) {
                Some(trace) => {
                    let events: Vec<String> = trace
                        .iter()
                        .map(|e| model.display_event(e).to_string())
                        .collect();
                    println!("{}", serde_json::to_string(&events).expect("serializable"));
                    Ok(())
                }
                None if truncated => Err(limit_failure(&limits)),
                None => {
                    println!("unreachable");
                    Err(Failure::new(EXIT_DIAGNOSTICS, String::new()))
                }
            }
        }
        Command::Export { file, dot, limits } => {
            let model = load(&file)?;
            let (graph, truncated) = explore(&model, &limits)?;
            if truncated {
                return Err(limit_failure(&limits));
            }
            write(&dot, &export_dot(&graph, &model))
        }
        Command::Render { file, state, svg } => {
            let model = load(&file)?;
            let state = load_state(&model, state.as_deref())?;
            write(&svg, &render_svg(&model, &state))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("{}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
