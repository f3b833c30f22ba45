//! `skinet` — verify skillset models through their generated Petri net.
//!
//! Subcommands: `check` runs the verification pipeline and reports
//! verdicts, `export` writes the net in Tina textual format, `graph` dumps
//! the reachability graph as DOT, `oracle` cross-checks the net against the
//! direct interpreter of the skillset semantics.
//!
//! Exit codes: 0 all requested checks passed; 1 at least one check failed;
//! 2 input error (unreadable file, syntax or validation error); 3 state
//! limit exceeded; 4 output error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use skinet_core::build::{build_net, BuildOptions, BuildReport};
use skinet_core::checks::{
    check_dead, check_deadset, check_deadskill, check_live, check_safe, CheckError,
};
use skinet_core::explore::{explore, ExploreError, ExploreOptions, ReachabilityGraph};
use skinet_core::export::{export_net, to_dot, ExportOptions};
use skinet_core::model::Skillset;
use skinet_core::net::PetriNet;
use skinet_core::oracle::{check_equivalence, explore_direct, EquivalenceError};
use skinet_core::parser::parse_skillset;
use skinet_core::report::{CheckReport, FindingReport, Report};
use skinet_core::validate::validate;

#[derive(Parser)]
#[command(
    name = "skinet",
    version,
    about = "Skillset verification through Petri nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, build, explore and run the requested checks.
    Check(CheckArgs),
    /// Write the generated Petri net in Tina textual format.
    Export(ExportArgs),
    /// Dump the reachability graph in Graphviz DOT format.
    Graph(GraphArgs),
    /// Cross-check the net against the direct skillset interpreter.
    Oracle(OracleArgs),
}

#[derive(Args, Clone, Copy)]
struct BuildFlags {
    /// Do not translate events.
    #[arg(long)]
    no_events: bool,
    /// Drop exit places: terminations go straight back to the entry place
    /// and no reset transitions are generated.
    #[arg(long)]
    no_exit_places: bool,
    /// Require guarded-and-affected resources to move along declared
    /// state-machine transitions.
    #[arg(long)]
    strict_moves: bool,
}

impl BuildFlags {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            include_events: !self.no_events,
            keep_exit_places: !self.no_exit_places,
            strict_resource_moves: self.strict_moves,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CheckArgs {
    /// Skillset specification file.
    input: PathBuf,
    /// Check for reachable deadlocks.
    #[arg(long)]
    dead: bool,
    /// List dead (never fireable) transitions.
    #[arg(long)]
    live: bool,
    /// Check the resource/skill token invariants and 1-safety.
    #[arg(long)]
    safe: bool,
    /// Check that a skill (or every skill, with no value or 'all') can
    /// always eventually run.
    #[arg(long, value_name = "SKILL", num_args = 0..=1, default_missing_value = "all")]
    deadskill: Option<String>,
    /// Check that from every reachable state some skill can eventually run.
    #[arg(long)]
    deadset: bool,
    /// Run every check (default when no check is selected).
    #[arg(long)]
    all: bool,
    /// Also run the interpreter-equivalence self-check.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    build: BuildFlags,
    /// Maximum number of reachable states to explore.
    #[arg(long, default_value_t = 1_000_000)]
    limit: usize,
    /// Report rendering on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the JSON report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also export the net in Tina format to this file.
    #[arg(long)]
    net: Option<PathBuf>,
    /// Also dump the reachability graph as DOT to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Use bare state names in the net export.
    #[arg(long)]
    bare_state_names: bool,
    /// Emit the priority relation as one grouped line in the net export.
    #[arg(long)]
    pr_grouped: bool,
}

#[derive(Args)]
struct ExportArgs {
    /// Skillset specification file.
    input: PathBuf,
    /// Output path for the Tina-format net (standard output if omitted).
    #[arg(long)]
    net: Option<PathBuf>,
    /// Use bare state names instead of resource-qualified ones.
    #[arg(long)]
    bare_state_names: bool,
    /// Emit the priority relation as one grouped line.
    #[arg(long)]
    pr_grouped: bool,
    #[command(flatten)]
    build: BuildFlags,
}

#[derive(Args)]
struct GraphArgs {
    /// Skillset specification file.
    input: PathBuf,
    /// Output path for the DOT dump (standard output if omitted).
    #[arg(long)]
    dot: Option<PathBuf>,
    #[command(flatten)]
    build: BuildFlags,
    /// Maximum number of reachable states to explore.
    #[arg(long, default_value_t = 1_000_000)]
    limit: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// Skillset specification file.
    input: PathBuf,
    #[command(flatten)]
    build: BuildFlags,
    /// Maximum number of states to explore on either side.
    #[arg(long, default_value_t = 1_000_000)]
    limit: usize,
    /// Result rendering on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_OUTPUT_ERROR: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT_ERROR,
            message: message.into(),
        }
    }

    fn output(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_OUTPUT_ERROR,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => run_check(&args),
        Command::Export(args) => run_export(&args),
        Command::Graph(args) => run_graph(&args),
        Command::Oracle(args) => run_oracle(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("skinet: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// Load, parse and validate the input file. Validation warnings go to
/// standard error; errors are fatal.
fn load(path: &Path) -> Result<Skillset, Failure> {
    let source = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let skillset =
        parse_skillset(&source).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let report = validate(&skillset);
    for warning in &report.warnings {
        eprintln!("skinet: warning: {warning}");
    }
    if !report.is_valid() {
        for error in &report.errors {
            eprintln!("skinet: error: {error}");
        }
        return Err(Failure::input(format!(
            "{} validation error(s) in {}",
            report.errors.len(),
            path.display()
        )));
    }
    Ok(skillset)
}

fn build(skillset: &Skillset, options: &BuildOptions) -> Result<(PetriNet, BuildReport), Failure> {
    build_net(skillset, options).map_err(|e| Failure::input(format!("cannot build net: {e}")))
}

fn explore_or_fail(net: &PetriNet, limit: usize) -> Result<ReachabilityGraph, Failure> {
    explore(
        net,
        &ExploreOptions {
            state_limit: limit,
            record_safety_violations: false,
        },
    )
    .map_err(|e| match e {
        ExploreError::StateLimitExceeded { .. } => Failure {
            code: EXIT_LIMIT,
            message: e.to_string(),
        },
        ExploreError::SafetyViolation { .. } => Failure {
            code: EXIT_OUTPUT_ERROR,
            message: format!("internal error, the generated net is not 1-safe: {e}"),
        },
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::output(format!("cannot write {}: {e}", path.display())))
}

fn run_check(args: &CheckArgs) -> Result<u8, Failure> {
    let skillset = load(&args.input)?;
    let options = args.build.options();
    let (net, build_report) = build(&skillset, &options)?;
    let graph = explore_or_fail(&net, args.limit)?;

    let no_check_selected = !(args.dead
        || args.live
        || args.safe
        || args.deadskill.is_some()
        || args.deadset
        || args.oracle);
    let run_all = args.all || (no_check_selected && args.net.is_none() && args.dot.is_none());

    let mut report = Report::new(&skillset.name, build_report, &graph);

    if run_all || args.dead {
        report.push_check(&net, &graph, &check_dead(&net, &graph));
    }
    if run_all || args.live {
        report.push_check(&net, &graph, &check_live(&net, &graph));
    }
    if run_all || args.safe {
        report.push_check(&net, &graph, &check_safe(&net, &graph));
    }
    let deadskill_targets: Vec<String> = match (&args.deadskill, run_all) {
        (Some(name), _) if name != "all" => vec![name.clone()],
        (Some(_), _) | (None, true) => skillset.skills.iter().map(|s| s.name.clone()).collect(),
        (None, false) => Vec::new(),
    };
    for skill in &deadskill_targets {
        let result = check_deadskill(&net, &graph, skill).map_err(|e| match e {
            CheckError::UnknownSkill { .. } => Failure::input(e.to_string()),
        })?;
        report.push_check(&net, &graph, &result);
    }
    if run_all || args.deadset {
        report.push_check(&net, &graph, &check_deadset(&net, &graph));
    }
    if args.oracle {
        let oracle = oracle_check(&skillset, &net, &graph, &options, args.limit)?;
        report.checks.push(oracle);
    }

    if let Some(path) = &args.net {
        let export_options = ExportOptions {
            bare_state_names: args.bare_state_names,
            grouped_priorities: args.pr_grouped,
        };
        let text = export_net(&net, &export_options).map_err(|e| Failure::output(e.to_string()))?;
        write_file(path, &text)?;
    }
    if let Some(path) = &args.dot {
        write_file(path, &to_dot(&net, &graph))?;
    }
    if let Some(path) = &args.report {
        write_file(path, &report.to_json())?;
    }

    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }

    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn oracle_check(
    skillset: &Skillset,
    net: &PetriNet,
    graph: &ReachabilityGraph,
    options: &BuildOptions,
    limit: usize,
) -> Result<CheckReport, Failure> {
    let lts = explore_direct(skillset, options, limit).map_err(|e| Failure {
        code: EXIT_LIMIT,
        message: e.to_string(),
    })?;
    let outcome = check_equivalence(&lts, graph, net, skillset);
    let findings = match &outcome {
        Ok(()) => Vec::new(),
        Err(EquivalenceError::OptionMismatch) => {
            return Err(Failure::output(
                "internal error: oracle ran with different options than the net",
            ))
        }
        Err(EquivalenceError::Mismatch(message)) => vec![FindingReport {
            subject: "equivalence".into(),
            message: message.clone(),
            state: None,
            path: None,
        }],
    };
    Ok(CheckReport {
        name: "oracle".into(),
        formula: "net ≍ direct interpreter (state bijection and labeled edge correspondence)"
            .into(),
        verdict: if outcome.is_ok() { "pass" } else { "fail" }.into(),
        findings,
        elapsed_ms: 0,
    })
}

fn run_export(args: &ExportArgs) -> Result<u8, Failure> {
    let skillset = load(&args.input)?;
    let (net, _) = build(&skillset, &args.build.options())?;
    let text = export_net(
        &net,
        &ExportOptions {
            bare_state_names: args.bare_state_names,
            grouped_priorities: args.pr_grouped,
        },
    )
    .map_err(|e| Failure::output(e.to_string()))?;
    match &args.net {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn run_graph(args: &GraphArgs) -> Result<u8, Failure> {
    let skillset = load(&args.input)?;
    let (net, _) = build(&skillset, &args.build.options())?;
    let graph = explore_or_fail(&net, args.limit)?;
    let dot = to_dot(&net, &graph);
    match &args.dot {
        Some(path) => write_file(path, &dot)?,
        None => print!("{dot}"),
    }
    Ok(EXIT_OK)
}

fn run_oracle(args: &OracleArgs) -> Result<u8, Failure> {
    let skillset = load(&args.input)?;
    let options = args.build.options();
    let (net, _) = build(&skillset, &options)?;
    let graph = explore_or_fail(&net, args.limit)?;
    let lts = explore_direct(&skillset, &options, args.limit).map_err(|e| Failure {
        code: EXIT_LIMIT,
        message: e.to_string(),
    })?;
    let outcome = check_equivalence(&lts, &graph, &net, &skillset);

    match args.format {
        Format::Text => match &outcome {
            Ok(()) => println!(
                "equivalent: {} states, {} edges match the direct interpreter",
                graph.state_count(),
                graph.edge_count()
            ),
            Err(e) => println!("not equivalent: {e}"),
        },
        Format::Json => {
            let value = serde_json::json!({
                "equivalent": outcome.is_ok(),
                "states": graph.state_count(),
                "mismatch": outcome.as_ref().err().map(|e| e.to_string()),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("serializes")
            );
        }
    }
    Ok(if outcome.is_ok() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}
