//! `lbcast`: graph checks, simulation and fuzzing for Byzantine consensus
//! under local broadcast.
//!
//! Exit codes: 0 success, 1 property violation or shortfall, 2 usage or input
//! error, 3 internal inconsistency.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use lbcast_core::conditions::{
    classify, fmt_set, is_f_good_bruteforce, is_f_good_characterized, necessary_connectivity,
    necessary_connectivity_bound, sufficient_connectivity, F_GOOD_MAX_F, F_GOOD_MAX_NODES,
};
use lbcast_core::graph::{disjoint_paths_up_to, Graph, NodeId, NodeSet, PathError};
use lbcast_core::protocol::{format_bits, parse_bits, Bit};
use lbcast_core::simnet::{
    fuzz, message_counts, parse_node_list, run_scenario, AdversarySpec, FuzzConfig, Scenario, SimError,
};

use report::Report;

#[derive(Parser)]
#[command(name = "lbcast", version, about = "Byzantine consensus under local broadcast")]
struct Cli {
    /// Emit machine-readable key=value lines.
    #[arg(long, global = true)]
    porcelain: bool,
    /// Omit the version banner from human-readable output.
    #[arg(long, global = true)]
    no_banner: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degree, connectivity and classification of a graph for fault budget f.
    Check(CheckArgs),
    /// Run one scenario and verify the outcome.
    Simulate(SimulateArgs),
    /// Run random scenarios and verify each.
    Fuzz(FuzzArgs),
    /// List the canonical disjoint paths between two nodes.
    Paths(PathsArgs),
    /// Decide whether a graph is f-good.
    Fgood(FgoodArgs),
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    f: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "scenario")]
    graph: Option<PathBuf>,
    #[arg(long, required_unless_present = "scenario", value_parser = clap::value_parser!(u64).range(1..))]
    f: Option<u64>,
    /// Comma-separated faulty node ids.
    #[arg(long, default_value = "")]
    faulty: String,
    /// One 0/1 character per node.
    #[arg(long, required_unless_present = "scenario")]
    inputs: Option<String>,
    /// honest, silent, random, tamper[:PATHS], frame[:NODES] or worst-case:SCRIPT.
    #[arg(long, default_value = "honest")]
    adversary: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replay a scenario block instead of building one from flags.
    #[arg(long, conflicts_with_all = ["graph", "f", "inputs"])]
    scenario: Option<PathBuf>,
    /// Dump every broadcast of the run.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long)]
    trials: usize,
    #[arg(long = "n-max")]
    n_max: usize,
    #[arg(long = "f-max")]
    f_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PathsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    from: NodeId,
    #[arg(long)]
    to: NodeId,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct FgoodArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    f: u64,
    /// Print a violating F-partition when the graph is not f-good.
    #[arg(long)]
    witness: bool,
    /// Also run the exhaustive checker and compare.
    #[arg(long)]
    brute_force: bool,
}

/// A finished command: what to print and the exit code.
struct Done {
    report: Report,
    code: u8,
}

enum Failure {
    /// Bad input; exit 2.
    Usage(anyhow::Error),
    /// The tool contradicted itself; exit 3.
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Graph::parse(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn to_usize(f: u64) -> usize {
    usize::try_from(f).unwrap_or(usize::MAX)
}

fn cmd_check(args: &CheckArgs) -> Result<Done, Failure> {
    let g = load_graph(&args.graph)?;
    let f = to_usize(args.f);
    let r = classify(&g, f);
    let mut report = Report::default();
    report
        .field("nodes", g.node_count())
        .field("edges", g.edge_count())
        .field("f", f)
        .field("min_degree", r.min_degree)
        .field("connectivity", r.connectivity)
        .field("threshold", necessary_connectivity_bound(f))
        .field("necessary_connectivity", necessary_connectivity(f))
        .field("sufficient_connectivity", sufficient_connectivity(f))
        .field("necessary", r.necessary_holds)
        .field("sufficient", r.sufficient_holds)
        .field("classification", r.classification);
    if let Some(w) = &r.witness {
        report.field("witness", w);
    }
    Ok(Done { report, code: 0 })
}

fn build_scenario(args: &SimulateArgs) -> anyhow::Result<Scenario> {
    if let Some(path) = &args.scenario {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        return Scenario::parse(&text).with_context(|| format!("cannot parse {}", path.display()));
    }
    let graph = load_graph(args.graph.as_deref().expect("required by clap"))?;
    let faulty: NodeSet = parse_node_list(&args.faulty)
        .ok_or_else(|| anyhow!("bad faulty list {:?}", args.faulty))?
        .into_iter()
        .collect();
    let raw_inputs = args.inputs.as_deref().expect("required by clap");
    let inputs = parse_bits(raw_inputs).ok_or_else(|| anyhow!("bad input string {raw_inputs:?}"))?;
    let adversary: AdversarySpec = args.adversary.parse()?;
    Ok(Scenario {
        graph,
        f: to_usize(args.f.expect("required by clap")),
        faulty,
        inputs,
        adversary,
        seed: args.seed,
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Done, Failure> {
    let scenario = build_scenario(args)?;
    let (transcript, outcome) = match run_scenario(&scenario) {
        Ok(run) => run,
        Err(e @ SimError::Scenario(_)) => return Err(Failure::Usage(e.into())),
        Err(e @ SimError::Equivocation { .. }) => return Err(Failure::Internal(e.into())),
    };
    let mut report = Report::default();
    report
        .field("nodes", scenario.graph.node_count())
        .field("f", scenario.f)
        .field("faulty", fmt_set(&scenario.faulty))
        .field("inputs", format_bits(&scenario.inputs))
        .field("adversary", &scenario.adversary)
        .field("seed", scenario.seed);
    for u in scenario.graph.nodes() {
        if scenario.faulty.contains(&u) {
            report.field(format!("node.{u}.role"), "faulty");
            continue;
        }
        let decision = outcome.decisions[&u].map_or_else(|| "-".to_string(), |b: Bit| b.to_string());
        report
            .field(format!("node.{u}.decision"), decision)
            .field(format!("node.{u}.type"), outcome.node_types[&u])
            .field(format!("node.{u}.fault_set"), fmt_set(&outcome.fault_sets[&u]));
        if let Some(e) = outcome.errors.get(&u) {
            report.field(format!("node.{u}.error"), e);
        }
    }
    report.field("steps", transcript.step_count());
    for (kind, count) in message_counts(&transcript) {
        report.field(format!("messages.{kind}"), count);
    }
    report
        .field("advisory", outcome.advisory)
        .field("violations", outcome.violations.len());
    for v in &outcome.violations {
        report.field("violation", v);
    }
    let failed = !outcome.violations.is_empty();
    report.field("verdict", if failed { "violated" } else { "ok" });
    if failed {
        report.block("scenario", scenario.to_text());
    }
    if args.trace {
        report.block("transcript", transcript.export());
    }
    Ok(Done {
        report,
        code: u8::from(failed),
    })
}

fn cmd_fuzz(args: &FuzzArgs) -> Result<Done, Failure> {
    let summary = fuzz(FuzzConfig {
        trials: args.trials,
        n_max: args.n_max,
        f_max: args.f_max,
        seed: args.seed,
    })
    .map_err(anyhow::Error::from)?;
    let mut report = Report::default();
    report
        .field("trials", summary.trials)
        .field("failures", summary.failures)
        .field("advisory", summary.advisory);
    for (k, t) in &summary.by_strategy {
        report
            .field(format!("strategy.{k}.runs"), t.runs)
            .field(format!("strategy.{k}.failures"), t.failures);
    }
    for (k, t) in &summary.by_family {
        report
            .field(format!("family.{k}.runs"), t.runs)
            .field(format!("family.{k}.failures"), t.failures);
    }
    for (p, c) in &summary.by_property {
        report.field(format!("property.{p}"), c);
    }
    if let Some((scenario, violations)) = &summary.first_failure {
        for v in violations {
            report.field("violation", v);
        }
        report.block("scenario", scenario.to_text());
    }
    Ok(Done {
        report,
        code: u8::from(summary.failures > 0),
    })
}

fn cmd_paths(args: &PathsArgs) -> Result<Done, Failure> {
    let g = load_graph(&args.graph)?;
    let paths = disjoint_paths_up_to(&g, args.from, args.to, args.k).map_err(|e| match e {
        PathError::Graph(e) => anyhow!(e),
        other => anyhow!(other),
    })?;
    let mut report = Report::default();
    report
        .field("from", args.from)
        .field("to", args.to)
        .field("requested", args.k)
        .field("found", paths.len());
    for p in &paths {
        report.field(format!("path.{}", p.index), p);
    }
    let short = paths.len() < args.k;
    if short {
        report.field(
            "warning",
            format!("only {} disjoint paths exist between {} and {}", paths.len(), args.from, args.to),
        );
    }
    Ok(Done {
        report,
        code: u8::from(short),
    })
}

fn cmd_fgood(args: &FgoodArgs) -> Result<Done, Failure> {
    let g = load_graph(&args.graph)?;
    let f = to_usize(args.f);
    let characterized = is_f_good_characterized(&g, f);
    let within_cap = g.node_count() <= F_GOOD_MAX_NODES && f <= F_GOOD_MAX_F;
    if args.brute_force && !within_cap {
        return Err(Failure::Usage(anyhow!(
            "--brute-force needs n <= {F_GOOD_MAX_NODES} and f <= {F_GOOD_MAX_F}"
        )));
    }
    let exhaustive = if args.brute_force || (args.witness && !characterized && within_cap) {
        Some(is_f_good_bruteforce(&g, f).map_err(|e| Failure::Usage(e.into()))?)
    } else {
        None
    };
    let mut report = Report::default();
    report.field("f", f).field("f_good", characterized);
    if args.brute_force {
        let brute = exhaustive.as_ref().expect("computed above");
        report.field("f_good_bruteforce", brute.good);
        if brute.good != characterized {
            return Err(Failure::Internal(anyhow!(
                "checkers disagree: characterization says {characterized}, exhaustive search says {}",
                brute.good
            )));
        }
    }
    if args.witness && !characterized {
        match exhaustive.and_then(|v| v.witness) {
            Some(w) => report.field("witness", w),
            None => report.field("witness", "unavailable (graph too large for exhaustive search)"),
        };
    }
    Ok(Done { report, code: 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Paths(a) => cmd_paths(a),
        Command::Fgood(a) => cmd_fgood(a),
    };
    match result {
        Ok(done) => {
            if !cli.porcelain && !cli.no_banner {
                println!("lbcast {}", env!("CARGO_PKG_VERSION"));
            }
            print!("{}", done.report.render(cli.porcelain));
            ExitCode::from(done.code)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}
