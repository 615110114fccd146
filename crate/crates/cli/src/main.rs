//! `contractlab`: generate contract-design instances, solve them exactly,
//! run the verification suites, and estimate tail probabilities.
//!
//! Exit codes: 0 success, 1 property violation, 2 input error, 3 cap
//! exceeded. `CONTRACTLAB_THREADS` bounds the worker pool.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use contractlab_core::cliquereduce::{
    approx_clique, distinguish_outcome, ContractOracle, ExactOracle, WorstConformingOracle,
};
use contractlab_core::error::Error;
use contractlab_core::gadgets::{
    clique_xos_instance, hidden_set_instance, hidden_set_instance_seeded,
    multiaction_submodular_gadget, multiagent_submodular_gadget, planted_cover_coverage,
    Formula3Cnf5, KProverCoverage, KProverParams,
};
use contractlab_core::io;
use contractlab_core::multiaction;
use contractlab_core::multiagent;
use contractlab_core::setfn::SetFunction;
use contractlab_core::value::{Rational, Value};
use contractlab_core::verify;

#[derive(Parser)]
#[command(name = "contractlab", version, about)]
struct Cli {
    /// Seed for all randomized work (fully determines the run)
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Trial count override for Monte-Carlo style checks
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Refuse instances whose ground set exceeds this size
    #[arg(long = "cap-n", global = true)]
    cap_n: Option<usize>,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file exactly
    Solve(SolveArgs),
    /// Generate an instance or gadget as JSON
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Run a verification suite ("all" runs every suite); emits CSV
    Verify(VerifyArgs),
    /// Monte-Carlo estimate of the successful-query probability
    EstimateSuccess(EstimateArgs),
    /// Clique classification and approximation through contract oracles
    #[command(subcommand)]
    Clique(CliqueCmd),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON path
    #[arg(long)]
    instance: PathBuf,
    /// Expected model; mismatch is an input error
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Restrict the multi-agent search to sets of at most this size
    #[arg(long)]
    size_cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "multi-agent")]
    MultiAgent,
    #[value(name = "multi-action")]
    MultiAction,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Hidden-set instance on a perfect-cube ground set
    HiddenSet(HiddenSetArgs),
    /// Clique XOS gadget instance for a graph
    CliqueXos(CliqueXosArgs),
    /// Planted-cover coverage function plus its planted set
    PlantedCover(PlantedArgs),
    /// Multi-agent uniform-cost gadget over a planted cover
    AgentGadget(PlantedArgs),
    /// Multi-action gadget over a planted cover with one fresh action
    ActionGadget(ActionGadgetArgs),
    /// Prover-protocol coverage function from a 3CNF-5 formula
    Kprover(KproverArgs),
    /// The built-in three-variable satisfiable 3CNF-5 formula
    TinyFormula,
}

#[derive(Args)]
struct HiddenSetArgs {
    #[arg(long)]
    n: usize,
    /// Explicit good set as 1-based indices, e.g. "1,2"
    #[arg(long, value_delimiter = ',')]
    good: Option<Vec<usize>>,
}

#[derive(Args)]
struct CliqueXosArgs {
    /// Graph JSON path
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    delta: usize,
    /// Approximation parameter as an exact rational, e.g. "1/2"
    #[arg(long)]
    beta: String,
    /// Divide values and costs by f(V') so they live in [0, 1]
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct PlantedArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    copies: usize,
}

#[derive(Args)]
struct ActionGadgetArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Approximation parameter in (0, 1/12), e.g. "1/20"
    #[arg(long)]
    beta: String,
}

#[derive(Args)]
struct KproverArgs {
    /// Formula JSON path
    #[arg(long)]
    formula: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    ell: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or "all"
    suite: String,
}

#[derive(Args)]
struct EstimateArgs {
    /// Ground set size (perfect cube)
    #[arg(long)]
    n: usize,
    /// Query size; defaults to floor(m^1.5)
    #[arg(long)]
    set_size: Option<usize>,
}

#[derive(Subcommand)]
enum CliqueCmd {
    /// Estimate the clique number by sweeping doubling thresholds
    Approx(CliqueArgs),
    /// Classify the clique number against one threshold
    Distinguish(DistinguishArgs),
}

#[derive(Args)]
struct CliqueArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    beta: String,
    #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
    oracle: OracleArg,
}

#[derive(Args)]
struct DistinguishArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    beta: String,
    #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
    oracle: OracleArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    /// The exact envelope solver
    Exact,
    /// Worst change-point share still meeting the declared beta
    Worst,
}

enum Failure {
    Violation(String),
    Input(String),
    Cap(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CmdResult = Result<String, Failure>;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CONTRACTLAB_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    let result = dispatch(&cli);
    match result {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &output) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{output}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Solve(args) => cmd_solve(cli, args),
        Command::Generate(kind) => cmd_generate(cli, kind),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::EstimateSuccess(args) => cmd_estimate(cli, args),
        Command::Clique(sub) => cmd_clique(cli, sub),
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_rational(text: &str, what: &str) -> Result<Rational, Failure> {
    match Value::parse_exact(text) {
        Some(Value::Exact(r)) => Ok(r),
        _ => Err(Failure::Input(format!(
            "{what} must be an exact rational like 1/2, got '{text}'"
        ))),
    }
}

fn check_cap(cli: &Cli, n: usize) -> Result<(), Failure> {
    if let Some(cap) = cli.cap_n {
        if n > cap {
            return Err(Failure::Cap(format!(
                "instance has {n} items, above the requested cap {cap}"
            )));
        }
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> CmdResult {
    let text = read_file(&args.instance)?;
    let parsed = io::instance_from_json(&text).map_err(Failure::from)?;
    if let Some(model) = args.model {
        let expected = match model {
            ModelArg::MultiAgent => "multi-agent",
            ModelArg::MultiAction => "multi-action",
        };
        if parsed.model_name() != expected {
            return Err(Failure::Input(format!(
                "instance is {}, expected {expected}",
                parsed.model_name()
            )));
        }
    }
    match parsed {
        io::ParsedInstance::MultiAgent(inst) => {
            check_cap(cli, inst.n())?;
            let sol = multiagent::solve_exact(&inst, args.size_cap).map_err(Failure::from)?;
            Ok(with_newline(io::multiagent_solution_to_json(&sol)))
        }
        io::ParsedInstance::MultiAction(inst) => {
            check_cap(cli, inst.n())?;
            let sol = multiaction::solve_exact(&inst).map_err(Failure::from)?;
            Ok(with_newline(io::multiaction_solution_to_json(&sol)))
        }
    }
}

fn cmd_generate(cli: &Cli, kind: &GenerateCmd) -> CmdResult {
    let json = match kind {
        GenerateCmd::HiddenSet(args) => {
            let inst = match &args.good {
                Some(good) => {
                    let set = io::set_from_one_based(args.n, good).map_err(Failure::from)?;
                    hidden_set_instance(args.n, set).map_err(Failure::from)?
                }
                None => hidden_set_instance_seeded(args.n, cli.seed).map_err(Failure::from)?,
            };
            io::multiagent_instance_to_json(&inst)
        }
        GenerateCmd::CliqueXos(args) => {
            let graph = io::graph_from_json(&read_file(&args.graph)?).map_err(Failure::from)?;
            let beta = parse_rational(&args.beta, "beta")?;
            let (inst, _) = clique_xos_instance(&graph, args.delta, &beta, args.normalize)
                .map_err(Failure::from)?;
            io::multiaction_instance_to_json(&inst)
        }
        GenerateCmd::PlantedCover(args) => {
            let (cov, planted) =
                planted_cover_coverage(args.k, args.copies).map_err(Failure::from)?;
            let f = SetFunction::coverage(cov);
            let doc = serde_json::json!({
                "planted": io::indices_one_based(&planted),
                "f": serde_json::from_str::<serde_json::Value>(&io::set_function_to_json(&f))
                    .expect("descriptor is valid json"),
            });
            serde_json::to_string_pretty(&doc).expect("document serializes")
        }
        GenerateCmd::AgentGadget(args) => {
            let (cov, _) = planted_cover_coverage(args.k, args.copies).map_err(Failure::from)?;
            let inst = multiagent_submodular_gadget(args.k, cov).map_err(Failure::from)?;
            io::multiagent_instance_to_json(&inst)
        }
        GenerateCmd::ActionGadget(args) => {
            let beta = parse_rational(&args.beta, "beta")?;
            let (cov, _) = planted_cover_coverage(args.k, args.copies).map_err(Failure::from)?;
            let (inst, _) =
                multiaction_submodular_gadget(args.k, cov, &beta).map_err(Failure::from)?;
            io::multiaction_instance_to_json(&inst)
        }
        GenerateCmd::Kprover(args) => {
            let formula =
                io::formula_from_json(&read_file(&args.formula)?).map_err(Failure::from)?;
            let params = KProverParams::greedy(args.k, args.ell).map_err(Failure::from)?;
            let cov = KProverCoverage::build(formula, params).map_err(Failure::from)?;
            let f = SetFunction::coverage(cov.coverage().clone());
            let doc = serde_json::json!({
                "k_prime": cov.k_prime(),
                "questions": cov.question_count(),
                "random_states": cov.randomness_count(),
                "assignments": cov.assignment_count(),
                "universe": cov.universe_size(),
                "f": serde_json::from_str::<serde_json::Value>(&io::set_function_to_json(&f))
                    .expect("descriptor is valid json"),
            });
            serde_json::to_string_pretty(&doc).expect("document serializes")
        }
        GenerateCmd::TinyFormula => io::formula_to_json(&Formula3Cnf5::tiny_satisfiable()),
    };
    Ok(with_newline(json))
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> CmdResult {
    let suites = if args.suite == "all" {
        verify::run_all(cli.seed, cli.trials)
    } else {
        match verify::run_suite(&args.suite, cli.seed, cli.trials) {
            Some(s) => vec![s],
            None => {
                return Err(Failure::Input(format!(
                    "unknown suite '{}'; available: all, {}",
                    args.suite,
                    verify::SUITE_NAMES.join(", ")
                )))
            }
        }
    };
    let mut csv = String::from("suite,check,status,detail\n");
    let mut violations = Vec::new();
    for suite in &suites {
        for check in &suite.checks {
            let status = if check.pass { "pass" } else { "fail" };
            csv.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(suite.name),
                csv_field(&check.name),
                status,
                csv_field(&check.detail)
            ));
            if !check.pass {
                violations.push(format!("{} / {}", suite.name, check.name));
            }
        }
    }
    if violations.is_empty() {
        Ok(csv)
    } else {
        // still emit the table so the failure is inspectable
        if let Some(path) = &cli.out {
            let _ = fs::write(path, &csv);
        } else {
            print!("{csv}");
        }
        Err(Failure::Violation(violations.join("; ")))
    }
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> CmdResult {
    let trials = cli.trials.unwrap_or(100_000);
    let m = (args.n as f64).cbrt().round() as usize;
    let set_size = args
        .set_size
        .unwrap_or_else(|| ((m as f64).powf(1.5)).floor() as usize);
    let est =
        verify::estimate_success_rate(args.n, set_size, trials, cli.seed).map_err(Failure::from)?;
    if !est.bound_applicable {
        eprintln!(
            "warning: the tail bound is only claimed for n >= 512 (got n = {})",
            args.n
        );
    }
    Ok(with_newline(
        serde_json::to_string_pretty(&est).expect("estimate serializes"),
    ))
}

fn cmd_clique(cli: &Cli, sub: &CliqueCmd) -> CmdResult {
    match sub {
        CliqueCmd::Approx(args) => {
            let graph = io::graph_from_json(&read_file(&args.graph)?).map_err(Failure::from)?;
            let beta = parse_rational(&args.beta, "beta")?;
            check_cap(cli, graph.vertex_count())?;
            let oracle = build_oracle(args.oracle, &beta)?;
            let report = approx_clique(&graph, &beta, oracle.as_ref()).map_err(Failure::from)?;
            let rounds: Vec<serde_json::Value> = report
                .rounds
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "delta": r.delta,
                        "alpha": r.alpha,
                        "threshold": Value::Exact(r.threshold.clone()),
                        "verdict": r.verdict,
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "omega_estimate": report.estimate,
                "rounds": rounds,
            });
            Ok(with_newline(
                serde_json::to_string_pretty(&doc).expect("report serializes"),
            ))
        }
        CliqueCmd::Distinguish(args) => {
            let graph = io::graph_from_json(&read_file(&args.graph)?).map_err(Failure::from)?;
            let beta = parse_rational(&args.beta, "beta")?;
            check_cap(cli, graph.vertex_count())?;
            let oracle = build_oracle(args.oracle, &beta)?;
            let out = distinguish_outcome(&graph, args.delta, &beta, oracle.as_ref())
                .map_err(Failure::from)?;
            let doc = serde_json::json!({
                "delta": out.delta,
                "alpha": out.alpha,
                "threshold": Value::Exact(out.threshold.clone()),
                "verdict": out.verdict,
            });
            Ok(with_newline(
                serde_json::to_string_pretty(&doc).expect("report serializes"),
            ))
        }
    }
}

fn build_oracle(kind: OracleArg, beta: &Rational) -> Result<Box<dyn ContractOracle>, Failure> {
    match kind {
        OracleArg::Exact => Ok(Box::new(ExactOracle)),
        OracleArg::Worst => Ok(Box::new(
            WorstConformingOracle::new(beta.clone()).map_err(Failure::from)?,
        )),
    }
}
