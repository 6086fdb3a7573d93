//! `bblab`: generate instances, check trees, run branch and bound, search
//! for minimal trees, sweep experiments and run the acceptance suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use bblab::experiment::{self, ExperimentConfig};
use bblab::instances::{
    gen_cross_polytope, gen_packing_family, gen_perturbed_cross, gen_set_cover, gen_tsp_subtour, CrossSpec, Mode,
    PackingSpec, PerturbedSpec, TspSpec,
};
use bblab::io;
use bblab::lp::Polytope;
use bblab::rational::Rational;
use bblab::search::{
    min_tree_size, run_bb, separation_resistance, BranchStrategy, RunStatus, SearchBudget, BOUNDED_COEFFICIENT_CAVEAT,
};
use bblab::suite::{run_suite, Fault, SuiteOptions};
use bblab::tree::{
    proves_infeasibility, replay_infeasibility, replay_separation, replay_solve, separates, solves, BBTree, Disjunction,
};

#[derive(Parser)]
#[command(name = "bblab", version, about = "Exact branch-and-bound tree certificates")]
struct Cli {
    /// Seed for randomized generators and strategies.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Node limit for branch and bound.
    #[arg(long, global = true)]
    budget_nodes: Option<usize>,
    /// Output format; `csv` only applies to `experiment`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cross,
    Packing,
    SetCover,
    PerturbedCross,
    Tsp,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    MostFractional,
    RandomGeneral,
    FixedSequence,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    DropCrossRow,
}

#[derive(Subcommand)]
enum Command {
    /// Write a polytope JSON file for an instance family.
    Gen {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        /// Subset size for packing and set cover.
        #[arg(long)]
        k: Option<usize>,
        /// Add the cover row to the packing polytope.
        #[arg(long)]
        cover: bool,
        /// Attach a separation oracle instead of listing the rows.
        #[arg(long)]
        oracle: bool,
    },
    /// Check a tree against a polytope and emit a certificate.
    ///
    /// Without `--objective` or `--point` the tree must prove
    /// integer-infeasibility.
    CheckTree {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        /// Objective (maximized) as a JSON array; checks that the tree solves it.
        #[arg(long, conflicts_with = "point")]
        objective: Option<PathBuf>,
        /// Point as a JSON array; checks that the tree separates it.
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Run branch and bound and report the tree it builds.
    Run {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, value_enum, default_value = "most-fractional")]
        strategy: StrategyArg,
        /// Coefficient bound for `random-general`.
        #[arg(long, default_value_t = 1)]
        m: u64,
        /// JSON array of disjunctions for `fixed-sequence`.
        #[arg(long)]
        disjunctions: Option<PathBuf>,
        /// Objective (maximized) as a JSON array.
        #[arg(long)]
        objective: Option<PathBuf>,
        /// Also write the tree alone to this file.
        #[arg(long)]
        tree_out: Option<PathBuf>,
    },
    /// Exhaustive search for the smallest tree with `|pi_i| <= m`.
    MinTree {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        max_leaves: usize,
        /// Search for the smallest tree separating this point instead.
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Sweep instance families and strategies into a CSV table.
    Experiment {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance criteria; exits 1 if any fails.
    VerifyPaper {
        /// Corrupt the instances on purpose.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    if cli.format == Some(Format::Csv) && !matches!(cli.command, Command::Experiment { .. }) {
        return Err(Failure::usage("--format csv is only available for experiment"));
    }
    match &cli.command {
        Command::Gen {
            family,
            n,
            k,
            cover,
            oracle,
        } => gen(cli, *family, *n, *k, *cover, *oracle),
        Command::CheckTree {
            polytope,
            tree,
            objective,
            point,
        } => check_tree(cli, polytope, tree, objective.as_deref(), point.as_deref()),
        Command::Run {
            polytope,
            strategy,
            m,
            disjunctions,
            objective,
            tree_out,
        } => run(
            cli,
            polytope,
            *strategy,
            *m,
            disjunctions.as_deref(),
            objective.as_deref(),
            tree_out.as_deref(),
        ),
        Command::MinTree {
            polytope,
            m,
            max_leaves,
            point,
        } => min_tree(cli, polytope, *m, *max_leaves, point.as_deref()),
        Command::Experiment { config } => run_experiment(cli, config),
        Command::VerifyPaper { fault, only } => verify_paper(cli, *fault, only.clone()),
    }
}

fn emit(cli: &Cli, text: &str) -> Outcome {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(path) => io::write_file(path, &text).map_err(Failure::usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cli: &Cli, value: &serde_json::Value) -> Outcome {
    emit(
        cli,
        &serde_json::to_string_pretty(value).expect("JSON values serialize"),
    )
}

fn read_polytope(path: &Path) -> Result<Polytope, Failure> {
    io::polytope_from_json(&io::read_file(path).map_err(Failure::usage)?).map_err(Failure::usage)
}

fn read_vector(path: &Path, dim: usize, what: &str) -> Result<Vec<Rational>, Failure> {
    let v = io::point_from_json(&io::read_file(path).map_err(Failure::usage)?).map_err(Failure::usage)?;
    if v.len() != dim {
        return Err(Failure::Usage(format!(
            "{what} has {} entries, polytope has dimension {dim}",
            v.len()
        )));
    }
    Ok(v)
}

fn read_tree(path: &Path) -> Result<BBTree, Failure> {
    serde_json::from_str(&io::read_file(path).map_err(Failure::usage)?).map_err(Failure::usage)
}

fn gen(cli: &Cli, family: FamilyArg, n: usize, k: Option<usize>, cover: bool, oracle: bool) -> Outcome {
    let mode = if oracle { Mode::Oracle } else { Mode::Explicit };
    let need_k = || k.ok_or_else(|| Failure::usage("this family needs --k"));
    let explicit_only = |name: &str| {
        if oracle {
            Err(Failure::Usage(format!("{name} has no oracle mode")))
        } else {
            Ok(())
        }
    };
    let p = match family {
        FamilyArg::Cross => gen_cross_polytope(CrossSpec { n, mode }),
        FamilyArg::Packing => gen_packing_family(PackingSpec {
            n,
            k: need_k()?,
            with_cover: cover,
            mode,
        }),
        FamilyArg::SetCover => {
            explicit_only("set-cover")?;
            gen_set_cover(n, need_k()?)
        }
        FamilyArg::PerturbedCross => {
            explicit_only("perturbed-cross")?;
            gen_perturbed_cross(PerturbedSpec {
                n,
                seed: cli.seed.unwrap_or(0),
            })
        }
        FamilyArg::Tsp => {
            explicit_only("tsp")?;
            gen_tsp_subtour(TspSpec { n })
        }
    }
    .map_err(Failure::usage)?;
    emit(cli, &io::polytope_to_json(&p).map_err(Failure::usage)?)
}

fn check_tree(cli: &Cli, polytope: &Path, tree: &Path, objective: Option<&Path>, point: Option<&Path>) -> Outcome {
    let p = read_polytope(polytope)?;
    let t = read_tree(tree)?;
    let (check, verdict, yes, replay) = if let Some(path) = objective {
        let c = read_vector(path, p.dim(), "objective")?;
        let v = solves(&t, &p, &c).map_err(Failure::usage)?;
        let r = replay_solve(&t, &p, &c, &v);
        ("solves", serde_json::to_value(&v), v.is_yes(), r)
    } else if let Some(path) = point {
        let x = read_vector(path, p.dim(), "point")?;
        let v = separates(&t, &p, &x).map_err(Failure::usage)?;
        let r = replay_separation(&t, &p, &x, &v);
        ("separates", serde_json::to_value(&v), v.is_yes(), r)
    } else {
        let v = proves_infeasibility(&t, &p).map_err(Failure::usage)?;
        let r = replay_infeasibility(&t, &p, &v);
        ("proves_infeasibility", serde_json::to_value(&v), v.is_yes(), r)
    };
    let report = json!({
        "check": check,
        "nodes": t.size(),
        "leaves": t.leaves(),
        "replayed": replay.is_ok(),
        "result": verdict.expect("verdicts serialize"),
    });
    emit_json(cli, &report)?;
    if let Err(e) = replay {
        return Err(Failure::Verification(format!("certificate replay: {e}")));
    }
    if !yes {
        return Err(Failure::Verification(format!("tree does not satisfy {check}")));
    }
    Ok(())
}

fn budget(cli: &Cli) -> SearchBudget {
    cli.budget_nodes.map(SearchBudget::nodes).unwrap_or_default()
}

fn run(
    cli: &Cli,
    polytope: &Path,
    strategy: StrategyArg,
    m: u64,
    disjunctions: Option<&Path>,
    objective: Option<&Path>,
    tree_out: Option<&Path>,
) -> Outcome {
    let p = read_polytope(polytope)?;
    let strategy = match strategy {
        StrategyArg::MostFractional => BranchStrategy::MostFractional,
        StrategyArg::RandomGeneral => BranchStrategy::RandomGeneral {
            m,
            seed: cli.seed.unwrap_or(0),
        },
        StrategyArg::FixedSequence => {
            let path = disjunctions.ok_or_else(|| Failure::usage("fixed-sequence needs --disjunctions"))?;
            let list: Vec<Disjunction> =
                serde_json::from_str(&io::read_file(path).map_err(Failure::usage)?).map_err(Failure::usage)?;
            BranchStrategy::FixedSequence { disjunctions: list }
        }
    };
    let c = objective
        .map(|path| read_vector(path, p.dim(), "objective"))
        .transpose()?;
    let report = run_bb(&p, &strategy, c.as_deref(), &budget(cli)).map_err(|e| Failure::Verification(e.to_string()))?;
    if let Some(path) = tree_out {
        let tree = serde_json::to_string_pretty(&report.tree).expect("trees serialize");
        io::write_file(path, &tree).map_err(Failure::usage)?;
    }
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    value["strategy"] = serde_json::to_value(&strategy).expect("strategies serialize");
    emit_json(cli, &value)?;
    if report.status == RunStatus::BudgetExceeded {
        eprintln!("budget exceeded after {} nodes", report.nodes);
    }
    Ok(())
}

fn min_tree(cli: &Cli, polytope: &Path, m: u64, max_leaves: usize, point: Option<&Path>) -> Outcome {
    let p = read_polytope(polytope)?;
    let result = match point {
        Some(path) => {
            let x = read_vector(path, p.dim(), "point")?;
            serde_json::to_value(separation_resistance(&p, &x, m, max_leaves).map_err(Failure::usage)?)
        }
        None => serde_json::to_value(min_tree_size(&p, m, max_leaves).map_err(Failure::usage)?),
    };
    let mut value = result.expect("results serialize");
    value["m"] = json!(m);
    value["max_leaves"] = json!(max_leaves);
    value["caveat"] = json!(BOUNDED_COEFFICIENT_CAVEAT);
    emit_json(cli, &value)
}

fn run_experiment(cli: &Cli, path: &Path) -> Outcome {
    let mut config: ExperimentConfig =
        serde_json::from_str(&io::read_file(path).map_err(Failure::usage)?).map_err(Failure::usage)?;
    if let Some(seed) = cli.seed {
        config.seeds = vec![seed];
    }
    if let Some(n) = cli.budget_nodes {
        config.budget = SearchBudget::nodes(n);
    }
    let out = cli.out.clone().or_else(|| config.out.clone());
    config.validate().map_err(Failure::usage)?;

    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    // A second handler cannot be installed; ignore that case in tests.
    let _ = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed));

    let result = experiment::run_experiment(&config, &stop).map_err(|e| Failure::Verification(e.to_string()))?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => experiment::to_csv(&result).map_err(|e| Failure::Verification(e.to_string()))?,
        Format::Json => serde_json::to_string_pretty(&json!({
            "rows": result.rows,
            "total": result.total,
            "interrupted": result.interrupted,
        }))
        .expect("rows serialize"),
    };
    match out {
        Some(path) => io::write_file(&path, &text).map_err(Failure::usage)?,
        None => print!("{text}"),
    }
    if result.interrupted {
        eprintln!("interrupted after {} of {} rows", result.rows.len(), result.total);
    }
    Ok(())
}

fn verify_paper(cli: &Cli, fault: Option<FaultArg>, only: Option<Vec<usize>>) -> Outcome {
    let opts = SuiteOptions {
        fault: fault.map(|FaultArg::DropCrossRow| Fault::DropCrossRow),
        only,
    };
    let results = run_suite(&opts);
    let passed = results.iter().filter(|r| r.passed).count();
    if cli.format == Some(Format::Json) {
        emit_json(cli, &serde_json::to_value(&results).expect("results serialize"))?;
    } else {
        let mut text: Vec<String> = results.iter().map(ToString::to_string).collect();
        text.push(format!("{passed}/{} criteria passed", results.len()));
        emit(cli, &text.join("\n"))?;
    }
    if passed < results.len() {
        return Err(Failure::Verification(format!(
            "{} criteria failed",
            results.len() - passed
        )));
    }
    Ok(())
}
