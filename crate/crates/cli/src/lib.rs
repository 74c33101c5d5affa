//! The `holant` command line: instance I/O, counting, ratio estimation,
//! oracle cross-checks, tree and LP dumps and the invariant suite.
//!
//! Every command prints one JSON document on stdout with sorted keys. Errors
//! are JSON too, with exit codes 2 (parse or usage), 3 (validation),
//! 4 (budget) and 5 (internal). `verify` exits with 1 when a check fails.

use clap::{Args, Parser, Subcommand, ValueEnum};
use holant::counter::{approx_partition_function, CountEstimate, CounterError};
use holant::estimator::{estimate_edge_ratio, EstimatorConfig, EstimatorError, RoundCap};
use holant::io::{parse_instance, LoadError};
use holant::lp::{build_lp, check_feasible_with, LpError, LpForm, Strategy};
use holant::oracle::{MarginalQuery, Oracle, OracleError};
use holant::rational::{self, Rational};
use holant::tree::{CouplingTree, HalfEdgeInstance, TreeError};
use holant::verify::{verify, VerifyError, VerifyOptions};
use holant::{Edge, EdgeId, HolantError, HolantInstance, PartialAssignment};
use serde::Serialize;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Read;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "holant",
    version,
    about = "Approximate and exact partition functions of log-concave Holant instances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Instance file; standard input when absent or `-`.
    #[arg(global = true, long, short)]
    pub input: Option<PathBuf>,
    #[arg(global = true, long, default_value_t = holant::tree::DEFAULT_MAX_TREE_NODES)]
    pub max_tree_nodes: usize,
    #[arg(global = true, long, default_value_t = holant::oracle::DEFAULT_MAX_ORACLE_EDGES)]
    pub max_oracle_edges: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate the partition function.
    Count {
        #[arg(long)]
        epsilon: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Approximate the marginal ratio of one edge.
    Ratio {
        #[arg(long)]
        edge: usize,
        #[arg(long)]
        epsilon: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Exact values by enumeration.
    Oracle {
        #[command(subcommand)]
        query: OracleQuery,
    },
    /// Build the coupling tree rooted at a half-edge.
    Tree {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        halfedge: Option<usize>,
        /// Include every node.
        #[arg(long)]
        dump: bool,
    },
    /// Decide the LP for one bracket.
    LpCheck {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        rminus: String,
        #[arg(long)]
        rplus: String,
        #[arg(long)]
        halfedge: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormArg::Repaired)]
        form: FormArg,
        /// Skip the floating-point pass.
        #[arg(long)]
        exact_only: bool,
        /// Include the LP in its text form.
        #[arg(long)]
        dump_lp: bool,
    },
    /// Run the invariant suite against the oracle.
    Verify {
        #[arg(long, default_value_t = 2)]
        ell: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleQuery {
    /// `Z`.
    Count,
    /// `R(e) = mu_e(1) / mu_e(0)`.
    Ratio {
        #[arg(long)]
        edge: usize,
    },
    /// `mu^condition(target)`, with assignments written as `0=1,3=0`.
    Marginal {
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "")]
        condition: String,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value_t = CapArg::Refining)]
    pub round_cap: CapArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CapArg {
    Refining,
    Total,
    Unlimited,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Repaired,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorClass {
    Parse,
    Validation,
    Budget,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Parse => 2,
            ErrorClass::Validation => 3,
            ErrorClass::Budget => 4,
            ErrorClass::Internal => 5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl CliError {
    fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        CliError {
            class,
            message: message.into(),
            location: None,
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorClass::Parse, message)
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Syntax { line, column, message } => CliError {
                class: ErrorClass::Parse,
                message,
                location: Some(format!("line {line}, column {column}")),
            },
            LoadError::Field { path, message } => CliError {
                class: ErrorClass::Parse,
                message,
                location: Some(path),
            },
            LoadError::Validation(v) => CliError::new(ErrorClass::Validation, v.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let class = match e {
            OracleError::TooLarge { .. } => ErrorClass::Budget,
            OracleError::InfeasibleCondition | OracleError::UnknownEdge(_) | OracleError::Overlap(_) => {
                ErrorClass::Parse
            }
            OracleError::Holant(_) => ErrorClass::Internal,
        };
        CliError::new(class, e.to_string())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        let class = match e {
            TreeError::Budget { .. } => ErrorClass::Budget,
            TreeError::InvalidInstance(_) => ErrorClass::Validation,
            TreeError::HalfEdgeCount(_) | TreeError::ZeroDepth => ErrorClass::Parse,
            _ => ErrorClass::Internal,
        };
        CliError::new(class, e.to_string())
    }
}

impl From<HolantError> for CliError {
    fn from(e: HolantError) -> Self {
        let class = match e {
            HolantError::UnknownEdge(_) | HolantError::AlreadyBound(_) | HolantError::Graph(_) => ErrorClass::Parse,
            _ => ErrorClass::Internal,
        };
        CliError::new(class, e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Tree(t) => t.into(),
            EstimatorError::Holant(h) => h.into(),
            EstimatorError::Lp(l) => l.into(),
            EstimatorError::Domain(_) => CliError::usage(e.to_string()),
            EstimatorError::ConditionViolated(_) => CliError::new(ErrorClass::Validation, e.to_string()),
            EstimatorError::RoundCapExceeded { .. } => CliError::new(ErrorClass::Budget, e.to_string()),
        }
    }
}

impl From<CounterError> for CliError {
    fn from(e: CounterError) -> Self {
        match e {
            CounterError::Estimator(x) => x.into(),
            CounterError::Holant(h) => h.into(),
            CounterError::Domain(_) | CounterError::InvalidB(_) => CliError::usage(e.to_string()),
            CounterError::InstanceInvalid(_) => CliError::new(ErrorClass::Validation, e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Oracle(x) => x.into(),
            VerifyError::Tree(x) => x.into(),
            VerifyError::Holant(x) => x.into(),
            VerifyError::Lp(x) => x.into(),
            VerifyError::Coupling(_) => CliError::new(ErrorClass::Internal, e.to_string()),
        }
    }
}

/// Exit code and stdout of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn render(v: &impl Serialize) -> String {
    // `serde_json::Value` maps keep keys sorted.
    let value = serde_json::to_value(v).expect("serializable");
    let mut s = serde_json::to_string_pretty(&value).expect("json");
    s.push('\n');
    s
}

/// Parses `argv` and runs the command; `stdin` is read only when no input
/// path is given.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: e.render().to_string(),
                },
                _ => failure(CliError::usage(e.render().to_string().trim_end())),
            };
        }
    };
    match execute(&cli, stdin) {
        Ok(v) => Outcome {
            code: if v.get("passed") == Some(&Value::Bool(false)) {
                1
            } else {
                0
            },
            stdout: render(&v),
        },
        Err(e) => failure(e),
    }
}

fn failure(e: CliError) -> Outcome {
    Outcome {
        code: e.class.exit_code(),
        stdout: render(&json!({ "error": e })),
    }
}

fn load(cli: &Cli, stdin: &mut dyn Read) -> Result<HolantInstance, CliError> {
    let text = match cli.input.as_deref() {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?
        }
        _ => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| CliError::usage(format!("cannot read standard input: {e}")))?;
            s
        }
    };
    Ok(parse_instance(&text)?)
}

fn parse_rational(flag: &str, s: &str) -> Result<Rational, CliError> {
    rational::parse(s).map_err(|e| CliError::usage(format!("--{flag}: {e}")))
}

fn config(cli: &Cli, search: &SearchArgs) -> EstimatorConfig {
    EstimatorConfig {
        max_tree_nodes: cli.max_tree_nodes,
        round_cap: match search.round_cap {
            CapArg::Refining => RoundCap::Refining,
            CapArg::Total => RoundCap::Total,
            CapArg::Unlimited => RoundCap::Unlimited,
        },
        ..EstimatorConfig::default()
    }
}

fn edge(phi: &HolantInstance, i: usize) -> Result<(EdgeId, Edge), CliError> {
    let e = EdgeId(i);
    let kind = phi
        .graph()
        .edge(e)
        .ok_or_else(|| CliError::usage(format!("edge {i} is not in the instance")))?;
    Ok((e, kind))
}

/// Parses `0=1,3=0`.
fn assignment(flag: &str, s: &str) -> Result<PartialAssignment, CliError> {
    let mut pairs = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || CliError::usage(format!("--{flag}: expected edge=0 or edge=1, got {part:?}"));
        let (e, c) = part.split_once('=').ok_or_else(bad)?;
        let e: usize = e.trim().parse().map_err(|_| bad())?;
        let c = match c.trim() {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        pairs.push((EdgeId(e), c));
    }
    Ok(PartialAssignment::from_pairs(pairs)?)
}

fn half_edge_root(phi: &HolantInstance, halfedge: Option<usize>) -> Result<HalfEdgeInstance, CliError> {
    let inst = match halfedge {
        Some(i) => match edge(phi, i)? {
            (e, Edge::Half(_)) => phi.isolate_half_edge(e)?,
            _ => return Err(CliError::usage(format!("edge {i} is not a half-edge"))),
        },
        None => phi.clone(),
    };
    let count = inst.graph().half_edges().count();
    if count != 1 {
        return Err(CliError::usage(format!(
            "the instance has {count} half-edges; choose one with --halfedge"
        )));
    }
    Ok(HalfEdgeInstance::new(inst)?)
}

fn count_json(est: &CountEstimate) -> Value {
    serde_json::to_value(est).expect("serializable")
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Value, CliError> {
    let phi = load(cli, stdin)?;
    match &cli.command {
        Command::Count { epsilon, search } => {
            let eps = parse_rational("epsilon", epsilon)?;
            Ok(count_json(&approx_partition_function(
                &phi,
                &eps,
                &config(cli, search),
            )?))
        }
        Command::Ratio {
            edge: i,
            epsilon,
            search,
        } => {
            let eps = parse_rational("epsilon", epsilon)?;
            let (e, _) = edge(&phi, *i)?;
            let est = estimate_edge_ratio(&phi, e, &eps, &config(cli, search))?;
            let mut v = serde_json::to_value(&est).expect("serializable");
            let obj = v.as_object_mut().expect("object");
            let value = obj.remove("value").expect("value field");
            obj.insert("rhat".into(), value);
            obj.insert("rhat_decimal".into(), json!(rational::to_f64(&est.value)));
            obj.insert("edge".into(), json!(i));
            Ok(v)
        }
        Command::Oracle { query } => {
            let oracle = Oracle::with_cap(&phi, cli.max_oracle_edges)?;
            match query {
                OracleQuery::Count => {
                    let z = oracle.partition_function()?;
                    Ok(json!({
                        "z": rational::to_string(&z),
                        "z_decimal": rational::to_f64(&z),
                        "m": phi.graph().edge_count(),
                    }))
                }
                OracleQuery::Ratio { edge: i } => {
                    let (e, _) = edge(&phi, *i)?;
                    let r = oracle.marginal_ratio(e)?;
                    Ok(json!({
                        "edge": i,
                        "r": rational::to_string(&r),
                        "r_decimal": rational::to_f64(&r),
                    }))
                }
                OracleQuery::Marginal { target, condition } => {
                    let q = MarginalQuery {
                        condition: assignment("condition", condition)?,
                        target: assignment("target", target)?,
                    };
                    let p = oracle.conditional_marginal(&q)?;
                    Ok(json!({
                        "condition": q.condition.to_string(),
                        "target": q.target.to_string(),
                        "probability": rational::to_string(&p),
                        "probability_decimal": rational::to_f64(&p),
                    }))
                }
            }
        }
        Command::Tree { ell, halfedge, dump } => {
            let root = half_edge_root(&phi, *halfedge)?;
            let tree = CouplingTree::build(&root, *ell, cli.max_tree_nodes)?;
            let d = tree.dump();
            let internal = tree.nodes().filter(|(id, _)| tree.is_internal(*id)).count();
            let mut v = json!({
                "ell": d.ell,
                "half_edge": d.half_edge,
                "root_vertex": d.root_vertex,
                "node_count": tree.len(),
                "internal_feasible": internal,
                "depth": tree.depth(),
            });
            if *dump {
                v["nodes"] = serde_json::to_value(&d.nodes).expect("serializable");
            }
            Ok(v)
        }
        Command::LpCheck {
            ell,
            rminus,
            rplus,
            halfedge,
            form,
            exact_only,
            dump_lp,
        } => {
            let r_minus = parse_rational("rminus", rminus)?;
            let r_plus = parse_rational("rplus", rplus)?;
            let root = half_edge_root(&phi, *halfedge)?;
            let tree = CouplingTree::build(&root, *ell, cli.max_tree_nodes)?;
            let b = root.instance().b_bound();
            let form = match form {
                FormArg::Repaired => LpForm::Repaired,
                FormArg::Literal => LpForm::Literal,
            };
            let lp = build_lp(&tree, &r_minus, &r_plus, &b, form)?;
            let strategy = if *exact_only {
                Strategy::ExactOnly
            } else {
                Strategy::Guided
            };
            let (verdict, stats) = check_feasible_with(&lp.problem, strategy);
            let mut v = json!({
                "feasible": verdict.is_feasible(),
                "ell": ell,
                "rminus": rational::to_string(&r_minus),
                "rplus": rational::to_string(&r_plus),
                "b": rational::to_string(&b),
                "nodes": tree.len(),
                "variables": lp.problem.variable_count(),
                "family_counts": lp.problem.family_counts(),
                "route": format!("{:?}", stats.route).to_lowercase(),
            });
            if *dump_lp {
                v["lp"] = json!(lp.problem.to_text());
            }
            Ok(v)
        }
        Command::Verify { ell } => {
            if *ell == 0 {
                return Err(CliError::usage("--ell must be at least 1"));
            }
            let report = verify(
                &phi,
                &VerifyOptions {
                    ell: *ell,
                    max_tree_nodes: cli.max_tree_nodes,
                    max_oracle_edges: cli.max_oracle_edges,
                },
            )?;
            Ok(serde_json::to_value(&report).expect("serializable"))
        }
    }
}
