use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use probdp::depgraph::{build_graph, EdgeEstimation};
use probdp::dp::dependency_tuples;
use probdp::prover::{check_proof, prove, Proof, ProverConfig, Technique, Verdict};
use probdp::ptrs::{parse, parse_term, Ptrs};
use probdp::rational::{to_display_string, Rational};
use probdp::simulator::{estimate_ast, expand_profile, profile_csv, SimError, DEFAULT_NODE_BUDGET};
use probdp::synth::{direct_constraint_set, export_smtlib_sections, rpp_constraint_set, TemplateShape};

/// Almost-sure innermost termination prover for probabilistic term rewrite
/// systems.
#[derive(Parser)]
#[command(name = "probdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Try to prove a system AST or iAST.
    Prove(ProveArgs),
    /// Expand or sample rewrite sequence trees from a start term.
    Simulate(SimulateArgs),
    /// Re-validate a JSON proof against a system.
    Check {
        file: PathBuf,
        proof: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TechniqueArg {
    Auto,
    Dp,
    Direct,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimationArg {
    CapRen,
    InnermostCap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ProveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    technique: TechniqueArg,
    /// Largest template coefficient.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    max_coeff: u32,
    /// All multilinear monomials for symbols of arity up to 3.
    #[arg(long)]
    full_multilinear: bool,
    #[arg(long, env = "PROBDP_TIMEOUT_MS", default_value_t = 8000, value_parser = clap::value_parser!(u64).range(1..))]
    timeout_ms: u64,
    #[arg(long, value_enum, default_value = "cap-ren")]
    edge_estimation: EstimationArg,
    /// Print the dependency graph as `i -> j` lines (to stderr with --format json).
    #[arg(long)]
    emit_graph: bool,
    /// Write the dependency graph in DOT format.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Write the synthesis constraints as an SMT-LIB 2 script.
    #[arg(long, value_name = "PATH")]
    emit_smtlib: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Ground start term.
    #[arg(long)]
    start: String,
    /// Levels of exact leftmost-innermost expansion.
    #[arg(long)]
    depth: Option<usize>,
    /// Number of Monte Carlo runs.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-depth leaf mass as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

/// Writes to stdout; a closed pipe (as with `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> Result<Ptrs> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("{}", path.display()))
}

fn run_prove(args: &ProveArgs) -> Result<ExitCode> {
    let rules = load(&args.file)?;
    let config = ProverConfig {
        technique: match args.technique {
            TechniqueArg::Auto => Technique::Auto,
            TechniqueArg::Dp => Technique::Dp,
            TechniqueArg::Direct => Technique::Direct,
        },
        max_coeff: args.max_coeff,
        full_multilinear: args.full_multilinear,
        timeout_ms: args.timeout_ms,
        edge_estimation: match args.edge_estimation {
            EstimationArg::CapRen => EdgeEstimation::CapRen,
            EstimationArg::InnermostCap => EdgeEstimation::InnermostCap,
        },
    };
    let problem = dependency_tuples(&rules)?;
    if args.emit_graph || args.dot.is_some() || args.emit_smtlib.is_some() {
        let graph = build_graph(&problem, config.edge_estimation);
        if let Some(path) = &args.dot {
            fs::write(path, graph.to_dot()).with_context(|| format!("cannot write {}", path.display()))?;
        }
        if args.emit_graph {
            let lines = graph.to_lines();
            match args.format {
                Format::Text => emit(&format!("dependency graph:\n{lines}\n"))?,
                Format::Json => eprint!("{lines}"),
            }
        }
        if let Some(path) = &args.emit_smtlib {
            let shape = if config.full_multilinear {
                TemplateShape::FullMultilinear
            } else {
                TemplateShape::Linear
            };
            let mut sections = Vec::new();
            if config.technique != Technique::Dp {
                sections.push(("direct criterion".to_string(), direct_constraint_set(&rules, shape)));
            }
            if config.technique != Technique::Direct {
                for scc in graph.sccs() {
                    let title = format!("reduction pair for SCC {scc:?}");
                    sections.push((title, rpp_constraint_set(&problem.with_dts(&scc), shape)));
                }
            }
            let script = export_smtlib_sections(&sections, Some(config.max_coeff));
            fs::write(path, script).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let proof = prove(&rules, &config)?;
    match args.format {
        Format::Text => emit(&proof.render_text())?,
        Format::Json => emit(&format!("{}\n", proof.render_json()))?,
    }
    Ok(exit_for(proof.verdict))
}

fn exit_for(v: Verdict) -> ExitCode {
    match v {
        Verdict::Ast | Verdict::Iast => ExitCode::SUCCESS,
        Verdict::Maybe => ExitCode::from(1),
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let rules = load(&args.file)?;
    let start = parse_term(&args.start, rules.signature(), &[]).with_context(|| format!("start term {:?}", args.start))?;
    let depth = match (args.depth, args.samples) {
        (None, None) => Some(10),
        (d, _) => d,
    };
    if let Some(depth) = depth {
        let profile = match expand_profile(&start, &rules, depth, args.node_budget) {
            Ok(p) => p,
            Err(SimError::NodeBudget { budget, partial }) => bail!(
                "frontier exceeded {budget} terms after depth {}; leaf mass so far {}",
                partial.depth,
                to_display_string(&partial.value)
            ),
        };
        let last = profile.last().expect("level 0 is recorded");
        emit(&format!(
            "leaf mass {}{} at depth {}\n",
            to_display_string(&last.value),
            if last.exhausted { " (exhausted)" } else { "" },
            last.depth
        ))?;
        if let Some(path) = &args.csv {
            fs::write(path, profile_csv(&profile)).with_context(|| format!("cannot write {}", path.display()))?;
        }
    } else if args.csv.is_some() {
        bail!("--csv needs --depth");
    }
    if let Some(samples) = args.samples {
        if samples == 0 {
            bail!("--samples must be at least 1");
        }
        let est = estimate_ast(&start, &rules, samples, args.max_steps, args.seed);
        let terminated = (&est * Rational::from_integer(samples.into())).to_integer();
        let fraction = terminated.to_string().parse::<f64>().unwrap_or(0.0) / samples as f64;
        emit(&format!(
            "terminated {}/{} runs ({:.4}) within {} steps, seed {}\n",
            terminated,
            samples,
            fraction,
            args.max_steps,
            args.seed
        ))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_check(file: &Path, proof_path: &Path) -> Result<ExitCode> {
    let rules = load(file)?;
    let text = fs::read_to_string(proof_path).with_context(|| format!("cannot read {}", proof_path.display()))?;
    let proof = Proof::from_json(&text).with_context(|| format!("{}", proof_path.display()))?;
    match check_proof(&rules, &proof) {
        Ok(()) => {
            emit(&format!("valid proof: {}\n", proof.verdict))?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            emit(&format!("{e}\n"))?;
            Ok(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prove(args) => run_prove(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Check { file, proof } => run_check(file, proof),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
