use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fctp::formulations::{build_ip, build_ip_z, build_qdp, build_qsn, Formulation, FormulationCounts, Model};
use fctp::generators::{gen_bipartite, gen_tree, reduce_3partition, GenConfig, ThreePartitionInput};
use fctp::io::{self, InstanceDocument};
use fctp::oracle::{brute_force_solve, search_space};
use fctp::rational::{self, Rational};
use fctp::tree_dp::{encode_uv, solve_tree};
use fctp::verify::{run_suite, Suite};
use fctp::{validate_solution, Instance, NodeId, RootedTree};

/// Directory used for outputs when `-o` is not given.
const OUT_DIR_VAR: &str = "FCTP_OUT_DIR";

#[derive(Parser)]
#[command(name = "fctp", version, about = "Fixed-charge transportation: generate, solve, export, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve an instance exactly.
    Solve(SolveArgs),
    /// Write one formulation of an instance in LP or MPS format.
    Export(ExportArgs),
    /// Run a seeded self-check suite.
    Verify(VerifyArgs),
    /// Print variable and constraint counts per formulation.
    Stats(StatsArgs),
}

#[derive(Args)]
struct Output {
    /// Output file; defaults to $FCTP_OUT_DIR/<name> if set, else stdout.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    /// Complete bipartite instance with equality demand rows.
    Bipartite {
        #[arg(long)]
        n: usize,
        #[arg(long = "B")]
        cap: u64,
        /// Demand to supply ratio, e.g. 0.95 or 19/20.
        #[arg(long, value_parser = parse_rational)]
        r: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cost_lo: i64,
        #[arg(long, default_value_t = 800)]
        cost_hi: i64,
        #[arg(long, default_value = "0", value_parser = parse_rational)]
        variable_cost: Rational,
        #[command(flatten)]
        out: Output,
    },
    /// Random recursive tree.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        b_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Transportation instance encoding a 3-Partition input.
    #[command(name = "from-3partition")]
    FromThreePartition {
        /// Comma-separated numbers, a multiple of three of them.
        #[arg(long, value_delimiter = ',', required = true)]
        numbers: Vec<u64>,
        /// Target sum of each triple.
        #[arg(long)]
        b: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    TreeDp,
    Brute,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "tree-dp")]
    method: Method,
    #[arg(long, default_value_t = 1)]
    root: NodeId,
    /// Write the optimality certificate (tree-dp only) as a JSON assignment.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Largest flow-vector space the brute-force method accepts.
    #[arg(long, default_value_t = fctp::oracle::DEFAULT_LIMIT)]
    limit: u128,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Ip,
    Ipz,
    Qdp,
    Qsn,
    Qsnz,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Ip => Formulation::Ip,
            FormulationArg::Ipz => Formulation::IpZ,
            FormulationArg::Qdp => Formulation::Qdp,
            FormulationArg::Qsn => Formulation::Qsn,
            FormulationArg::Qsnz => Formulation::QsnZ,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Lp,
    Mps,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    formulation: FormulationArg,
    #[arg(long, value_enum, default_value = "lp")]
    format: Format,
    /// Root for the tree formulations.
    #[arg(long, default_value_t = 1)]
    root: NodeId,
    /// Turn equality node rows into `<=` rows before building.
    #[arg(long)]
    relax_eq: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    /// Number of instances; each suite has its own default.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    root: NodeId,
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).ok_or_else(|| format!("`{s}` is not a rational number"))
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: fctp::Error| e.to_string())
}

/// Writes `text` to the chosen destination and returns where it went.
fn emit(out: &Output, default_name: &str, text: &str) -> Result<Option<PathBuf>> {
    let path = match (&out.output, std::env::var_os(OUT_DIR_VAR)) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => {
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            dir.join(default_name)
        }
        (None, None) => {
            print!("{text}");
            return Ok(None);
        }
    };
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(Some(path))
}

fn note_written(path: Option<PathBuf>) {
    if let Some(p) = path {
        eprintln!("wrote {}", p.display());
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn read(path: &Path) -> Result<Instance> {
    io::read_instance(path).with_context(|| format!("reading {}", path.display()))
}

fn gen(kind: GenKind) -> Result<()> {
    let (doc, name, out) = match kind {
        GenKind::Bipartite { n, cap, r, seed, cost_lo, cost_hi, variable_cost, out } => {
            let cfg = GenConfig { n, cap, ratio: r, seed, cost_lo, cost_hi, variable_cost };
            let inst = gen_bipartite(&cfg)?;
            let prov = json!({
                "generator": "bipartite",
                "n": n,
                "B": cap,
                "r": rational::to_text(&cfg.ratio),
                "seed": seed,
                "cost_lo": cost_lo,
                "cost_hi": cost_hi,
                "variable_cost": rational::to_text(&cfg.variable_cost),
            });
            (
                InstanceDocument { instance: inst, provenance: Some(prov) },
                format!("bipartite-n{n}-B{cap}-s{seed}.json"),
                out,
            )
        }
        GenKind::Tree { n, b_max, seed, out } => {
            let inst = gen_tree(n, b_max, seed)?;
            let prov = json!({ "generator": "tree", "n": n, "b_max": b_max, "seed": seed });
            (InstanceDocument { instance: inst, provenance: Some(prov) }, format!("tree-n{n}-s{seed}.json"), out)
        }
        GenKind::FromThreePartition { numbers, b, out } => {
            let input = ThreePartitionInput::new(numbers.clone(), b)?;
            let inst = reduce_3partition(&input)?;
            let prov = json!({ "generator": "3partition", "numbers": numbers, "b": b });
            (InstanceDocument { instance: inst, provenance: Some(prov) }, "3partition.json".into(), out)
        }
    };
    let text = io::instance_to_string(&doc.instance, doc.provenance.as_ref());
    note_written(emit(&out, &name, &text)?);
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = read(&args.instance)?;
    let sol = match args.method {
        Method::TreeDp => {
            let rt = RootedTree::new(inst.clone(), args.root)?;
            let (_, sol) = solve_tree(&rt)?;
            if let Some(path) = &args.certificate {
                let cert = encode_uv(&rt, &sol.x)?;
                let text = io::assignment_to_string(&cert.to_assignment(), Some(&cert.objective));
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote certificate {}", path.display());
            }
            sol
        }
        Method::Brute => {
            if args.certificate.is_some() {
                bail!("--certificate needs --method tree-dp");
            }
            brute_force_solve(&inst, args.limit)?
        }
    };
    let bad = validate_solution(&inst, &sol);
    if let Some(v) = bad.first() {
        bail!("solver returned an infeasible point: {v}");
    }
    eprintln!("objective {}", rational::to_text(&sol.objective));
    let name = format!("{}.solution.json", stem(&args.instance));
    note_written(emit(&args.out, &name, &io::solution_to_string(&inst, &sol))?);
    Ok(())
}

fn build(inst: &Instance, formulation: Formulation, root: NodeId) -> fctp::Result<Model> {
    match formulation {
        Formulation::Ip => Ok(build_ip(inst)),
        Formulation::IpZ => Ok(build_ip_z(inst)),
        tree => {
            let rt = RootedTree::new(inst.clone(), root)?;
            match tree {
                Formulation::Qdp => build_qdp(&rt),
                Formulation::Qsn => build_qsn(&rt, false),
                _ => build_qsn(&rt, true),
            }
        }
    }
}

fn describe(f: Formulation, model: &Model) -> String {
    let c = FormulationCounts::of(model);
    let mut line = format!(
        "{f}: {} variables ({} integer), {} constraints, {} nonzeros",
        c.variables, c.integer_variables, c.constraints, c.nonzeros
    );
    for (prefix, label) in [("z_", "z"), ("u_", "u"), ("v_", "v"), ("f_", "f")] {
        let n = model.count_prefix(prefix);
        if n > 0 {
            line.push_str(&format!(", {n} {label}"));
        }
    }
    line
}

fn export(args: ExportArgs) -> Result<()> {
    let mut inst = read(&args.instance)?;
    if args.relax_eq {
        inst = inst.with_variant(inst.variant().relaxed())?;
    }
    let formulation = Formulation::from(args.formulation);
    let model = build(&inst, formulation, args.root)?;
    let (text, ext) = match args.format {
        Format::Lp => (io::model_to_lp(&model)?, "lp"),
        Format::Mps => (io::model_to_mps(&model)?, "mps"),
    };
    let name = format!("{}.{formulation}.{ext}", stem(&args.instance));
    note_written(emit(&args.out, &name, &text)?);
    eprintln!("{}", describe(formulation, &model));
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let trials = args.trials.unwrap_or_else(|| args.suite.default_trials());
    let report = run_suite(args.suite, trials, args.seed)?;
    println!("{report}");
    Ok(report.passed())
}

fn stats(args: StatsArgs) -> Result<()> {
    let inst = read(&args.instance)?;
    let unary: u64 = inst.arcs().iter().map(|a| a.cap + 1).sum();
    println!("nodes {}", inst.num_nodes());
    println!("arcs {}", inst.num_arcs());
    println!("unary levels (sum of a+1) {unary}");
    match search_space(&inst) {
        u128::MAX => println!("flow vectors at least 2^128"),
        n => println!("flow vectors {n}"),
    }
    for f in [Formulation::Ip, Formulation::IpZ, Formulation::Qdp, Formulation::Qsn, Formulation::QsnZ] {
        match build(&inst, f, args.root) {
            Ok(model) => println!("{}", describe(f, &model)),
            Err(e) => println!("{f}: n/a ({e})"),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { kind } => gen(kind).map(|_| true),
        Command::Solve(args) => solve(args).map(|_| true),
        Command::Export(args) => export(args).map(|_| true),
        Command::Verify(args) => verify(args),
        Command::Stats(args) => stats(args).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
