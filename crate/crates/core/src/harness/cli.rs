use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fork_solver::{fork_optimal, identical_fork_closed_form};
use crate::graph::{generate_random, GraphShape, TaskGraph};
use crate::heuristics::{run_on, HeuristicKind};
use crate::model::{ExecutionPlan, PlatformModel};
use crate::schedule::{list_schedule, Instance, Mapping};
use crate::vdd::vdd_schedule_convert;

use super::config::{ExperimentConfig, OUT_DIR_ENV};
use super::oracle::{chain_oracle, CHAIN_ORACLE_MAX_N};
use super::sweep::run_sweep_to_file;

/// Exit status when the requested deadline cannot be met.
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tricrit", version, about = "Energy-minimizing DAG scheduling under deadline and reliability constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a parameter sweep over random graphs and write a CSV file.
    Sweep(SweepArgs),
    /// Run the heuristics on one instance and print a comparison table.
    Solve(SolveArgs),
    /// Solve a fork exactly (one task per processor).
    Fork(ForkArgs),
    /// Convert a heuristic schedule to discrete speed modes.
    VddConvert(VddArgs),
    /// Write a task graph in the text format.
    Gen(GenArgs),
    /// Exhaustive optimum of a small chain on one processor.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct PlatformArgs {
    #[arg(long, default_value_t = 0.1)]
    f_min: f64,
    #[arg(long, default_value_t = 1.0)]
    f_max: f64,
    /// Reliability threshold speed [default: 2/3 of f_max]
    #[arg(long)]
    f_rel: Option<f64>,
    /// Fault rate scale
    #[arg(long, default_value_t = 1e-5)]
    lambda0: f64,
    /// Fault rate sensitivity to speed
    #[arg(long, default_value_t = 0.0)]
    d: f64,
}

impl PlatformArgs {
    fn build(&self, procs: usize) -> Result<PlatformModel<f64>> {
        let f_rel = self.f_rel.unwrap_or(2.0 / 3.0 * self.f_max);
        PlatformModel::new(self.f_min, self.f_max, f_rel, self.lambda0, self.d, procs)
    }
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Read the graph from a file instead of generating one
    #[arg(long)]
    dag: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    #[arg(long, default_value_t = 300)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    weight_min: f64,
    #[arg(long, default_value_t = 10.0)]
    weight_max: f64,
}

impl GraphArgs {
    fn load(&self) -> Result<TaskGraph<f64>> {
        match &self.dag {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                TaskGraph::from_text(&text)
            }
            None => generate_random(self.nodes, self.edges, (self.weight_min, self.weight_max), self.seed),
        }
    }
}

#[derive(Debug, Args)]
struct DeadlineArgs {
    #[arg(long, default_value_t = 1)]
    procs: usize,
    /// Deadline as a multiple of the full-speed makespan
    #[arg(long, default_value_t = 1.5, conflicts_with = "deadline")]
    ratio: f64,
    /// Absolute deadline
    #[arg(long)]
    deadline: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// File of `key = value` lines applied before the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// [default: 100]
    #[arg(long)]
    nodes: Option<usize>,
    /// [default: 300]
    #[arg(long)]
    edges: Option<usize>,
    /// Processor counts [default: 1,10,50]
    #[arg(long, value_delimiter = ',')]
    procs: Option<Vec<usize>>,
    /// Graphs averaged per point [default: 10]
    #[arg(long)]
    runs: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Deadline ratios [default: 1,1.2,1.5,2,3,4,5,6,7,8]
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Reliability threshold speeds [default: 2/3 of f_max]
    #[arg(long, value_delimiter = ',')]
    f_rel: Option<Vec<f64>>,
    /// Fault rate scales [default: 1e-5]
    #[arg(long, value_delimiter = ',')]
    lambda0: Option<Vec<f64>>,
    /// [default: 0]
    #[arg(long)]
    d: Option<f64>,
    /// [default: 0.1]
    #[arg(long)]
    f_min: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    f_max: Option<f64>,
    /// [default: all]
    #[arg(long, value_delimiter = ',')]
    heuristics: Option<Vec<HeuristicKind>>,
    /// CSV path, relative paths go under $TRICRIT_OUT_DIR when set [default: sweep.csv]
    #[arg(long)]
    output: Option<PathBuf>,
    /// Leave the wall-time column at 0
    #[arg(long)]
    no_timing: bool,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        macro_rules! take {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = &self.$field { c.$target = v.clone(); })*
            };
        }
        take!(nodes => nodes, edges => edges, procs => procs, runs => runs, seed => seed, ratios => ratios,
              lambda0 => lambda0s, d => d, f_min => f_min, f_max => f_max, heuristics => heuristics,
              output => output);
        if let Some(v) = &self.f_rel {
            c.f_rels = Some(v.clone());
        }
        if self.no_timing {
            c.timing = false;
        }
        c.validate()?;
        Ok(c)
    }
}

impl clap::builder::ValueParserFactory for HeuristicKind {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<HeuristicKind>().map_err(|e| e.to_string()))
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    deadline: DeadlineArgs,
    #[command(flatten)]
    platform: PlatformArgs,
    /// [default: all]
    #[arg(long, value_delimiter = ',')]
    heuristics: Option<Vec<HeuristicKind>>,
    /// Write the lowest-energy schedule in the `id proc order speed1 [speed2]` format
    #[arg(long)]
    schedule_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ForkArgs {
    /// Source weight
    #[arg(long)]
    source: f64,
    /// Leaf weights
    #[arg(long, value_delimiter = ',', required = true)]
    leaves: Vec<f64>,
    #[arg(long)]
    deadline: f64,
    #[command(flatten)]
    platform: PlatformArgs,
}

#[derive(Debug, Args)]
struct VddArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    deadline: DeadlineArgs,
    #[command(flatten)]
    platform: PlatformArgs,
    /// Available speeds, increasing
    #[arg(long, value_delimiter = ',', required = true)]
    modes: Vec<f64>,
    /// Heuristic producing the continuous schedule
    #[arg(long, default_value = "BEST")]
    heuristic: HeuristicKind,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Shape {
    Random,
    Chain,
    Fork,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = Shape::Random)]
    shape: Shape,
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    /// Ignored unless the shape is random
    #[arg(long, default_value_t = 300)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    weight_min: f64,
    #[arg(long, default_value_t = 10.0)]
    weight_max: f64,
    /// Output file [default: stdout]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Chain file; otherwise a random chain of `n` tasks
    #[arg(long)]
    dag: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    weight_min: f64,
    #[arg(long, default_value_t = 10.0)]
    weight_max: f64,
    #[arg(long, default_value_t = 2.0, conflicts_with = "deadline")]
    ratio: f64,
    #[arg(long)]
    deadline: Option<f64>,
    #[command(flatten)]
    platform: PlatformArgs,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn cli_main<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(&a),
        Command::Solve(a) => solve(&a),
        Command::Fork(a) => fork(&a),
        Command::VddConvert(a) => vdd_convert(&a),
        Command::Gen(a) => gen(&a),
        Command::Oracle(a) => oracle(&a),
    };
    match result {
        Ok(text) => {
            print!("{}", text);
            0
        }
        Err(e @ Error::Infeasible(_)) => {
            eprintln!("{}", e);
            EXIT_INFEASIBLE
        }
        Err(e) => {
            eprintln!("error: {}", e);
            1
        }
    }
}

fn sweep(a: &SweepArgs) -> Result<String> {
    let config = a.config()?;
    log::info!("sweep output goes to {} ({} overrides relative paths)", config.output_path().display(), OUT_DIR_ENV);
    let path = run_sweep_to_file(&config)?;
    Ok(format!("wrote {}\n", path.display()))
}

struct Prepared {
    graph: TaskGraph<f64>,
    mapping: Mapping,
    platform: PlatformModel<f64>,
    d_min: f64,
    deadline: f64,
}

fn prepare(graph: &GraphArgs, deadline: &DeadlineArgs, platform: &PlatformArgs) -> Result<Prepared> {
    let g = graph.load()?;
    let platform = platform.build(deadline.procs)?;
    let mapping = list_schedule(&g, deadline.procs)?;
    let d_min = Instance::new(&g, &mapping, &platform, f64::INFINITY)?
        .makespan(&vec![ExecutionPlan::once(platform.f_max()); g.len()]);
    let d = deadline.deadline.unwrap_or(deadline.ratio * d_min);
    Ok(Prepared { graph: g, mapping, platform, d_min, deadline: d })
}

fn solve(a: &SolveArgs) -> Result<String> {
    let p = prepare(&a.graph, &a.deadline, &a.platform)?;
    let inst = Instance::new(&p.graph, &p.mapping, &p.platform, p.deadline)?;
    let kinds = a.heuristics.clone().unwrap_or_else(|| HeuristicKind::ALL.to_vec());
    let reference = run_on(HeuristicKind::HNoReex, &inst)?.metrics.energy;
    let mut out = String::new();
    writeln!(out, "tasks {}  procs {}  d_min {:.6}  deadline {:.6}", p.graph.len(), p.platform.procs(), p.d_min, p.deadline).unwrap();
    writeln!(out, "{:<16} {:>14} {:>12} {:>12} {:>9} {:>7}", "heuristic", "energy", "norm_energy", "makespan", "feasible", "reexec")
        .unwrap();
    let mut best = None;
    for k in kinds {
        let r = run_on(k, &inst)?;
        let m = &r.metrics;
        writeln!(
            out,
            "{:<16} {:>14.6} {:>12.6} {:>12.6} {:>9} {:>7}",
            k.name(),
            m.energy,
            m.energy / reference,
            m.makespan,
            m.feasible && m.plans_valid,
            r.schedule.reexecuted().len()
        )
        .unwrap();
        if best.as_ref().is_none_or(|b: &crate::heuristics::HeuristicRun<f64>| m.energy < b.metrics.energy) {
            best = Some(r);
        }
    }
    if let (Some(path), Some(b)) = (&a.schedule_out, best) {
        std::fs::write(path, b.schedule.to_text()).map_err(|e| Error::io(path, e))?;
        writeln!(out, "schedule of {} written to {}", b.chosen, path.display()).unwrap();
    }
    Ok(out)
}

fn fork(a: &ForkArgs) -> Result<String> {
    let platform = a.platform.build(a.leaves.len() + 1)?;
    let s = fork_optimal(a.source, &a.leaves, a.deadline, &platform)?;
    let mut out = String::new();
    writeln!(out, "energy {}", s.energy).unwrap();
    writeln!(out, "leaf share d2 {}", s.d2).unwrap();
    for (i, plan) in s.plans.iter().enumerate() {
        let role = if i == 0 { "source" } else { "leaf" };
        writeln!(out, "{} {} {}", i, role, plan).unwrap();
    }
    if a.leaves.len() >= 2 && a.leaves.iter().all(|&w| w == a.source) {
        match identical_fork_closed_form(a.source, a.leaves.len(), a.deadline, &platform) {
            Ok(c) => writeln!(out, "closed form: f_src {} f_leaf {} energy {}", c.f_src, c.f_leaf, c.energy).unwrap(),
            Err(e) => writeln!(out, "closed form: {}", e).unwrap(),
        }
    }
    Ok(out)
}

fn vdd_convert(a: &VddArgs) -> Result<String> {
    let p = prepare(&a.graph, &a.deadline, &a.platform)?;
    p.platform.clone().with_modes(a.modes.clone())?;
    let inst = Instance::new(&p.graph, &p.mapping, &p.platform, p.deadline)?;
    let r = run_on(a.heuristic, &inst)?;
    let v = vdd_schedule_convert(&p.graph, &r.schedule, &a.modes, p.deadline, &p.platform)?;
    let mut out = String::new();
    writeln!(out, "heuristic {} ({})", a.heuristic, r.chosen).unwrap();
    writeln!(out, "continuous energy {:.6}", v.continuous_energy).unwrap();
    writeln!(out, "discrete energy {:.6}", v.energy).unwrap();
    writeln!(out, "overhead {:.4}%", 100.0 * v.overhead()).unwrap();
    writeln!(out, "makespan {:.6} deadline {:.6}", v.makespan, p.deadline).unwrap();
    writeln!(out, "feasible {}", v.feasible).unwrap();
    Ok(out)
}

fn gen(a: &GenArgs) -> Result<String> {
    let range = (a.weight_min, a.weight_max);
    let g = match a.shape {
        Shape::Random => GraphShape::Random { nodes: a.nodes, edges: a.edges, seed: a.seed }.build(range)?,
        Shape::Chain | Shape::Fork => {
            let w = generate_random(a.nodes, 0, range, a.seed)?.weights();
            match a.shape {
                Shape::Chain => TaskGraph::chain(&w)?,
                _ => TaskGraph::fork(w[0], &w[1..])?,
            }
        }
    };
    let text = g.to_text();
    match &a.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn oracle(a: &OracleArgs) -> Result<String> {
    let g = match &a.dag {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            TaskGraph::from_text(&text)?
        }
        None => TaskGraph::chain(&generate_random(a.n, 0, (a.weight_min, a.weight_max), a.seed)?.weights())?,
    };
    let order = g.topological_order()?;
    let is_chain = g.edges().len() + 1 == g.len() && order.windows(2).all(|p| g.successors(p[0]).contains(&p[1]));
    if !is_chain {
        return Err(Error::InvalidGraph("the oracle needs a chain".into()));
    }
    let platform = a.platform.build(1)?;
    let mapping = Mapping::single_processor(order.clone())?;
    let weights: Vec<f64> = order.iter().map(|&i| g.weight(i)).collect();
    let d_min = weights.iter().sum::<f64>() / platform.f_max();
    let deadline = a.deadline.unwrap_or(a.ratio * d_min);
    let o = chain_oracle(&weights, deadline, &platform, CHAIN_ORACLE_MAX_N)?;
    let inst = Instance::new(&g, &mapping, &platform, deadline)?;
    let best = run_on(HeuristicKind::Best, &inst)?;
    let mut out = String::new();
    writeln!(out, "tasks {} deadline {:.6}", g.len(), deadline).unwrap();
    writeln!(out, "oracle energy {:.9}", o.energy).unwrap();
    writeln!(out, "best heuristic {} energy {:.9}", best.chosen, best.metrics.energy).unwrap();
    writeln!(out, "ratio {:.6}", best.metrics.energy / o.energy).unwrap();
    Ok(out)
}
