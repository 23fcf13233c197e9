use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use vemadapt::config::{parse_mode, Emit, RunSpec, SweepConfig};
use vemadapt::sweep;
use vemadapt_core::adapt::{Procedure, DEFAULT_NODE_BUDGET};
use vemadapt_core::problems::ProblemId;

#[derive(Parser)]
#[command(version, about = "Adaptive virtual element runs for plane-strain elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration from flags, or a whole sweep from --config
    Run(RunArgs),
    /// Rebuild pre.csv, summary.csv and plots from the reports in a directory
    Summarize {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "csv,svg")]
        emit: String,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Sweep configuration file; other run flags are then rejected
    #[arg(long, conflicts_with_all = ["problem", "indicator", "threshold", "mesh", "nu", "steps", "budget", "seed", "stop_at_reference"])]
    config: Option<PathBuf>,
    /// A1, B4, C5 or MS (manufactured solution)
    #[arg(long, default_value = "A1")]
    problem: String,
    /// db, sj, z2, db+sj, db+z2 or reference
    #[arg(long, default_value = "db")]
    indicator: String,
    /// Refinement threshold percentage
    #[arg(long = "T", default_value_t = 20.0)]
    threshold: f64,
    /// structured or voronoi
    #[arg(long, default_value = "structured")]
    mesh: String,
    /// Poisson's ratio
    #[arg(long, default_value_t = 0.3)]
    nu: f64,
    /// Maximum number of solved meshes
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Stop before solving a mesh with more nodes than this
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop once the error of the matching uniform run is reached
    #[arg(long)]
    stop_at_reference: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of csv, svg, mesh
    #[arg(long, default_value = "csv")]
    emit: String,
}

fn run(args: RunArgs) -> Result<()> {
    let (runs, emit) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = SweepConfig::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            fs::create_dir_all(&args.out)?;
            fs::write(args.out.join("config.txt"), cfg.to_text())?;
            (cfg.runs(), cfg.emit)
        }
        None => {
            let procedure = Procedure::parse(&args.indicator)?;
            if !(args.threshold > 0.0 && args.threshold <= 100.0) {
                bail!("--T must be in (0, 100]");
            }
            if args.steps == 0 || args.budget == 0 {
                bail!("--steps and --budget must be positive");
            }
            let Some(mode) = parse_mode(&args.mesh) else { bail!("unknown mesh mode '{}'", args.mesh) };
            let spec = RunSpec {
                problem: ProblemId::parse(&args.problem)?,
                procedure,
                threshold: if procedure == Procedure::Reference { 100.0 } else { args.threshold },
                mode,
                nu: args.nu,
                steps: args.steps,
                budget: args.budget,
                seed: args.seed,
                stop_at_reference: args.stop_at_reference && procedure != Procedure::Reference,
            };
            (vec![spec], Emit::parse(&args.emit).map_err(anyhow::Error::msg)?)
        }
    };
    let reports = sweep::execute(&runs, &args.out, emit)?;
    for r in &reports {
        if let Some(last) = r.records.last() {
            println!(
                "{}: {} steps, {} nodes, H1 error {:.4e}, PSE {:.4}",
                r.spec.key(),
                r.records.len(),
                last.nodes,
                last.h1,
                last.pse
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Summarize { out, emit } => {
            sweep::rebuild_tables(&out, Emit::parse(&emit).map_err(anyhow::Error::msg)?)?;
            println!("tables rebuilt in {}", out.display());
            Ok(())
        }
    }
}
