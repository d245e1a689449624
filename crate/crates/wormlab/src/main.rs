use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wormlab::experiments::config::{
    BenchParams, CompletenessParams, DeltaParams, LeviAuditParams, ProjectionParams, ScalingParams, SliceParams, TriangleParams,
};
use wormlab::experiments::report::fmt_float;
use wormlab::experiments::{run, Experiment, ExperimentConfig, ExperimentReport, Status};
use wormlab::{Error, Result};

#[derive(Parser)]
#[command(name = "wormlab", version, about = "Kobayashi metric and Gromov hyperbolicity experiments on Worm domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Levi form audit of the boundary.
    Levi(RunArgs),
    /// Estimators against closed-form metrics.
    Bench(RunArgs),
    /// Slimness of the cover triangles at growing scales.
    Triangle(RunArgs),
    /// Convergence of the rescaled Worms to the pre-Worm.
    Scale(RunArgs),
    /// Four-point δ on growing balls.
    Delta(RunArgs),
    /// Distance-decreasing check for the bundle projection.
    Project(RunArgs),
    /// Graph distances towards a boundary point.
    Complete(RunArgs),
    /// SVG pictures of fiber slices.
    Slice(RunArgs),
    /// Summarise the report CSVs in a directory.
    Report {
        /// Directory holding the report CSVs.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; its kind must match the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lattice step / sampling resolution.
    #[arg(long)]
    resolution: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_experiment(cmd: &Command) -> Experiment {
    match cmd {
        Command::Levi(_) => Experiment::LeviAudit(LeviAuditParams::default()),
        Command::Bench(_) => Experiment::MetricBench(BenchParams::default()),
        Command::Triangle(_) => Experiment::TriangleGrowth(TriangleParams::default()),
        Command::Scale(_) => Experiment::ScalingConvergence(ScalingParams::default()),
        Command::Delta(_) => Experiment::DeltaGrowth(DeltaParams::default()),
        Command::Project(_) => Experiment::ProjectionAudit(ProjectionParams::default()),
        Command::Complete(_) => Experiment::Completeness(CompletenessParams::default()),
        Command::Slice(_) => Experiment::Slice(SliceParams::default()),
        Command::Report { .. } => unreachable!("report runs no experiment"),
    }
}

fn config_for(cmd: &Command, args: &RunArgs) -> Result<ExperimentConfig> {
    let expected = default_experiment(cmd);
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(expected.clone()),
    };
    if cfg.experiment.name() != expected.name() {
        return Err(Error::InvalidParameter(format!("config describes {}, not {}", cfg.experiment.name(), expected.name())));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(res) = args.resolution {
        cfg.resolution = res;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(rep: &ExperimentReport) {
    println!("== {} (seed {}, resolution {})", rep.experiment, rep.metadata.seed, fmt_float(rep.metadata.resolution));
    for r in &rep.rows {
        let flag = match r.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Infeasible => "infeasible",
            Status::Inconclusive => "inconclusive",
            Status::Recorded => "",
        };
        let bound = if r.tolerance.is_nan() { String::new() } else { format!(" (tol {})", fmt_float(r.tolerance)) };
        println!("{:<40} {:>16}{bound} {flag}", r.parameter, fmt_float(r.value));
    }
}

fn summarise(dir: &Path) -> Result<bool> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv") && !p.file_stem().is_some_and(|s| s.to_string_lossy().ends_with("_trace")))
        .collect();
    paths.sort();
    let mut ok = true;
    for path in paths {
        let Ok(reports) = ExperimentReport::read_csv(&path) else { continue };
        for rep in reports {
            let verdict = if rep.passed() { "pass" } else { "FAIL" };
            println!(
                "{:<22} {verdict}  pass {} fail {} infeasible {} inconclusive {} recorded {}",
                rep.experiment,
                rep.count(Status::Pass),
                rep.count(Status::Fail),
                rep.count(Status::Infeasible),
                rep.count(Status::Inconclusive),
                rep.count(Status::Recorded)
            );
            ok &= rep.passed();
        }
    }
    Ok(ok)
}

fn execute(cli: Cli) -> Result<bool> {
    if let Command::Report { out } = &cli.command {
        return summarise(out);
    }
    let args = match &cli.command {
        Command::Levi(a) | Command::Bench(a) | Command::Triangle(a) | Command::Scale(a) | Command::Delta(a) | Command::Project(a) | Command::Complete(a) | Command::Slice(a) => a,
        Command::Report { .. } => unreachable!(),
    };
    let cfg = config_for(&cli.command, args)?;
    let rep = run(&cfg)?;
    rep.write(&cfg.output_dir)?;
    print_report(&rep);
    Ok(rep.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
