//! Experiment drivers and their reports.

pub mod bench;
pub mod completeness;
pub mod config;
pub mod levi;
pub mod projection;
pub mod report;
pub mod scaling;
pub mod slices;
pub mod triangle;

pub use config::{Experiment, ExperimentConfig};
pub use report::{ExperimentReport, Metadata, ReportRow, Status, TraceRow};

use crate::error::Result;

/// Runs the configured experiment. Slice pictures are written to the
/// config's output directory; reports are returned, not written.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = cfg.worm_spec()?;
    let metadata = Metadata::new(cfg.seed, cfg.resolution, &spec.to_json());
    let (seed, res) = (cfg.seed, cfg.resolution);
    match &cfg.experiment {
        Experiment::LeviAudit(p) => levi::run_levi_audit(&spec, p, metadata),
        Experiment::MetricBench(p) => bench::run_metric_bench(p, res, seed, metadata),
        Experiment::TriangleGrowth(p) => triangle::run_triangle_growth(&spec, p, res, seed, metadata),
        Experiment::ScalingConvergence(p) => scaling::run_scaling_convergence(&spec, p, res, metadata),
        Experiment::DeltaGrowth(p) => triangle::run_delta_growth(&spec, p, res, seed, metadata),
        Experiment::ProjectionAudit(p) => projection::run_projection_audit(&spec, p, res, seed, metadata),
        Experiment::Completeness(p) => completeness::run_completeness(&spec, p, metadata),
        Experiment::Slice(p) => Ok(slices::render_slices(&spec, p, &cfg.output_dir, metadata)?.0),
    }
}
