//! Convergence of the rescaled Worms `B_n(W)` to the pre-Worm `W_in`.
//!
//! Graph distances on a fixed lattice over `X_in` are compared between
//! `B_n` and `W_in`, and the metric ratio `K_{B_n} / K_{W_in}` is tracked on a
//! fixed set of tangent vectors.

use crate::error::Result;
use crate::geom::{ComplexScalar, TangentVector2};
use crate::numeric::{build_metric_graph, royden_upper, DiscSearchConfig, DomainHandle, LatticeChart, MetricGraph, SamplingRegion, Stencil};
use crate::worm::WormSpec;

use super::config::ScalingParams;
use super::report::{ExperimentReport, Metadata, ReportRow, TraceRow};

fn c(x: [f64; 2]) -> ComplexScalar {
    ComplexScalar::new(x[0], x[1])
}

fn chart(spec: &WormSpec, p: &ScalingParams) -> LatticeChart {
    LatticeChart::ClassicalCover { interval: spec.inner(), t0: c(p.t0), u0: c(p.u0) }
}

fn region(spec: &WormSpec, p: &ScalingParams, step: f64) -> Result<SamplingRegion> {
    let h = p.half_width;
    SamplingRegion::new(chart(spec, p), [-h; 4], [h; 4], step, Stencil::TwoAxis)
}

/// Graph distances between the configured pairs; `None` when an endpoint is
/// missing from the graph or the pair is disconnected.
fn pair_distances(g: &MetricGraph, p: &ScalingParams) -> Vec<Option<f64>> {
    p.pairs
        .iter()
        .map(|[a, b]| {
            let (a, b) = (g.node_near(a).ok()?, g.node_near(b).ok()?);
            g.path_between(a, b).ok().map(|path| path.length)
        })
        .collect()
}

/// `K_{B_n}(v) / K_{W_in}(v) - 1` over the configured vectors, using the
/// disc-search upper bound on `B_n`; `None` for vectors based outside `B_n`.
fn metric_ratios(spec: &WormSpec, p: &ScalingParams, n: f64, cfg: &DiscSearchConfig) -> Result<Vec<Option<f64>>> {
    let chart = chart(spec, p);
    let inner = DomainHandle::PreWorm(spec.inner_preworm());
    let bn = DomainHandle::worm(spec.clone(), n)?;
    p.vectors
        .iter()
        .map(|(x, [dz, dw])| {
            let Some(base) = chart.map(x) else { return Ok(None) };
            if !bn.contains(&base) {
                return Ok(None);
            }
            let v = TangentVector2::new(base, c(*dz), c(*dw))?;
            let exact = inner.exact_royden(&v).expect("classical pre-Worm")?;
            Ok(Some(royden_upper(&bn, &v, cfg)?.value / exact - 1.0))
        })
        .collect()
}

pub fn run_scaling_convergence(spec: &WormSpec, p: &ScalingParams, resolution: f64, metadata: Metadata) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("scaling_convergence", metadata);
    let region = region(spec, p, resolution)?;
    let g_in = build_metric_graph(&DomainHandle::PreWorm(spec.inner_preworm()), &region, &p.edge_disc)?;
    let d_in = pair_distances(&g_in, p);
    let mut residuals: Vec<(f64, f64)> = Vec::new();
    let mut epsilons: Vec<(f64, f64)> = Vec::new();
    for &n in &p.n_list {
        let tag = format!("n={n}");
        let g = build_metric_graph(&DomainHandle::worm(spec.clone(), n)?, &region, &p.edge_disc)?;
        rep.push(ReportRow::record(format!("nodes/{tag}"), g.node_count() as f64));
        let d_n = pair_distances(&g, p);
        let worst = d_in.iter().zip(&d_n).try_fold(0.0f64, |m, (a, b)| Some(m.max((a.as_ref()? - b.as_ref()?).abs())));
        match worst {
            Some(r) => {
                rep.push(ReportRow::record(format!("residual/{tag}"), r));
                residuals.push((n, r));
                rep.trace.push(TraceRow { scale: n, t_n: None, delta: Some(r), slimness: None });
            }
            None => rep.push(ReportRow::infeasible(format!("residual/{tag}"), f64::NAN)),
        }
        let ratios = metric_ratios(spec, p, n, &p.metric_disc)?;
        if ratios.iter().any(Option::is_none) {
            rep.push(ReportRow::infeasible(format!("epsilon/{tag}"), f64::NAN));
            continue;
        }
        let ratios: Vec<f64> = ratios.into_iter().flatten().collect();
        let eps = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
        let below = ratios.iter().fold(0.0f64, |m, r| m.max(-r));
        rep.push(ReportRow::record(format!("epsilon/{tag}"), eps));
        rep.push(ReportRow::record(format!("reverse_epsilon/{tag}"), below));
        epsilons.push((n, eps));
    }
    let combined = 2.0 * resolution;
    if let (Some(first), Some(last)) = (residuals.first(), residuals.last()) {
        rep.push(ReportRow::at_most(format!("final_residual/n={}", last.0), last.1, p.residual_factor * combined));
        rep.push(ReportRow::at_most("final_residual_vs_first", last.1, first.1));
    }
    if epsilons.len() >= 2 {
        rep.push(ReportRow::holds("epsilon_nonincreasing", epsilons.windows(2).all(|w| w[1].1 <= w[0].1)));
    }
    Ok(rep)
}
