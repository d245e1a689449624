//! Numerical Kobayashi–Royden estimates and graph distances for domains
//! without closed forms.

mod disc;
mod domain;
mod graph;

pub use disc::{royden_upper, DiscSearchConfig, UpperEstimate};
pub use domain::{DomainHandle, LowerBound, LowerBoundSource};
pub use graph::{
    build_filtered, build_metric_graph, completeness_probe, completeness_probe_with, graph_distance, ChartCoords, Edge, GraphOracle, GraphPath, LatticeChart, MetricGraph, ProbeConfig,
    SamplingRegion, Stencil,
};
