//! Levi audit of the boundary.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::Result;
use crate::geom::{ComplexPoint2, ComplexScalar};
use crate::worm::{BoundaryStratum, EtaFunction, WormSpec, DEFAULT_BOUNDARY_TOL};

use super::config::LeviAuditParams;
use super::report::{ExperimentReport, Metadata, ReportRow};

#[derive(Debug, Clone, Copy)]
struct Sample {
    stratum: BoundaryStratum,
    min_eigenvalue: f64,
    tangential: f64,
    kernel: f64,
    gradient: f64,
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    count: usize,
    min_eigenvalue: f64,
    min_tangential: f64,
    max_abs_tangential: f64,
    max_kernel: f64,
    min_gradient: f64,
}

impl Default for Stats {
    fn default() -> Self {
        Self { count: 0, min_eigenvalue: f64::INFINITY, min_tangential: f64::INFINITY, max_abs_tangential: 0.0, max_kernel: 0.0, min_gradient: f64::INFINITY }
    }
}

impl Stats {
    fn add(&mut self, s: &Sample) {
        self.count += 1;
        self.min_eigenvalue = self.min_eigenvalue.min(s.min_eigenvalue);
        self.min_tangential = self.min_tangential.min(s.tangential);
        self.max_abs_tangential = self.max_abs_tangential.max(s.tangential.abs());
        self.max_kernel = self.max_kernel.max(s.kernel);
        self.min_gradient = self.min_gradient.min(s.gradient);
    }
}

fn stratum_name(s: BoundaryStratum) -> &'static str {
    match s {
        BoundaryStratum::Spine => "spine",
        BoundaryStratum::Body => "body",
        BoundaryStratum::Exceptional => "exceptional",
        BoundaryStratum::Cap => "cap",
    }
}

fn measure(spec: &WormSpec, p: &ComplexPoint2) -> Result<Sample> {
    let stratum = spec.classify_boundary(p, DEFAULT_BOUNDARY_TOL)?;
    let levi = spec.levi_form(p)?;
    let fp = spec.angle().f_prime(p.z())?;
    let kernel = levi.apply(ComplexScalar::new(2.0, 0.0), p.w() * fp).abs() / (1.0 + levi.max_eigenvalue());
    Ok(Sample { stratum, min_eigenvalue: levi.min_eigenvalue(), tangential: spec.tangential_curvature(p)?, kernel, gradient: spec.gradient_norm(p)? })
}

/// Boundary points over `levels` levels of `θ` strictly inside `J`: `phis`
/// angles around each slice circle, plus the spine point `w = 0` where the
/// slice passes through the origin. Over `J ∖ I` the point nearest the
/// origin, `φ = π`, is returned separately: there the curvature carries the
/// flatness of `η` at `∂I`.
fn boundary_samples(spec: &WormSpec, p: &LeviAuditParams) -> Result<(Vec<ComplexPoint2>, Vec<ComplexPoint2>)> {
    let outer = spec.outer();
    let per_level: Vec<Result<(Vec<ComplexPoint2>, Vec<ComplexPoint2>)>> = (0..p.levels)
        .into_par_iter()
        .map(|k| {
            let level = outer.lo() + outer.width() * (k as f64 + 0.5) / p.levels as f64;
            let (mut pts, mut axis) = (Vec::new(), Vec::new());
            for z in spec.level_set_samples(level, p.rays) {
                for j in 0..p.phis {
                    if let Some(b) = spec.boundary_point(z, TAU * (j as f64 + 0.5) / p.phis as f64)? {
                        pts.push(b);
                    }
                }
                if spec.inner().contains_closed(level) {
                    pts.push(ComplexPoint2::new(z, ComplexScalar::new(0.0, 0.0))?);
                } else if let Some(b) = spec.boundary_point(z, PI)? {
                    axis.push(b);
                }
            }
            Ok((pts, axis))
        })
        .collect();
    let mut out = (Vec::new(), Vec::new());
    for r in per_level {
        let (pts, axis) = r?;
        out.0.extend(pts);
        out.1.extend(axis);
    }
    Ok(out)
}

pub fn run_levi_audit(spec: &WormSpec, params: &LeviAuditParams, metadata: Metadata) -> Result<ExperimentReport> {
    let spec = if params.negative_control {
        WormSpec::with_corrupted_eta(spec.angle().clone(), EtaFunction::flipped_control(spec.inner(), spec.outer())?)?
    } else {
        spec.clone()
    };
    let (points, axis) = boundary_samples(&spec, params)?;
    let samples: Vec<Sample> = points.par_iter().map(|p| measure(&spec, p)).collect::<Result<_>>()?;
    let mut strata: BTreeMap<&'static str, Stats> = BTreeMap::new();
    let mut all = Stats::default();
    for s in &samples {
        strata.entry(stratum_name(s.stratum)).or_default().add(s);
        all.add(s);
    }
    let mut rep = ExperimentReport::new("levi_audit", metadata);
    rep.push(ReportRow::at_least("samples", samples.len() as f64, params.min_samples as f64));
    rep.push(ReportRow::at_least("min_eigenvalue/all", all.min_eigenvalue, params.eigen_floor));
    rep.push(ReportRow::at_least("min_gradient/all", all.min_gradient, params.gradient_floor));
    for (name, st) in &strata {
        rep.push(ReportRow::record(format!("count/{name}"), st.count as f64));
        rep.push(ReportRow::at_least(format!("min_eigenvalue/{name}"), st.min_eigenvalue, params.eigen_floor));
        match *name {
            "body" | "cap" => rep.push(ReportRow::at_least(format!("min_tangential/{name}"), st.min_tangential, params.strict_floor)),
            "spine" => rep.push(ReportRow::at_most("max_abs_tangential/spine", st.max_abs_tangential, params.spine_tol)),
            _ => rep.push(ReportRow::record(format!("min_tangential/{name}"), st.min_tangential)),
        }
    }
    for name in ["body", "cap"] {
        if !strata.contains_key(name) {
            rep.push(ReportRow::at_least(format!("count/{name}"), 0.0, 1.0));
        }
    }
    let axis: Vec<Sample> = axis.par_iter().map(|p| measure(&spec, p)).collect::<Result<_>>()?;
    if !axis.is_empty() {
        let mut st = Stats::default();
        axis.iter().for_each(|s| st.add(s));
        rep.push(ReportRow::record("count/cap_axis", st.count as f64));
        rep.push(ReportRow::at_least("min_eigenvalue/cap_axis", st.min_eigenvalue, params.eigen_floor));
        rep.push(ReportRow::record("min_tangential/cap_axis", st.min_tangential));
    }
    if let Some(body) = strata.get("body") {
        rep.push(ReportRow::at_most("max_kernel_residual/body", body.max_kernel, params.kernel_tol));
    }
    Ok(rep)
}
