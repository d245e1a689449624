//! Graph distances along a sequence tending to a boundary point of the Worm.

use crate::error::{Error, Result};
use crate::geom::{ComplexPoint2, ComplexScalar};
use crate::numeric::{completeness_probe_with, DomainHandle, ProbeConfig};
use crate::worm::WormSpec;

use super::config::CompletenessParams;
use super::report::{ExperimentReport, Metadata, ReportRow};

pub fn run_completeness(spec: &WormSpec, p: &CompletenessParams, metadata: Metadata) -> Result<ExperimentReport> {
    let z = ComplexScalar::new(p.z[0], p.z[1]);
    let target = spec.boundary_point(z, p.phi)?.ok_or_else(|| Error::InvalidParameter(format!("empty slice over {z}")))?;
    let centre = spec.boundary_point(z, std::f64::consts::PI)?.expect("slice is nonempty");
    let along = |s: f64| ComplexPoint2::new(z, centre.w() + (target.w() - centre.w()) * s);
    let o = along(0.5)?;
    let domain = DomainHandle::worm(spec.clone(), 1.0)?;
    let cfg = ProbeConfig { step: p.step, width: p.width, disc: p.disc.clone() };
    let mut rep = ExperimentReport::new("completeness", metadata);

    let d = completeness_probe_with(&domain, &o, &target, p.steps, &cfg)?;
    for (k, v) in d.iter().enumerate() {
        rep.push(ReportRow::record(format!("distance/k={}", k + 1), *v));
    }
    rep.push(ReportRow::holds("strictly_increasing", d.windows(2).all(|w| w[1] > w[0])));
    rep.push(ReportRow::at_least("final_over_initial", d[d.len() - 1] / d[0], p.min_ratio));

    let apex = along(0.75)?;
    let ctl = completeness_probe_with(&domain, &o, &apex, p.steps, &cfg)?;
    let last = ctl[ctl.len() - 1];
    rep.push(ReportRow::record("control_final", last));
    rep.push(ReportRow::at_most("control_last_increment", (last - ctl[ctl.len() - 2]).abs(), p.control_increment * last));
    Ok(rep)
}
