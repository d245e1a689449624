//! The bundle projection `W_in → X_in` does not increase distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{annulus_distance, disc_distance, ModelDomain};
use crate::geom::{ComplexPoint2, ComplexScalar, MetricOracle};
use crate::worm::{CoverCoords, CoverOracle, WormSpec};

use super::config::ProjectionParams;
use super::report::{ExperimentReport, Metadata, ReportRow};

/// Random point of the right half-plane with `|log| ρ| ≤ 1`, `|arg| ≤ 1.2`.
fn halfplane_sample(rng: &mut ChaCha8Rng) -> ComplexScalar {
    ComplexScalar::from_polar(rng.gen_range(-1.0f64..1.0).exp(), rng.gen_range(-1.2..1.2))
}

fn preworm_sample(oracle: &CoverOracle, rng: &mut ChaCha8Rng) -> Result<ComplexPoint2> {
    oracle.cover().to_ambient(&CoverCoords { t: halfplane_sample(rng), u: halfplane_sample(rng) })
}

pub fn run_projection_audit(spec: &WormSpec, p: &ProjectionParams, resolution: f64, seed: u64, metadata: Metadata) -> Result<ExperimentReport> {
    if !spec.angle().is_classical() {
        return Err(Error::Unsupported("projection audit needs the classical angle function"));
    }
    let oracle = CoverOracle::new(&spec.inner_preworm())?;
    let inner = spec.inner();
    let (r_in, r_out) = ((0.5 * inner.lo()).exp(), (0.5 * inner.hi()).exp());
    let base = |a: &ComplexPoint2, b: &ComplexPoint2| annulus_distance(a.z(), b.z(), r_in, r_out);
    let slack = p.tol_factor * resolution;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ExperimentReport::new("projection_audit", metadata);

    let mut excess = f64::NEG_INFINITY;
    for _ in 0..p.pairs {
        let (a, b) = (preworm_sample(&oracle, &mut rng)?, preworm_sample(&oracle, &mut rng)?);
        excess = excess.max(base(&a, &b)? - oracle.distance(&a, &b)?);
    }
    rep.push(ReportRow::at_most("max_base_excess", excess, slack));

    let mut fiber: f64 = 0.0;
    for _ in 0..p.fiber_pairs {
        let a = preworm_sample(&oracle, &mut rng)?;
        let t = oracle.cover().to_cover(&a)?.t;
        let b = oracle.cover().to_ambient(&CoverCoords { t, u: halfplane_sample(&mut rng) })?;
        fiber = fiber.max(base(&a, &b)?);
    }
    rep.push(ReportRow::at_most("max_fiber_base_distance", fiber, slack));

    // bidisc: equality when the base factor realises the max
    let bidisc = ModelDomain::bidisc();
    let in_disc = |rng: &mut ChaCha8Rng, r: f64| ComplexScalar::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    let mut gap: f64 = 0.0;
    for _ in 0..p.product_pairs {
        let (z1, z2) = (in_disc(&mut rng, 0.9), in_disc(&mut rng, 0.9));
        let w = in_disc(&mut rng, 0.5);
        let a = ComplexPoint2::new(z1, w)?;
        let b = ComplexPoint2::new(z2, w)?;
        gap = gap.max((bidisc.distance(&a, &b)? - disc_distance(z1, z2)?).abs());
    }
    rep.push(ReportRow::at_most("bidisc_base_gap", gap, slack));
    Ok(rep)
}
