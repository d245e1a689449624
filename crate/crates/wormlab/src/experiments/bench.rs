//! Benchmarks of the oracles against closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exact::{annulus_distance, disc_distance, halfplane_distance, ModelDomain};
use crate::geom::{ComplexPoint2, ComplexScalar, TangentVector2};
use crate::numeric::{build_metric_graph, royden_upper, DiscSearchConfig, DomainHandle, LatticeChart, MetricGraph, SamplingRegion, Stencil};

use super::config::BenchParams;
use super::report::{ExperimentReport, Metadata, ReportRow};

fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

fn point(z: ComplexScalar, w: ComplexScalar) -> Result<ComplexPoint2> {
    ComplexPoint2::new(z, w)
}

fn in_disc(rng: &mut ChaCha8Rng, radius: f64) -> ComplexScalar {
    loop {
        let z = c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() <= radius {
            return z;
        }
    }
}

/// Closed-form checks: disc and half-plane values, rotation invariance on an
/// annulus, and the product formula on diagonal pairs.
pub fn exact_suite(tol: f64) -> Result<Vec<ReportRow>> {
    let target = 0.5f64.atanh();
    let mut rows = vec![
        ReportRow::at_most("exact/disc_0_0.5", (disc_distance(c(0.0, 0.0), c(0.5, 0.0))? - target).abs(), tol),
        ReportRow::at_most("exact/halfplane_1_3", (halfplane_distance(c(1.0, 0.0), c(3.0, 0.0))? - target).abs(), tol),
    ];
    let (inner, outer) = (0.5, 2.0);
    let pairs = [(c(0.8, 0.1), c(-0.3, 1.2)), (c(1.5, 0.0), c(-1.5, 0.1)), (c(0.0, 0.6), c(0.55, 0.3))];
    let mut worst: f64 = 0.0;
    for (p, q) in pairs {
        let d = annulus_distance(p, q, inner, outer)?;
        for k in 1..12 {
            let r = ComplexScalar::from_polar(1.0, 0.5 * k as f64);
            worst = worst.max((annulus_distance(r * p, r * q, inner, outer)? - d).abs());
        }
    }
    rows.push(ReportRow::at_most("exact/annulus_rotation", worst, tol));
    let bidisc = ModelDomain::bidisc();
    let rhp2 = ModelDomain::product(ModelDomain::RightHalfPlane, ModelDomain::RightHalfPlane)?;
    let mut worst: f64 = 0.0;
    for (a, b) in [(c(0.1, 0.2), c(-0.4, 0.5)), (c(0.0, 0.0), c(0.9, 0.0)), (c(-0.7, -0.1), c(0.2, 0.3))] {
        worst = worst.max((bidisc.distance(&point(a, a)?, &point(b, b)?)? - disc_distance(a, b)?).abs());
        let (ha, hb) = (a + 1.0, b + 1.0);
        worst = worst.max((rhp2.distance(&point(ha, ha)?, &point(hb, hb)?)? - halfplane_distance(ha, hb)?).abs());
    }
    rows.push(ReportRow::at_most("exact/product_diagonal", worst, tol));
    Ok(rows)
}

/// Relative errors of `royden_upper` on the disc at `(point, expected)`.
pub fn royden_rows(points: &[([f64; 2], f64)], cfg: &DiscSearchConfig, tol: f64) -> Result<Vec<ReportRow>> {
    let disc = DomainHandle::Model(ModelDomain::UnitDisc);
    points
        .iter()
        .map(|&([x, y], expected)| {
            let v = TangentVector2::new(point(c(x, y), c(0.0, 0.0))?, c(1.0, 0.0), c(0.0, 0.0))?;
            let k = royden_upper(&disc, &v, cfg)?.value;
            Ok(ReportRow::at_most(format!("royden_upper/disc_at_{x}_{y}"), (k / expected - 1.0).abs(), tol))
        })
        .collect()
}

/// Lattice graph of the disc at the given step.
pub fn disc_graph(step: f64) -> Result<MetricGraph> {
    let origin = point(c(0.0, 0.0), c(0.0, 0.0))?;
    let region = SamplingRegion::new(LatticeChart::Affine { origin }, [-0.98, -0.98, 0.0, 0.0], [0.98, 0.98, 0.0, 0.0], step, Stencil::Product16)?;
    build_metric_graph(&DomainHandle::Model(ModelDomain::UnitDisc), &region, &DiscSearchConfig::linear())
}

/// Worst relative error of disc graph distances, between lattice nodes near
/// `0 → 0.5` and `pairs` seeded pairs in `|z| ≤ radius`.
pub fn disc_graph_error(step: f64, pairs: usize, radius: f64, seed: u64) -> Result<f64> {
    let g = disc_graph(step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ends = vec![(c(0.0, 0.0), c(0.5, 0.0))];
    ends.extend((0..pairs).map(|_| (in_disc(&mut rng, radius), in_disc(&mut rng, radius))));
    let mut worst: f64 = 0.0;
    for (p, q) in ends {
        let a = g.snap(&point(p, c(0.0, 0.0))?)?;
        let b = g.snap(&point(q, c(0.0, 0.0))?)?;
        if a == b {
            continue;
        }
        let exact = disc_distance(g.nodes()[a].z(), g.nodes()[b].z())?;
        worst = worst.max((g.path_between(a, b)?.length / exact - 1.0).abs());
    }
    Ok(worst)
}

/// Relative errors of bidisc graph distances on lattices framed by each
/// pair's chord.
pub fn bidisc_graph_errors(p: &BenchParams, seed: u64) -> Result<Vec<f64>> {
    let bidisc = ModelDomain::bidisc();
    let handle = DomainHandle::Model(bidisc.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1d15c);
    let n = f64::from(p.bidisc_steps);
    let mut out = Vec::with_capacity(p.bidisc_pairs);
    for _ in 0..p.bidisc_pairs {
        let a = point(in_disc(&mut rng, p.bidisc_radius), in_disc(&mut rng, p.bidisc_radius))?;
        let b = point(in_disc(&mut rng, p.bidisc_radius), in_disc(&mut rng, p.bidisc_radius))?;
        let region = SamplingRegion::chord_frame(&a, &b, p.bidisc_steps, p.bidisc_transverse, Stencil::Ladder { reach: 3 })?;
        let g = build_metric_graph(&handle, &region, &DiscSearchConfig::linear())?;
        let (ia, ib) = (g.node_near(&[0.0; 4])?, g.node_near(&[n, 0.0, n, 0.0])?);
        let exact = bidisc.distance(&g.nodes()[ia], &g.nodes()[ib])?;
        out.push(g.path_between(ia, ib)?.length / exact - 1.0);
    }
    Ok(out)
}

pub fn run_metric_bench(p: &BenchParams, resolution: f64, seed: u64, metadata: Metadata) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("metric_bench", metadata);
    for row in exact_suite(p.exact_tol)? {
        rep.push(row);
    }
    for row in royden_rows(&p.royden_points, &p.disc, p.royden_rel_tol)? {
        rep.push(row);
    }
    rep.push(ReportRow::at_most("graph/disc_max_rel_error", disc_graph_error(resolution, p.disc_pairs, p.disc_radius, seed)?, p.disc_rel_tol));
    let errs = bidisc_graph_errors(p, seed)?;
    let worst = errs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    rep.push(ReportRow::record("graph/bidisc_pairs", errs.len() as f64));
    rep.push(ReportRow::record("graph/bidisc_mean_rel_error", errs.iter().sum::<f64>() / errs.len().max(1) as f64));
    rep.push(ReportRow::at_most("graph/bidisc_max_rel_error", worst, p.bidisc_rel_tol));
    Ok(rep)
}
