//! Non-slim triangles and δ growth on the classical pre-Worm `W_in`.
//!
//! Both experiments live on the universal cover `S × H` of `W_in`, with the
//! base strip in its half-plane model. A base point `T` close to the
//! boundary has a large trivializing radius, so on the ball about `(T, u)`
//! that matters here the pre-Worm distance is the product distance
//! `max(k_H(T₁, T₂), k_H(u₁, u₂))`. The rescaling `T ↦ (T - i Im T₀)/Re T₀`
//! is an automorphism of `H`, so graphs are built about `T₀ = 1` in the
//! normalised chart, where the lines `x₁ = x₃ = 0` are unit-speed geodesics.

use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{ModelDomain, PlanarOracle};
use crate::geom::{AccuracyClass, ComplexPoint2, ComplexScalar, MetricOracle};
use crate::gromov::{
    bilipschitz_constant_probe, build_theorem_triangle, delta_from_matrix, quasigeodesic_check, slimness, BilipschitzProbe, QuasiConstants, SampledCurve, SampledTriangle,
    TriangleRecipe, DEFAULT_DELTA_SEED,
};
use crate::numeric::{build_metric_graph, DiscSearchConfig, DomainHandle, GraphOracle, LatticeChart, MetricGraph, SamplingRegion, Stencil};
use crate::worm::{CoverCoords, StripCover, WormSpec};

use super::config::{ConstantProbeParams, DeltaParams, TriangleParams};
use super::report::{ExperimentReport, Metadata, ReportRow, TraceRow};

fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

/// Exact distance of the classical pre-Worm on cover coordinates, with the
/// base point in `z` and the fiber point in `w`.
#[derive(Debug, Clone, Copy)]
pub struct CoverPointOracle(pub StripCover);

impl MetricOracle for CoverPointOracle {
    type Point = ComplexPoint2;

    fn distance(&self, p: &ComplexPoint2, q: &ComplexPoint2) -> Result<f64> {
        if p == q {
            return Ok(0.0);
        }
        let key = |p: &ComplexPoint2| (p.z().re, p.z().im, p.w().re, p.w().im);
        let (p, q) = if key(p) <= key(q) { (p, q) } else { (q, p) };
        self.0.cover_distance(&CoverCoords { t: p.z(), u: p.w() }, &CoverCoords { t: q.z(), u: q.w() })
    }

    fn accuracy(&self) -> AccuracyClass {
        AccuracyClass::Exact
    }
}

fn classical_cover(spec: &WormSpec) -> Result<StripCover> {
    if !spec.angle().is_classical() {
        return Err(Error::Unsupported("cover experiments need the classical angle function"));
    }
    Ok(StripCover::new(spec.inner()))
}

/// Base point on the radial ray towards the outer circle of `X_in`,
/// `T = sin ε - i cos ε`, whose trivializing radius is `radius`; `T = 1`
/// when that already suffices. `None` when `ε` would underflow.
pub fn base_point_for_radius(cover: &StripCover, radius: f64) -> Result<Option<(ComplexScalar, f64)>> {
    let at = |log_eps: f64| {
        let e = log_eps.exp();
        c(e.sin(), -e.cos())
    };
    let r = |log_eps: f64| cover.trivializing_radius(at(log_eps));
    let (mut lo, mut hi) = (1e-300f64.ln(), FRAC_PI_2.ln());
    if r(hi)? >= radius {
        return Ok(Some((c(1.0, 0.0), cover.trivializing_radius(c(1.0, 0.0))?)));
    }
    if r(lo)? < radius {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r(mid)? >= radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((at(lo), r(lo)?)))
}

/// Empirical bilipschitz constant on the base annulus `X_in`, probed about
/// `|z| = 1` on a lattice in `log z`.
pub fn annulus_constant_probe(spec: &WormSpec, p: &ConstantProbeParams, step: f64, seed: u64) -> Result<BilipschitzProbe> {
    let inner = spec.inner();
    let (a, b) = (0.5 * inner.lo(), 0.5 * inner.hi());
    let annulus = ModelDomain::Annulus { inner: a.exp(), outer: b.exp() };
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a) - 0.5 * step;
    let n = (half / step).floor();
    let (lo, hi) = (mid - n * step, mid + n * step);
    let region = SamplingRegion::new(LatticeChart::Exponential, [lo, -std::f64::consts::PI, 0.0, 0.0], [hi, std::f64::consts::PI, 0.0, 0.0], step, Stencil::Product16)?;
    let g = build_metric_graph(&DomainHandle::Model(annulus), &region, &DiscSearchConfig::linear())?;
    let centre = g.node_near(&[mid, 0.0, 0.0, 0.0]).or_else(|_| g.snap(&ComplexPoint2::new(c(mid.exp(), 0.0), c(0.0, 0.0))?))?;
    bilipschitz_constant_probe(&g, centre, p.radius, p.sources, seed)
}

/// Graph of `H × H` in normalised coordinates about `(1, 1)`: the square
/// `[lo, hi]²` in `(x₀, x₂)` and three layers in `x₁`, `x₃`.
pub fn slab_graph(lo: f64, hi: f64, step: f64) -> Result<MetricGraph> {
    let rhp2 = ModelDomain::product(ModelDomain::RightHalfPlane, ModelDomain::RightHalfPlane)?;
    let region = SamplingRegion::new(LatticeChart::HalfPlanePair { t0: c(1.0, 0.0), u0: c(1.0, 0.0) }, [lo, -step, lo, -step], [hi, step, hi, step], step, Stencil::TwoAxis)?;
    build_metric_graph(&DomainHandle::Model(rhp2), &region, &DiscSearchConfig::linear())
}

/// Unit-speed geodesic `x ↦ i Im x₀ + Re x₀ e^{2t}` sampled at `m + 1` points.
fn halfplane_ray(x0: ComplexScalar, t_n: f64, m: usize) -> Result<SampledCurve<ComplexScalar>> {
    let params: Vec<f64> = (0..=m).map(|k| t_n * k as f64 / m as f64).collect();
    let pts = params.iter().map(|t| if *t == 0.0 { x0 } else { c(x0.re * (2.0 * t).exp(), x0.im) }).collect();
    SampledCurve::new(params, pts, QuasiConstants::GEODESIC)
}

/// Triangle on the slab graph with the sides of the theorem triangle along
/// lattice nodes, `m` steps per leg.
fn graph_triangle(g: &MetricGraph, m: usize, claimed: QuasiConstants) -> Result<SampledTriangle<usize>> {
    let h = g.resolution();
    let node = |x0: usize, x2: usize| g.node_near(&[x0 as f64 * h, 0.0, x2 as f64 * h, 0.0]);
    let params = |n: usize| (0..n).map(|k| k as f64 * h).collect::<Vec<_>>();
    let a = SampledCurve::new(params(m + 1), (0..=m).map(|k| node(0, k)).collect::<Result<_>>()?, claimed)?;
    let b = SampledCurve::new(params(m + 1), (0..=m).map(|k| node(k, 0)).collect::<Result<_>>()?, claimed)?;
    let mut pts: Vec<usize> = (0..=m).map(|k| node(k, m)).collect::<Result<_>>()?;
    for k in (0..m).rev() {
        pts.push(node(m, k)?);
    }
    let c = SampledCurve::new(params(2 * m + 1), pts, claimed)?;
    SampledTriangle::new(a, b, c)
}

pub fn run_triangle_growth(spec: &WormSpec, p: &TriangleParams, resolution: f64, seed: u64, metadata: Metadata) -> Result<ExperimentReport> {
    let cover = classical_cover(spec)?;
    let rhp2 = ModelDomain::product(ModelDomain::RightHalfPlane, ModelDomain::RightHalfPlane)?;
    let exact_cover = CoverPointOracle(cover);
    let mut rep = ExperimentReport::new("triangle_growth", metadata);
    let probe = annulus_constant_probe(spec, &p.probe, resolution, seed)?;
    let constant = probe.constant;
    rep.push(ReportRow::record("c_probe", constant));
    rep.push(ReportRow::record("c_probe_pairs", probe.pairs as f64));
    let claimed = QuasiConstants::new(2.0 * constant, 0.0)?;
    let mut graph_slims: Vec<(f64, f64)> = Vec::new();
    for &t_n in &p.scales {
        let tag = format!("t={t_n}");
        let steps = t_n / resolution;
        if steps < p.min_steps {
            rep.push(ReportRow::inconclusive(format!("lattice_steps/{tag}"), steps));
            continue;
        }
        let radius = p.radius_factor * constant * t_n;
        let Some((base, r_n)) = base_point_for_radius(&cover, radius)? else {
            rep.push(ReportRow::infeasible(format!("trivializing_radius/{tag}"), radius));
            continue;
        };
        rep.push(ReportRow::at_least(format!("trivializing_radius/{tag}"), r_n, radius * (1.0 - 1e-9)));
        rep.push(ReportRow::record(format!("log10_eps/{tag}"), base.re.log10()));

        let m = steps.round().max(1.0) as usize;
        let t_eff = m as f64 * resolution;
        let q = c(1.0, 0.0);
        let recipe = TriangleRecipe { z_n: base, q, t_n: t_eff, gamma: halfplane_ray(base, t_eff, m)?, sigma: halfplane_ray(q, t_eff, m)?, claimed };
        let tri = build_theorem_triangle(&recipe)?;
        let tol = p.slim_tol_steps * tri.sampling_step();
        let slim_exact = slimness(&rhp2, &tri)?;
        rep.push(ReportRow::at_most(format!("slim_exact_error/{tag}"), (slim_exact - t_eff).abs(), tol));
        let slim_cover = slimness(&exact_cover, &tri)?;
        rep.push(ReportRow::at_most(format!("slim_preworm_error/{tag}"), (slim_cover - t_eff).abs(), tol));
        for (name, side) in [("a", &tri.a), ("b", &tri.b), ("c", &tri.c)] {
            let fit = quasigeodesic_check(&rhp2, side)?;
            rep.push(ReportRow::holds(format!("quasigeodesic/{tag}/{name}"), fit.ok));
            rep.push(ReportRow::record(format!("a_fit/{tag}/{name}"), fit.a_fit));
        }

        let g = slab_graph(-2.0 * resolution, t_eff + 2.0 * resolution, resolution)?;
        let gt = graph_triangle(&g, m, claimed)?;
        let slim_graph = slimness(&GraphOracle(&g), &gt)?;
        rep.push(ReportRow::record(format!("slim_graph/{tag}"), slim_graph));
        graph_slims.push((t_n, slim_graph));
        rep.trace.push(TraceRow { scale: r_n, t_n: Some(t_n), delta: None, slimness: Some(slim_graph) });
    }
    if graph_slims.len() >= 2 {
        let monotone = graph_slims.windows(2).all(|w| w[1].1 >= w[0].1);
        rep.push(ReportRow::holds("slim_graph_nondecreasing", monotone));
        for &(t_n, s) in &graph_slims[graph_slims.len() - 2..] {
            rep.push(ReportRow::at_least(format!("slim_graph_over_t/t={t_n}"), s / t_n, p.graph_ratio));
        }
    }
    Ok(rep)
}

/// Picks `per` new distinct entries of `pool` not yet in `chosen`.
fn draw_new(pool: &[usize], chosen: &mut Vec<usize>, per: usize, rng: &mut ChaCha8Rng) {
    let mut fresh: Vec<usize> = pool.iter().copied().filter(|i| !chosen.contains(i)).collect();
    fresh.shuffle(rng);
    chosen.extend(fresh.into_iter().take(per));
}

/// δ of nested samples in graph balls of the pre-Worm cover.
pub fn preworm_delta_growth(p: &DeltaParams, resolution: f64, seed: u64) -> Result<Vec<(f64, f64, usize)>> {
    let r_max = *p.radii.last().expect("validated radii");
    let g = slab_graph(-r_max - 2.0 * resolution, r_max + 2.0 * resolution, resolution)?;
    let centre = g.node_near(&[0.0; 4])?;
    let from_centre = g.distances_from(&[centre]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = vec![centre];
    let mut sizes = Vec::new();
    for &r in &p.radii {
        let pool: Vec<usize> = (0..g.node_count()).filter(|&i| from_centre[i] < r).collect();
        draw_new(&pool, &mut chosen, p.per_radius, &mut rng);
        sizes.push(chosen.len());
    }
    let rows = GraphOracle(&g).distance_rows(&chosen, &chosen)?;
    p.radii
        .iter()
        .zip(sizes)
        .map(|(&r, n)| {
            let sub: Vec<Vec<f64>> = rows[..n].iter().map(|row| row[..n].to_vec()).collect();
            Ok((r, delta_from_matrix(&sub, DEFAULT_DELTA_SEED)?, n))
        })
        .collect()
}

/// δ of nested samples in Kobayashi balls about 0 in the disc.
pub fn disc_delta_growth(radii: &[f64], per: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd15c);
    let mut pts = vec![c(0.0, 0.0)];
    let oracle = PlanarOracle(ModelDomain::UnitDisc);
    let mut out = Vec::new();
    for &r in radii {
        for _ in 0..per {
            let rho: f64 = rng.gen_range(0.0..r);
            pts.push(ComplexScalar::from_polar(rho.tanh(), rng.gen_range(0.0..std::f64::consts::TAU)));
        }
        let rows = oracle.distance_rows(&pts, &pts)?;
        out.push((r, delta_from_matrix(&rows, DEFAULT_DELTA_SEED)?));
    }
    Ok(out)
}

pub fn run_delta_growth(spec: &WormSpec, p: &DeltaParams, resolution: f64, seed: u64, metadata: Metadata) -> Result<ExperimentReport> {
    let cover = classical_cover(spec)?;
    let mut rep = ExperimentReport::new("delta_growth", metadata);
    let r_max = *p.radii.last().expect("validated radii");
    let need = p.radius_factor * r_max;
    match base_point_for_radius(&cover, need)? {
        Some((base, r)) => {
            rep.push(ReportRow::at_least("trivializing_radius", r, need * (1.0 - 1e-9)));
            rep.push(ReportRow::record("log10_eps", base.re.log10()));
        }
        None => {
            rep.push(ReportRow::infeasible("trivializing_radius", need));
            return Ok(rep);
        }
    }
    let deltas = preworm_delta_growth(p, resolution, seed)?;
    for &(r, d, n) in &deltas {
        rep.push(ReportRow::record(format!("delta/R={r}"), d));
        rep.push(ReportRow::record(format!("samples/R={r}"), n as f64));
        rep.trace.push(TraceRow { scale: r, t_n: None, delta: Some(d), slimness: None });
    }
    rep.push(ReportRow::holds("delta_nondecreasing", deltas.windows(2).all(|w| w[1].1 >= w[0].1)));
    let gain = deltas[deltas.len() - 1].1 - deltas[0].1;
    rep.push(ReportRow::at_least("delta_gain", gain, p.gain));
    let control = disc_delta_growth(&p.control_radii, p.control_per_radius, seed)?;
    for &(r, d) in &control {
        rep.push(ReportRow::record(format!("control_delta/R={r}"), d));
    }
    let worst = control.iter().fold(0.0f64, |m, x| m.max(x.1));
    rep.push(ReportRow::at_most("control_delta_max", worst, p.control_ceiling));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_points_reach_the_requested_radius() {
        let cover = StripCover::new(WormSpec::classical_default().inner());
        for radius in [1.0, 20.0, 70.0] {
            let (t, r) = base_point_for_radius(&cover, radius).unwrap().unwrap();
            assert!(r >= radius * (1.0 - 1e-9), "{r} < {radius}");
            assert!(t.re > 0.0);
        }
        assert!(base_point_for_radius(&cover, 1e5).unwrap().is_none());
    }

    #[test]
    fn cover_oracle_matches_the_product_near_the_boundary() {
        let cover = StripCover::new(WormSpec::classical_default().inner());
        let (t, _) = base_point_for_radius(&cover, 40.0).unwrap().unwrap();
        let rhp2 = ModelDomain::product(ModelDomain::RightHalfPlane, ModelDomain::RightHalfPlane).unwrap();
        let o = CoverPointOracle(cover);
        let p = ComplexPoint2::new(t, c(1.0, 0.0)).unwrap();
        let q = ComplexPoint2::new(c(t.re * 7.0, t.im), c(3.0, 0.0)).unwrap();
        assert_eq!(o.distance(&p, &q).unwrap(), rhp2.distance(&p, &q).unwrap());
        assert!((o.distance(&p, &q).unwrap() - 0.5 * 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn slab_graph_is_close_to_the_max_norm() {
        let g = slab_graph(-0.1, 1.1, 0.1).unwrap();
        let a = g.node_near(&[0.0; 4]).unwrap();
        let b = g.node_near(&[1.0, 0.0, 0.4, 0.0]).unwrap();
        let d = g.path_between(a, b).unwrap().length;
        assert!((d - 1.0).abs() < 5e-3, "{d}");
    }

    #[test]
    fn small_triangle_run() {
        let spec = WormSpec::classical_default();
        let p = TriangleParams { scales: vec![0.1, 1.0], ..TriangleParams::default() };
        let rep = run_triangle_growth(&spec, &p, 0.1, 1, Metadata::new(1, 0.1, "")).unwrap();
        assert_eq!(rep.row("lattice_steps/t=0.1").unwrap().status, super::super::report::Status::Inconclusive);
        assert!(rep.passed(), "{:#?}", rep.rows);
        let s = rep.row("slim_graph/t=1").unwrap().value;
        assert!((0.9..=1.1).contains(&s), "{s}");
    }
}
