//! Upper bounds for the Kobayashi–Royden metric from explicit analytic discs.
//!
//! Every domain gets one or more holomorphic charts `𝔻^m → ambient` centred
//! at the base point. A candidate disc is a polynomial
//! `a(ζ) = s τ̂ ζ + Σ_{k≥2} c_k ζ^k` in chart coordinates, with `τ̂` the unit
//! chart direction of `v`; it is feasible when its sampled images keep the
//! interior margin. For fixed coefficients the largest feasible `s` is found
//! by bisection, and the coefficients are improved by a seeded compass search.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ModelDomain;
use crate::geom::{ComplexPoint2, ComplexScalar, TangentVector2};
use crate::worm::{AngleFunction, StripCover};

use super::domain::DomainHandle;

const I: ComplexScalar = ComplexScalar::new(0.0, 1.0);
const ONE: ComplexScalar = ComplexScalar::new(1.0, 0.0);
const ZERO: ComplexScalar = ComplexScalar::new(0.0, 0.0);
/// Grid the unit chart direction is snapped to, so that rescaled vectors
/// reproduce the same search.
const DIRECTION_GRID: f64 = 1.0 / (1u64 << 36) as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscSearchConfig {
    pub degree: usize,
    pub boundary_samples: usize,
    pub radii: Vec<f64>,
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per start.
    pub max_iters: usize,
    /// Required interior margin along the sampled disc.
    pub margin: f64,
    /// Relative tolerance of the radius bisection.
    pub tolerance: f64,
}

impl Default for DiscSearchConfig {
    fn default() -> Self {
        Self {
            degree: 6,
            boundary_samples: 48,
            radii: vec![0.3, 0.6, 0.85, 0.97, 0.995],
            restarts: 2,
            seed: 0,
            max_iters: 1500,
            margin: 1e-4,
            tolerance: 1e-7,
        }
    }
}

impl DiscSearchConfig {
    /// Linear discs only; used for graph edge weights.
    pub fn linear() -> Self {
        Self {
            degree: 1,
            boundary_samples: 24,
            radii: vec![0.5, 0.9, 0.99],
            restarts: 0,
            seed: 0,
            max_iters: 1,
            margin: 1e-4,
            tolerance: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("disc search: {m}")));
        if self.degree < 1 {
            return bad("degree must be at least 1");
        }
        if self.boundary_samples < 4 {
            return bad("need at least 4 boundary samples");
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return bad("radii must lie in (0, 1)");
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return bad("radii must be strictly increasing");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.margin > 0.0 && self.tolerance > 0.0 && self.tolerance < 0.1) {
            return bad("margin and tolerance must be positive");
        }
        Ok(())
    }

    fn r_max(&self) -> f64 {
        *self.radii.last().expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperEstimate {
    pub value: f64,
    /// No feasible polynomial disc; the value comes from the inscribed
    /// affine disc along `v`.
    pub fallback: bool,
    /// Objective evaluations spent.
    pub evaluations: usize,
}

/// Centred holomorphic parametrisation of a planar model by the unit disc.
#[derive(Debug, Clone, Copy)]
enum PlanarChart {
    Disc { z0: ComplexScalar },
    HalfPlane { t0: ComplexScalar },
    /// `z = m + (h/π) Log u`, `u` in the right half-plane.
    Strip { h: f64, m: f64, u0: ComplexScalar },
    /// `z = exp(c + i s)` with `s` in a strip of height `log(outer/inner)`.
    Annulus { c: f64, strip: StripChart },
}

#[derive(Debug, Clone, Copy)]
struct StripChart {
    h: f64,
    m: f64,
    u0: ComplexScalar,
}

impl StripChart {
    fn centred(h: f64, z0: ComplexScalar) -> Self {
        Self { h, m: z0.re, u0: ComplexScalar::from_polar(1.0, PI * z0.im / h) }
    }

    fn map(&self, a: ComplexScalar) -> ComplexScalar {
        self.m + self.h / PI * cayley(self.u0, a).ln()
    }

    fn deriv(&self) -> ComplexScalar {
        self.h / PI * 2.0 * self.u0.re / self.u0
    }
}

/// Cayley map of the disc onto the right half-plane sending 0 to `t0`.
fn cayley(t0: ComplexScalar, a: ComplexScalar) -> ComplexScalar {
    t0.re * (ONE + a) / (ONE - a) + I * t0.im
}

impl PlanarChart {
    fn centred(m: &ModelDomain, z0: ComplexScalar) -> Result<Self> {
        Ok(match *m {
            ModelDomain::UnitDisc => PlanarChart::Disc { z0 },
            ModelDomain::RightHalfPlane => PlanarChart::HalfPlane { t0: z0 },
            ModelDomain::Strip { height } => {
                let s = StripChart::centred(height, z0);
                PlanarChart::Strip { h: s.h, m: s.m, u0: s.u0 }
            }
            ModelDomain::Annulus { inner, outer } => {
                let c = 0.5 * (inner.ln() + outer.ln());
                let s0 = -I * (z0.ln() - c);
                PlanarChart::Annulus { c, strip: StripChart::centred((outer / inner).ln(), s0) }
            }
            ModelDomain::Product { .. } => return Err(Error::Unsupported("nested product chart")),
        })
    }

    fn map(&self, a: ComplexScalar) -> ComplexScalar {
        match *self {
            PlanarChart::Disc { z0 } => (a + z0) / (ONE + z0.conj() * a),
            PlanarChart::HalfPlane { t0 } => cayley(t0, a),
            PlanarChart::Strip { h, m, u0 } => StripChart { h, m, u0 }.map(a),
            PlanarChart::Annulus { c, strip } => (c + I * strip.map(a)).exp(),
        }
    }

    fn deriv(&self) -> ComplexScalar {
        match *self {
            PlanarChart::Disc { z0 } => ComplexScalar::new(1.0 - z0.norm_sqr(), 0.0),
            PlanarChart::HalfPlane { t0 } => ComplexScalar::new(2.0 * t0.re, 0.0),
            PlanarChart::Strip { h, m, u0 } => StripChart { h, m, u0 }.deriv(),
            PlanarChart::Annulus { c, strip } => I * (c + I * strip.map(ZERO)).exp() * strip.deriv(),
        }
    }
}

/// A chart `𝔻^m → ambient` with `0 ↦ p`, and its Jacobian at 0.
#[derive(Debug, Clone)]
enum Chart {
    Planar { chart: PlanarChart, w: ComplexScalar },
    Product(PlanarChart, PlanarChart),
    /// Universal cover of a classical pre-Worm, Cayley-centred in both factors.
    Cover { cover: StripCover, t0: ComplexScalar, u0: ComplexScalar },
    /// Disc about `z0` avoiding the punctures, times the trivialised fiber.
    Bundle { angle: AngleFunction, z0: ComplexScalar, rho: f64, u0: ComplexScalar, f0: ComplexScalar },
}

impl Chart {
    fn dim(&self) -> usize {
        match self {
            Chart::Planar { .. } => 1,
            _ => 2,
        }
    }

    fn map(&self, a: &[ComplexScalar; 2]) -> Option<ComplexPoint2> {
        let p = match self {
            Chart::Planar { chart, w } => ComplexPoint2::raw(chart.map(a[0]), *w),
            Chart::Product(c1, c2) => ComplexPoint2::raw(c1.map(a[0]), c2.map(a[1])),
            Chart::Cover { cover, t0, u0 } => {
                let zeta = cover.t_to_zeta(cayley(*t0, a[0]));
                ComplexPoint2::raw(zeta.exp(), (2.0 * I * zeta).exp() * cayley(*u0, a[1]))
            }
            Chart::Bundle { angle, z0, rho, u0, .. } => {
                let z = z0 + *rho * a[0];
                let f = angle.holo_f_branch(*z0, z).ok()?;
                ComplexPoint2::raw(z, f.exp() * cayley(*u0, a[1]))
            }
        };
        p.is_finite().then_some(p)
    }

    /// Jacobian at 0 as rows `[dz/da, dz/db], [dw/da, dw/db]`.
    fn jacobian(&self) -> [[ComplexScalar; 2]; 2] {
        match self {
            Chart::Planar { chart, .. } => [[chart.deriv(), ZERO], [ZERO, ONE]],
            Chart::Product(c1, c2) => [[c1.deriv(), ZERO], [ZERO, c2.deriv()]],
            Chart::Cover { cover, t0, u0 } => {
                let zeta0 = cover.t_to_zeta(*t0);
                let dzeta = I * cover.width() / (PI * t0) * (2.0 * t0.re);
                let e = (2.0 * I * zeta0).exp();
                [[zeta0.exp() * dzeta, ZERO], [e * 2.0 * I * u0 * dzeta, e * 2.0 * u0.re]]
            }
            Chart::Bundle { angle, z0, rho, u0, f0 } => {
                let e = f0.exp();
                let fp = angle.f_prime_unchecked(*z0);
                [[ComplexScalar::new(*rho, 0.0), ZERO], [e * fp * u0 * *rho, e * 2.0 * u0.re]]
            }
        }
    }

    /// Chart coordinates of `v`, `J⁻¹ v`.
    fn pull_back(&self, v: &TangentVector2) -> [ComplexScalar; 2] {
        let j = self.jacobian();
        if self.dim() == 1 {
            return [v.dz() / j[0][0], ZERO];
        }
        // lower triangular
        let a = v.dz() / j[0][0];
        let b = (v.dw() - j[1][0] * a) / j[1][1];
        [a, b]
    }
}

fn cover_chart(interval: crate::geom::RealInterval, p: &ComplexPoint2) -> Result<Chart> {
    let cover = StripCover::new(interval);
    let c = cover.to_cover(p)?;
    if !(c.t.re > 0.0 && c.u.re > 0.0) {
        return Err(Error::OutsideDomain("cover chart".into()));
    }
    Ok(Chart::Cover { cover, t0: c.t, u0: c.u })
}

fn bundle_chart(angle: &AngleFunction, p: &ComplexPoint2) -> Result<Chart> {
    let z0 = p.z();
    let rho = 0.9 * angle.terms().iter().map(|(a, _)| (z0 - a).norm()).fold(f64::INFINITY, f64::min);
    let f0 = angle.f_principal(z0)?;
    let u0 = (-f0).exp() * p.w();
    if !(u0.re > 0.0 && rho > 0.0) {
        return Err(Error::OutsideDomain("bundle chart".into()));
    }
    Ok(Chart::Bundle { angle: angle.clone(), z0, rho, u0, f0 })
}

/// Charts tried for `domain` at `p`; the smallest bound over them wins.
fn charts(domain: &DomainHandle, p: &ComplexPoint2) -> Result<Vec<Chart>> {
    Ok(match domain {
        DomainHandle::Model(ModelDomain::Product { first, second }) => {
            vec![Chart::Product(PlanarChart::centred(first, p.z())?, PlanarChart::centred(second, p.w())?)]
        }
        DomainHandle::Model(m) => vec![Chart::Planar { chart: PlanarChart::centred(m, p.z())?, w: p.w() }],
        DomainHandle::PreWorm(s) if s.angle().is_classical() => vec![cover_chart(s.interval(), p)?],
        DomainHandle::PreWorm(s) => vec![bundle_chart(s.angle(), p)?],
        DomainHandle::Worm { spec, .. } if spec.angle().is_classical() => {
            let mut out = Vec::new();
            if spec.inner_preworm().contains(p) {
                out.push(cover_chart(spec.inner(), p)?);
            }
            out.push(cover_chart(spec.outer(), p)?);
            out
        }
        DomainHandle::Worm { spec, .. } => vec![bundle_chart(spec.angle(), p)?],
    })
}

struct Problem<'a> {
    domain: &'a DomainHandle,
    chart: &'a Chart,
    dir: [ComplexScalar; 2],
    dim: usize,
    degree: usize,
    /// Sample points with their powers `ζ, ζ², …`.
    powers: Vec<Vec<ComplexScalar>>,
    margin: f64,
    tol: f64,
    evaluations: usize,
}

impl Problem<'_> {
    fn feasible_at(&self, s: f64, coeffs: &[f64], k: usize) -> bool {
        let pw = &self.powers[k];
        let mut a = [ZERO; 2];
        for (j, aj) in a.iter_mut().enumerate().take(self.dim) {
            let mut v = self.dir[j] * s * pw[0];
            for d in 2..=self.degree {
                let idx = 2 * (j * (self.degree - 1) + d - 2);
                v += ComplexScalar::new(coeffs[idx], coeffs[idx + 1]) * pw[d - 1];
            }
            if !(v.norm_sqr() < 1.0 - 1e-12) {
                return false;
            }
            *aj = v;
        }
        match self.chart.map(&a) {
            Some(p) => self.domain.margin(&p) >= self.margin,
            None => false,
        }
    }

    /// Feasibility of the whole sample set; the first violated sample is
    /// moved to the front so that later rejections are cheap.
    fn feasible(&self, s: f64, coeffs: &[f64], order: &mut [usize]) -> bool {
        for i in 0..order.len() {
            if !self.feasible_at(s, coeffs, order[i]) {
                order[..=i].rotate_right(1);
                return false;
            }
        }
        true
    }

    /// Largest feasible `s` for the given higher-order coefficients, 0 if none.
    fn s_max(&mut self, coeffs: &[f64], order: &mut [usize]) -> f64 {
        self.evaluations += 1;
        let cap = 1.0 / self.dir[..self.dim].iter().map(|d| d.norm()).fold(0.0, f64::max);
        let mut hi = cap;
        if self.feasible(hi, coeffs, order) {
            return hi;
        }
        let mut lo = 0.5 * hi;
        while !self.feasible(lo, coeffs, order) {
            hi = lo;
            lo *= 0.25;
            if lo < 1e-12 * cap {
                return 0.0;
            }
        }
        while hi - lo > self.tol * lo {
            let mid = 0.5 * (lo + hi);
            if self.feasible(mid, coeffs, order) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Opportunistic compass search maximising `s_max`.
    fn compass(&mut self, mut x: Vec<f64>, budget: usize, order: &mut [usize]) -> (Vec<f64>, f64) {
        let mut best = self.s_max(&x, order);
        let mut step = 0.125;
        let start = self.evaluations;
        while step > 1e-3 && self.evaluations - start < budget {
            let mut improved = false;
            for i in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let old = x[i];
                    x[i] = old + sign * step;
                    let s = self.s_max(&x, order);
                    if s > best * (1.0 + 1e-9) {
                        best = s;
                        improved = true;
                        break;
                    }
                    x[i] = old;
                }
                if self.evaluations - start >= budget {
                    break;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (x, best)
    }
}

fn snap(x: f64) -> f64 {
    (x / DIRECTION_GRID).round() * DIRECTION_GRID
}

/// Unit chart direction with a canonical phase: the larger component is made
/// real and positive, then everything is snapped to a fixed grid.
fn canonical_direction(tau: [ComplexScalar; 2], dim: usize) -> ([ComplexScalar; 2], f64) {
    let norm = tau[..dim].iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    let lead = if dim == 2 && tau[1].norm() > tau[0].norm() { tau[1] } else { tau[0] };
    let phase = lead.conj() / lead.norm();
    let mut dir = [ZERO; 2];
    for j in 0..dim {
        let d = tau[j] * phase / norm;
        dir[j] = ComplexScalar::new(snap(d.re), snap(d.im));
    }
    (dir, norm)
}

/// Upper bound for `K(v)` from the best polynomial disc found. Deterministic
/// for a fixed configuration.
pub fn royden_upper(domain: &DomainHandle, v: &TangentVector2, cfg: &DiscSearchConfig) -> Result<UpperEstimate> {
    cfg.validate()?;
    let p = v.base();
    if !domain.contains(&p) {
        return Err(Error::OutsideDomain(format!("{p:?}")));
    }
    if v.is_zero() {
        return Ok(UpperEstimate { value: 0.0, fallback: false, evaluations: 0 });
    }
    let mut best: Option<f64> = None;
    let mut evaluations = 0;
    for chart in charts(domain, &p)? {
        let dim = chart.dim();
        let tau = chart.pull_back(v);
        let (dir, norm) = canonical_direction(tau, dim);
        if norm == 0.0 {
            // v is invisible to this chart (planar model, pure w component)
            return Ok(UpperEstimate { value: 0.0, fallback: false, evaluations });
        }
        let n = cfg.boundary_samples;
        let powers = cfg
            .radii
            .iter()
            .rev()
            .flat_map(|r| (0..n).map(move |k| ComplexScalar::from_polar(*r, 2.0 * PI * (k as f64 + 0.5) / n as f64)))
            .map(|zeta| std::iter::successors(Some(zeta), |z| Some(z * zeta)).take(cfg.degree).collect())
            .collect();
        let mut prob = Problem { domain, chart: &chart, dir, dim, degree: cfg.degree, powers, margin: cfg.margin, tol: cfg.tolerance, evaluations: 0 };
        let mut order: Vec<usize> = (0..prob.powers.len()).collect();
        let nparams = 2 * dim * (cfg.degree - 1);
        let mut s_best = if nparams == 0 {
            prob.s_max(&[], &mut order)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut s_best = prob.compass(vec![0.0; nparams], cfg.max_iters, &mut order).1;
            for _ in 0..cfg.restarts {
                let x0: Vec<f64> = (0..nparams).map(|_| rng.gen_range(-0.15..0.15)).collect();
                s_best = s_best.max(prob.compass(x0, cfg.max_iters, &mut order).1);
            }
            s_best
        };
        evaluations += prob.evaluations;
        if s_best > 0.0 {
            s_best *= cfg.r_max();
            let k = norm / s_best;
            best = Some(best.map_or(k, |b: f64| b.min(k)));
        }
    }
    match best {
        Some(value) => Ok(UpperEstimate { value, fallback: false, evaluations }),
        None => Ok(UpperEstimate { value: inscribed_bound(domain, v, cfg), fallback: true, evaluations }),
    }
}

/// `|v| / ρ` for the largest affine disc `p + ζ ρ v/|v|` whose sampled
/// boundary stays in the domain.
fn inscribed_bound(domain: &DomainHandle, v: &TangentVector2, cfg: &DiscSearchConfig) -> f64 {
    let p = v.base();
    let norm = v.norm();
    let (ez, ew) = (v.dz() / norm, v.dw() / norm);
    let n = cfg.boundary_samples;
    let inside = |rho: f64| {
        (0..n).all(|k| {
            let e = ComplexScalar::from_polar(rho, 2.0 * PI * k as f64 / n as f64);
            domain.contains(&ComplexPoint2::raw(p.z() + e * ez, p.w() + e * ew))
        })
    };
    let mut rho = 1.0;
    while !inside(rho) && rho > 1e-300 {
        rho *= 0.5;
    }
    norm / rho
}
