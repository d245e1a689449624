//! Universal cover of the classical pre-Worm over `{a < log|z|² < b}`.
//!
//! `Φ(ζ, u) = (e^ζ, e^{2iζ} u)` maps the product of the vertical strip
//! `S = {a/2 < Re ζ < b/2}` with the right half-plane onto the pre-Worm; the
//! deck group is generated by `(ζ, u) ↦ (ζ + 2πi, e^{4π} u)`. Distances are
//! therefore `min_k max(k_S(ζ₁, ζ₂ + 2πik), k_H(u₁, e^{4πk} u₂))`.
//!
//! The base strip is carried in its half-plane model
//! `T = exp(-iπ(ζ - c)/width)`, where points far out towards the boundary
//! circles stay representable.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact::{halfplane_distance, halfplane_royden_at};
use crate::geom::{AccuracyClass, ComplexPoint2, ComplexScalar, MetricOracle, RealInterval, TangentVector2};

use super::PreWormSpec;

const I: ComplexScalar = ComplexScalar::new(0.0, 1.0);
const DEFAULT_K_MAX: i64 = 8;

/// Cover coordinates: `t` is the base point in the half-plane model of the
/// strip, `u` the trivialised fiber coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverCoords {
    pub t: ComplexScalar,
    pub u: ComplexScalar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripCover {
    center: f64,
    width: f64,
}

impl StripCover {
    /// Cover of the pre-Worm whose `θ = log|z|²` ranges over `interval`.
    pub fn new(interval: RealInterval) -> Self {
        Self { center: 0.25 * (interval.lo() + interval.hi()), width: 0.5 * interval.width() }
    }

    /// Width of the `ζ` strip.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Multiplier by which one deck step rescales the base half-plane model.
    pub fn base_deck_factor(&self) -> f64 {
        (2.0 * PI * PI / self.width).exp()
    }

    pub fn fiber_deck_factor() -> f64 {
        (4.0 * PI).exp()
    }

    pub fn zeta_to_t(&self, zeta: ComplexScalar) -> ComplexScalar {
        (-I * PI * (zeta - self.center) / self.width).exp()
    }

    pub fn t_to_zeta(&self, t: ComplexScalar) -> ComplexScalar {
        self.center + I * self.width / PI * t.ln()
    }

    pub fn to_cover(&self, p: &ComplexPoint2) -> Result<CoverCoords> {
        if p.z() == ComplexScalar::new(0.0, 0.0) {
            return Err(Error::OutsideDomain("z = 0".into()));
        }
        let zeta = p.z().ln();
        Ok(CoverCoords { t: self.zeta_to_t(zeta), u: (-2.0 * I * zeta).exp() * p.w() })
    }

    pub fn to_ambient(&self, c: &CoverCoords) -> Result<ComplexPoint2> {
        let zeta = self.t_to_zeta(c.t);
        ComplexPoint2::new(zeta.exp(), (2.0 * I * zeta).exp() * c.u)
    }

    /// Distance between two points given by cover coordinates.
    pub fn cover_distance(&self, a: &CoverCoords, b: &CoverCoords) -> Result<f64> {
        if !(a.t.re > 0.0 && a.u.re > 0.0 && b.t.re > 0.0 && b.u.re > 0.0) {
            return Err(Error::OutsideDomain("cover point off the product of half-planes".into()));
        }
        let (lb, lf) = (self.base_deck_factor().ln(), (4.0 * PI));
        let term = |k: i64| -> Result<f64> {
            let sb = (lb * k as f64).exp();
            let sf = (lf * k as f64).exp();
            if !(sb.is_finite() && sf.is_finite() && sb > 0.0 && sf > 0.0) {
                return Ok(f64::INFINITY);
            }
            Ok(halfplane_distance(a.t, b.t * sb)?.max(halfplane_distance(a.u, b.u * sf)?))
        };
        let mut k_max = DEFAULT_K_MAX;
        loop {
            let mut best = (term(0)?, 0i64);
            for k in 1..=k_max {
                for kk in [k, -k] {
                    let d = term(kk)?;
                    if d < best.0 {
                        best = (d, kk);
                    }
                }
            }
            if best.1.abs() < k_max {
                return Ok(best.0);
            }
            if k_max >= 1 << 12 {
                return Err(Error::DeckSearchExhausted(k_max));
            }
            k_max *= 2;
        }
    }

    /// Half of the shortest deck displacement of the base point: the radius of
    /// the largest Kobayashi ball about it that lifts isometrically.
    pub fn trivializing_radius(&self, t: ComplexScalar) -> Result<f64> {
        Ok(0.5 * halfplane_distance(t, t * self.base_deck_factor())?)
    }

    /// Exact Kobayashi–Royden metric at an ambient point.
    pub fn royden(&self, v: &TangentVector2) -> Result<f64> {
        let p = v.base();
        let z = p.z();
        if z == ComplexScalar::new(0.0, 0.0) {
            return Err(Error::OutsideDomain("z = 0".into()));
        }
        let zeta = z.ln();
        let dzeta = v.dz() / z;
        let t = self.zeta_to_t(zeta);
        let dt = t * (-I * PI / self.width) * dzeta;
        let e = (-2.0 * I * zeta).exp();
        let u = e * p.w();
        let du = e * (v.dw() - 2.0 * I * p.w() * dzeta);
        Ok(halfplane_royden_at(t, dt)?.max(halfplane_royden_at(u, du)?))
    }
}

/// Exact oracle for the classical pre-Worms `W_in`, `W_out`.
#[derive(Debug, Clone)]
pub struct CoverOracle {
    spec: PreWormSpec,
    cover: StripCover,
}

impl CoverOracle {
    pub fn new(spec: &PreWormSpec) -> Result<Self> {
        if !spec.angle().is_classical() {
            return Err(Error::Unsupported("exact pre-Worm metric needs the classical angle function"));
        }
        Ok(Self { spec: spec.clone(), cover: StripCover::new(spec.interval()) })
    }

    pub fn cover(&self) -> &StripCover {
        &self.cover
    }

    fn check(&self, p: &ComplexPoint2) -> Result<()> {
        if self.spec.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!("{p:?} not in the pre-Worm")))
        }
    }
}

impl MetricOracle for CoverOracle {
    type Point = ComplexPoint2;

    fn distance(&self, p: &ComplexPoint2, q: &ComplexPoint2) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        if p == q {
            return Ok(0.0);
        }
        let (p, q) = if (p.z().re, p.z().im, p.w().re, p.w().im) <= (q.z().re, q.z().im, q.w().re, q.w().im) { (p, q) } else { (q, p) };
        let a = self.cover.to_cover(p)?;
        let b = self.cover.to_cover(q)?;
        self.cover.cover_distance(&a, &b)
    }

    fn royden(&self, v: &TangentVector2) -> Result<f64> {
        self.check(&v.base())?;
        self.cover.royden(v)
    }

    fn accuracy(&self) -> AccuracyClass {
        AccuracyClass::Exact
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::annulus_distance;
    use crate::worm::WormSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng, spec: &PreWormSpec) -> ComplexPoint2 {
        loop {
            let z = ComplexScalar::from_polar((rng.gen_range(-0.49..0.49f64)).exp(), rng.gen_range(-3.1..3.1));
            let theta = spec.angle().theta(z).unwrap();
            let u = c(rng.gen_range(0.05..3.0), rng.gen_range(-2.0..2.0));
            let p = ComplexPoint2::new(z, ComplexScalar::from_polar(1.0, theta) * u).unwrap();
            if spec.contains(&p) {
                return p;
            }
        }
    }

    #[test]
    fn roundtrip_and_deck_invariance() {
        let spec = WormSpec::classical_default().inner_preworm();
        let cover = StripCover::new(spec.interval());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_point(&mut rng, &spec);
            let cc = cover.to_cover(&p).unwrap();
            assert!(cc.t.re > 0.0 && cc.u.re > 0.0);
            assert!(cover.to_ambient(&cc).unwrap().euclid(&p) < 1e-12);
            let moved = CoverCoords { t: cc.t * cover.base_deck_factor(), u: cc.u * StripCover::fiber_deck_factor() };
            let back = cover.to_ambient(&moved).unwrap();
            assert!(back.euclid(&p) < 1e-9 * (1.0 + p.w().norm()));
        }
    }

    #[test]
    fn projection_to_annulus_is_non_expanding() {
        let spec = WormSpec::classical_default().inner_preworm();
        let oracle = CoverOracle::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (r1, r2) = ((-0.5f64).exp(), 0.5f64.exp());
        for _ in 0..200 {
            let (p, q) = (random_point(&mut rng, &spec), random_point(&mut rng, &spec));
            let d = oracle.distance(&p, &q).unwrap();
            let base = annulus_distance(p.z(), q.z(), r1, r2).unwrap();
            assert!(base <= d + 1e-9);
            // same z: fiber distance in trivialised coordinates
            let q2 = ComplexPoint2::new(p.z(), q.w()).unwrap();
            if spec.contains(&q2) {
                assert!(annulus_distance(p.z(), q2.z(), r1, r2).unwrap() == 0.0);
            }
        }
    }

    #[test]
    fn royden_is_derivative_of_distance() {
        let spec = WormSpec::classical_default().inner_preworm();
        let oracle = CoverOracle::new(&spec).unwrap();
        let p = ComplexPoint2::new(c(1.1, 0.3), c(0.7, 0.9)).unwrap();
        let h = 1e-6;
        for (dz, dw) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(0.0, 1.0)), (c(0.3, -0.4), c(1.0, 0.5))] {
            let a = ComplexPoint2::new(p.z() - dz * h, p.w() - dw * h).unwrap();
            let b = ComplexPoint2::new(p.z() + dz * h, p.w() + dw * h).unwrap();
            let fd = oracle.distance(&a, &b).unwrap() / (2.0 * h);
            let v = TangentVector2::new(p, dz, dw).unwrap();
            let exact = oracle.royden(&v).unwrap();
            assert!((fd - exact).abs() < 1e-5 * (1.0 + exact), "{fd} vs {exact}");
        }
    }

    #[test]
    fn trivializing_radius_diverges_towards_boundary() {
        let cover = StripCover::new(RealInterval::new(-1.0, 1.0).unwrap());
        let mut prev = 0.0;
        for k in 0..30 {
            let eps = 10f64.powi(-k);
            let r = cover.trivializing_radius(c(eps, 1.0)).unwrap();
            assert!(r > prev);
            prev = r;
        }
        assert!(prev > 35.0);
    }

    #[test]
    fn generic_angle_rejected() {
        let angle = crate::worm::AngleFunction::punctured(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![1.0, 1.0]).unwrap();
        let spec = PreWormSpec::new(super::super::BaseRegion::Inner, angle, RealInterval::new(-1.0, 1.0).unwrap());
        assert!(CoverOracle::new(&spec).is_err());
    }
}
