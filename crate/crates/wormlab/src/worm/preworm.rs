//! Pre-Worms `Z(X, θ) = {(z, w) : z ∈ X, Re(w e^{-iθ(z)}) > 0}` and their
//! local trivialisations `(z, w) ↦ (z, e^{-F(z)} w)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ComplexPoint2, ComplexScalar, RealInterval};

use super::AngleFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRegion {
    /// `X_in = θ⁻¹(I°)`
    Inner,
    /// `X_out = θ⁻¹(J°)`
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreWormSpec {
    base_region: BaseRegion,
    angle: AngleFunction,
    interval: RealInterval,
}

impl PreWormSpec {
    pub fn new(base_region: BaseRegion, angle: AngleFunction, interval: RealInterval) -> Self {
        Self { base_region, angle, interval }
    }

    pub fn base_region(&self) -> BaseRegion {
        self.base_region
    }

    pub fn angle(&self) -> &AngleFunction {
        &self.angle
    }

    /// The open interval `θ` ranges over on the base.
    pub fn interval(&self) -> RealInterval {
        self.interval
    }

    pub fn base_contains(&self, z: ComplexScalar) -> bool {
        matches!(self.angle.theta(z), Ok(t) if self.interval.contains_open(t))
    }

    pub fn contains(&self, p: &ComplexPoint2) -> bool {
        match self.angle.theta(p.z()) {
            Ok(t) => self.interval.contains_open(t) && (p.w() * ComplexScalar::from_polar(1.0, -t)).re > 0.0,
            Err(_) => false,
        }
    }

    /// Scale-free interior margin: the smaller of the `θ` clearance to the
    /// interval ends and the cosine of the fiber angle in the half-plane.
    pub fn margin(&self, p: &ComplexPoint2) -> f64 {
        let Ok(t) = self.angle.theta(p.z()) else { return f64::NEG_INFINITY };
        let base = (t - self.interval.lo()).min(self.interval.hi() - t);
        let rot = p.w() * ComplexScalar::from_polar(1.0, -t);
        let n = rot.norm();
        let fiber = if n > 0.0 { rot.re / n } else { -1.0 };
        base.min(fiber)
    }
}

pub fn preworm_contains(spec: &PreWormSpec, p: &ComplexPoint2) -> bool {
    spec.contains(p)
}

pub fn base_region_membership(spec: &PreWormSpec, z: ComplexScalar) -> bool {
    spec.base_contains(z)
}

/// `(z, w) ↦ (z, e^{-F(z)} w)` with `F` continued from `chart_center`.
pub fn trivialize(spec: &PreWormSpec, chart_center: ComplexScalar, p: &ComplexPoint2) -> Result<ComplexPoint2> {
    let f = spec.angle.holo_f_branch(chart_center, p.z())?;
    ComplexPoint2::new(p.z(), (-f).exp() * p.w())
}

pub fn untrivialize(spec: &PreWormSpec, chart_center: ComplexScalar, p: &ComplexPoint2) -> Result<ComplexPoint2> {
    let f = spec.angle.holo_f_branch(chart_center, p.z())?;
    let w = f.exp() * p.w();
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::NonFinite("untrivialized fiber coordinate"));
    }
    ComplexPoint2::new(p.z(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worm::WormSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn membership_examples() {
        let worm = WormSpec::classical_default();
        let win = worm.inner_preworm();
        let z = c(0.8, 0.5);
        let theta = worm.angle().theta(z).unwrap();
        assert!(win.contains(&ComplexPoint2::new(z, ComplexScalar::from_polar(1.0, theta)).unwrap()));
        assert!(!win.contains(&ComplexPoint2::new(z, c(0.0, 0.0)).unwrap()));
        assert!(base_region_membership(&win, c(1.0, 0.0)));
        assert!(!base_region_membership(&win, c(0.5f64.exp(), 0.0)));
    }

    #[test]
    fn inner_base_is_an_annulus() {
        let win = WormSpec::classical_default().inner_preworm();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if z.norm() == 0.0 {
                continue;
            }
            let ann = (-0.5f64).exp() < z.norm() && z.norm() < 0.5f64.exp();
            assert_eq!(base_region_membership(&win, z), ann);
        }
    }

    #[test]
    fn worm_points_lie_in_outer_preworm() {
        let worm = WormSpec::classical_default();
        let wout = worm.outer_preworm();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut n = 0;
        while n < 2000 {
            let p = ComplexPoint2::new(c(rng.gen_range(-2.3..2.3), rng.gen_range(-2.3..2.3)), c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).unwrap();
            if worm.contains(&p) {
                assert!(wout.contains(&p));
                n += 1;
            }
        }
    }

    #[test]
    fn trivialization_maps_fibers_to_half_plane() {
        let worm = WormSpec::classical_default();
        let win = worm.inner_preworm();
        let center = c(1.1, 0.2);
        for k in 0..30 {
            let z = center + ComplexScalar::from_polar(0.2, 0.21 * k as f64);
            let theta = worm.angle().theta(z).unwrap();
            let p = ComplexPoint2::new(z, ComplexScalar::from_polar(1.0, theta)).unwrap();
            let t = trivialize(&win, center, &p).unwrap();
            assert!(t.w().im.abs() < 1e-12 * t.w().re && t.w().re > 0.0);
            let v = worm.angle().holo_f_branch(center, z).unwrap().re;
            assert!((t.w().re - (-v).exp()).abs() < 1e-12);
            let q = ComplexPoint2::new(z, c(0.3 - 0.02 * k as f64, 0.7)).unwrap();
            let back = untrivialize(&win, center, &trivialize(&win, center, &q).unwrap()).unwrap();
            assert!(back.euclid(&q) < 1e-12);
            assert_eq!(trivialize(&win, center, &q).unwrap().w().re > 0.0, win.contains(&q));
        }
    }
}
