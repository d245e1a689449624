//! Closed-form Kobayashi distances and metrics of the planar model domains,
//! normalised so that `k(0, s) = artanh(s)` on the unit disc.
//!
//! Strips are horizontal, `{|Im z| < h/2}`. Annuli are handled through the
//! logarithmic cover, which is a strip of height `log(outer/inner)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{AccuracyClass, ComplexPoint2, ComplexScalar, MetricOracle, TangentVector2};

const DEFAULT_K_MAX: i64 = 8;

/// Fixed argument order so that every distance is exactly symmetric.
pub(crate) fn ordered(p: ComplexScalar, q: ComplexScalar) -> (ComplexScalar, ComplexScalar) {
    if (p.re, p.im) <= (q.re, q.im) {
        (p, q)
    } else {
        (q, p)
    }
}

fn outside(what: &str, p: ComplexScalar) -> Error {
    Error::OutsideDomain(format!("{what}: {p}"))
}

pub fn disc_distance(p: ComplexScalar, q: ComplexScalar) -> Result<f64> {
    let (a, b) = (1.0 - p.norm_sqr(), 1.0 - q.norm_sqr());
    if !(a > 0.0) {
        return Err(outside("unit disc", p));
    }
    if !(b > 0.0) {
        return Err(outside("unit disc", q));
    }
    if p == q {
        return Ok(0.0);
    }
    // artanh(ρ) with 1 - ρ² = (1-|p|²)(1-|q|²)/|1 - p̄q|²
    let num = (ComplexScalar::new(1.0, 0.0) - p.conj() * q).norm() + (p - q).norm();
    Ok((num / (a * b).sqrt()).ln())
}

pub fn disc_royden(z: ComplexScalar, dz: ComplexScalar) -> Result<f64> {
    let a = 1.0 - z.norm_sqr();
    if !(a > 0.0) {
        return Err(outside("unit disc", z));
    }
    Ok(dz.norm() / a)
}

pub fn halfplane_distance(p: ComplexScalar, q: ComplexScalar) -> Result<f64> {
    if !(p.re > 0.0) {
        return Err(outside("right half-plane", p));
    }
    if !(q.re > 0.0) {
        return Err(outside("right half-plane", q));
    }
    if p == q {
        return Ok(0.0);
    }
    // artanh(ρ) with 1 - ρ² = 4 Re p Re q / |p + q̄|²; scaled to dodge overflow
    let s = p.norm().max(q.norm());
    let (ps, qs) = (p / s, q / s);
    let num = (ps + qs.conj()).norm() + (ps - qs).norm();
    Ok((num / (2.0 * (ps.re.sqrt() * qs.re.sqrt()))).ln())
}

pub fn halfplane_royden_at(w: ComplexScalar, dw: ComplexScalar) -> Result<f64> {
    if !(w.re > 0.0) {
        return Err(outside("right half-plane", w));
    }
    Ok(dw.norm() / (2.0 * w.re))
}

/// Fiber half-plane metric at `v.base().w()` along `v.dw()`.
pub fn halfplane_royden(v: &TangentVector2) -> Result<f64> {
    halfplane_royden_at(v.base().w(), v.dw())
}

fn check_height(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("strip height {h}")))
    }
}

fn strip_inside(z: ComplexScalar, h: f64) -> bool {
    z.im.abs() < 0.5 * h
}

pub fn strip_distance(p: ComplexScalar, q: ComplexScalar, h: f64) -> Result<f64> {
    check_height(h)?;
    for z in [p, q] {
        if !strip_inside(z, h) {
            return Err(outside("strip", z));
        }
    }
    // real translations are isometries; centre the pair before exponentiating
    let (p, q) = ordered(p, q);
    let m = 0.5 * (p.re + q.re);
    let shift = ComplexScalar::new(m, 0.0);
    let k = PI / h;
    let up = ((p - shift) * k).exp();
    let uq = ((q - shift) * k).exp();
    halfplane_distance(up, uq)
}

pub fn strip_royden(z: ComplexScalar, dz: ComplexScalar, h: f64) -> Result<f64> {
    check_height(h)?;
    if !strip_inside(z, h) {
        return Err(outside("strip", z));
    }
    Ok(PI * dz.norm() / (2.0 * h * (PI * z.im / h).cos()))
}

fn check_annulus(inner: f64, outer: f64) -> Result<()> {
    if inner > 0.0 && inner < outer && outer.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("annulus radii {inner}, {outer}")))
    }
}

fn annulus_inside(z: ComplexScalar, inner: f64, outer: f64) -> bool {
    let r = z.norm();
    inner < r && r < outer
}

/// Strip coordinate `ξ = i(log z - c)` of the annulus cover; deck acts by `ξ ↦ ξ - 2πk`.
fn annulus_lift(z: ComplexScalar, inner: f64, outer: f64) -> ComplexScalar {
    let c = 0.5 * (inner.ln() + outer.ln());
    ComplexScalar::new(0.0, 1.0) * (z.ln() - c)
}

pub fn annulus_distance(p: ComplexScalar, q: ComplexScalar, inner: f64, outer: f64) -> Result<f64> {
    check_annulus(inner, outer)?;
    for z in [p, q] {
        if !annulus_inside(z, inner, outer) {
            return Err(outside("annulus", z));
        }
    }
    let height = (outer / inner).ln();
    let (p, q) = ordered(p, q);
    let (xp, xq) = (annulus_lift(p, inner, outer), annulus_lift(q, inner, outer));
    let mut k_max = DEFAULT_K_MAX;
    loop {
        let mut best = (f64::INFINITY, 0i64);
        for k in -k_max..=k_max {
            let shifted = xq - ComplexScalar::new(2.0 * PI * k as f64, 0.0);
            let d = strip_distance(xp, shifted, height)?;
            if d < best.0 {
                best = (d, k);
            }
        }
        if best.1.abs() < k_max {
            return Ok(best.0);
        }
        if k_max > 1 << 20 {
            return Err(Error::DeckSearchExhausted(k_max));
        }
        k_max *= 2;
    }
}

pub fn annulus_royden(z: ComplexScalar, dz: ComplexScalar, inner: f64, outer: f64) -> Result<f64> {
    check_annulus(inner, outer)?;
    if !annulus_inside(z, inner, outer) {
        return Err(outside("annulus", z));
    }
    let height = (outer / inner).ln();
    let xi = annulus_lift(z, inner, outer);
    strip_royden(xi, dz / z, height)
}

/// Exact max formula for products.
pub fn product_distance<A, B>(da: &A, db: &B, p: &ComplexPoint2, q: &ComplexPoint2) -> Result<f64>
where
    A: MetricOracle<Point = ComplexScalar>,
    B: MetricOracle<Point = ComplexScalar>,
{
    Ok(da.distance(&p.z(), &q.z())?.max(db.distance(&p.w(), &q.w())?))
}

/// Planar models act on the `z` coordinate (as the cylinder `model × C`);
/// `Product` uses its first factor on `z` and its second on `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelDomain {
    UnitDisc,
    RightHalfPlane,
    Strip { height: f64 },
    Annulus { inner: f64, outer: f64 },
    Product { first: Box<ModelDomain>, second: Box<ModelDomain> },
}

impl ModelDomain {
    pub fn product(first: ModelDomain, second: ModelDomain) -> Result<Self> {
        let d = ModelDomain::Product { first: Box::new(first), second: Box::new(second) };
        d.validate()?;
        Ok(d)
    }

    pub fn bidisc() -> Self {
        ModelDomain::Product { first: Box::new(ModelDomain::UnitDisc), second: Box::new(ModelDomain::UnitDisc) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelDomain::UnitDisc | ModelDomain::RightHalfPlane => Ok(()),
            ModelDomain::Strip { height } => check_height(*height),
            ModelDomain::Annulus { inner, outer } => check_annulus(*inner, *outer),
            ModelDomain::Product { first, second } => {
                if first.is_product() || second.is_product() {
                    return Err(Error::InvalidParameter("nested products are not supported".into()));
                }
                first.validate()?;
                second.validate()
            }
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, ModelDomain::Product { .. })
    }

    pub fn planar_contains(&self, z: ComplexScalar) -> bool {
        match *self {
            ModelDomain::UnitDisc => z.norm_sqr() < 1.0,
            ModelDomain::RightHalfPlane => z.re > 0.0,
            ModelDomain::Strip { height } => strip_inside(z, height),
            ModelDomain::Annulus { inner, outer } => annulus_inside(z, inner, outer),
            ModelDomain::Product { .. } => false,
        }
    }

    pub fn planar_distance(&self, p: ComplexScalar, q: ComplexScalar) -> Result<f64> {
        match *self {
            ModelDomain::UnitDisc => disc_distance(p, q),
            ModelDomain::RightHalfPlane => halfplane_distance(p, q),
            ModelDomain::Strip { height } => strip_distance(p, q, height),
            ModelDomain::Annulus { inner, outer } => annulus_distance(p, q, inner, outer),
            ModelDomain::Product { .. } => Err(Error::Unsupported("planar distance on a product")),
        }
    }

    pub fn planar_royden(&self, z: ComplexScalar, dz: ComplexScalar) -> Result<f64> {
        match *self {
            ModelDomain::UnitDisc => disc_royden(z, dz),
            ModelDomain::RightHalfPlane => halfplane_royden_at(z, dz),
            ModelDomain::Strip { height } => strip_royden(z, dz, height),
            ModelDomain::Annulus { inner, outer } => annulus_royden(z, dz, inner, outer),
            ModelDomain::Product { .. } => Err(Error::Unsupported("planar royden on a product")),
        }
    }

    pub fn contains(&self, p: &ComplexPoint2) -> bool {
        match self {
            ModelDomain::Product { first, second } => first.planar_contains(p.z()) && second.planar_contains(p.w()),
            m => m.planar_contains(p.z()),
        }
    }

    pub fn distance(&self, p: &ComplexPoint2, q: &ComplexPoint2) -> Result<f64> {
        match self {
            ModelDomain::Product { first, second } => {
                Ok(first.planar_distance(p.z(), q.z())?.max(second.planar_distance(p.w(), q.w())?))
            }
            m => m.planar_distance(p.z(), q.z()),
        }
    }

    pub fn royden(&self, v: &TangentVector2) -> Result<f64> {
        let b = v.base();
        match self {
            ModelDomain::Product { first, second } => {
                Ok(first.planar_royden(b.z(), v.dz())?.max(second.planar_royden(b.w(), v.dw())?))
            }
            m => m.planar_royden(b.z(), v.dz()),
        }
    }
}

impl MetricOracle for ModelDomain {
    type Point = ComplexPoint2;

    fn distance(&self, p: &ComplexPoint2, q: &ComplexPoint2) -> Result<f64> {
        ModelDomain::distance(self, p, q)
    }

    fn royden(&self, v: &TangentVector2) -> Result<f64> {
        ModelDomain::royden(self, v)
    }

    fn accuracy(&self) -> AccuracyClass {
        AccuracyClass::Exact
    }
}

/// One planar model viewed as an oracle on complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarOracle(pub ModelDomain);

impl MetricOracle for PlanarOracle {
    type Point = ComplexScalar;

    fn distance(&self, p: &ComplexScalar, q: &ComplexScalar) -> Result<f64> {
        self.0.planar_distance(*p, *q)
    }

    fn royden(&self, v: &TangentVector2) -> Result<f64> {
        self.0.planar_royden(v.base().z(), v.dz())
    }

    fn accuracy(&self) -> AccuracyClass {
        AccuracyClass::Exact
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(disc_distance(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), 0.0);
        assert!((disc_distance(c(0.0, 0.0), c(0.5, 0.0)).unwrap() - 0.5f64.atanh()).abs() < 1e-12);
        assert_eq!(halfplane_distance(c(1.0, 0.0), c(1.0, 0.0)).unwrap(), 0.0);
        assert!((halfplane_distance(c(1.0, 0.0), c(3.0, 0.0)).unwrap() - 0.5f64.atanh()).abs() < 1e-12);
        assert!(disc_distance(c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(halfplane_distance(c(0.0, 1.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn halfplane_royden_values() {
        assert_eq!(halfplane_royden_at(c(1.0, 0.0), c(1.0, 0.0)).unwrap(), 0.5);
        assert_eq!(halfplane_royden_at(c(2.0, 0.0), c(2.0, 0.0)).unwrap(), 0.5);
    }

    #[test]
    fn halfplane_royden_is_derivative_of_distance() {
        let w = c(0.7, 0.4);
        let h = 1e-4;
        for dw in [c(1.0, 0.0), c(0.0, 1.0), c(0.6, -0.8)] {
            let fd = (halfplane_distance(w - dw * h, w + dw * h).unwrap()) / (2.0 * h);
            let exact = halfplane_royden_at(w, dw).unwrap();
            assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn strip_and_annulus_royden_are_derivatives() {
        let h = 1e-5;
        let z = c(0.3, 0.2);
        for dz in [c(1.0, 0.0), c(0.0, 1.0)] {
            let fd = strip_distance(z - dz * h, z + dz * h, 1.3).unwrap() / (2.0 * h);
            assert!((fd - strip_royden(z, dz, 1.3).unwrap()).abs() < 1e-6);
            let za = c(1.2, 0.7);
            let fd = annulus_distance(za - dz * h, za + dz * h, 1.0, 2.0).unwrap() / (2.0 * h);
            assert!((fd - annulus_royden(za, dz, 1.0, 2.0).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn strip_matches_halfplane_under_exponential() {
        let h = 2.0;
        let (p, q) = (c(-0.4, 0.3), c(1.1, -0.6));
        let k = PI / h;
        let d = halfplane_distance((p * k).exp(), (q * k).exp()).unwrap();
        assert!((strip_distance(p, q, h).unwrap() - d).abs() < 1e-12);
        // far along the strip the centred evaluation avoids overflow
        let far = strip_distance(c(5000.0, 0.0), c(5001.0, 0.0), h).unwrap();
        assert!((far - strip_distance(c(0.0, 0.0), c(1.0, 0.0), h).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn annulus_deck_search_sees_short_way_round() {
        let (r1, r2) = (1.0, std::f64::consts::E);
        let m = (r1 * r2).sqrt();
        let p = c(m, 0.0);
        let above = annulus_distance(p, m * c(0.0, 1.0).powf(1.9), r1, r2).unwrap();
        let below = annulus_distance(p, m * c(0.0, -1.0).powf(1.9), r1, r2).unwrap();
        assert!((above - below).abs() < 1e-12);
        assert!(annulus_distance(c(0.5, 0.0), p, r1, r2).is_err());
    }

    #[test]
    fn disc_distance_increasing_and_unbounded() {
        let mut prev = 0.0;
        let mut s = 0.0;
        while s < 1.0 - 1e-6 {
            s = (s + 0.01f64).min(1.0 - 1e-6);
            let d = disc_distance(c(0.0, 0.0), c(s, 0.0)).unwrap();
            assert!(d > prev);
            prev = d;
            if s >= 1.0 - 1e-6 {
                break;
            }
        }
        assert!(prev > 7.0);
    }

    #[test]
    fn product_examples() {
        let d = ModelDomain::bidisc();
        let p = ComplexPoint2::new(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        let q = ComplexPoint2::new(c(0.5, 0.0), c(0.3, 0.0)).unwrap();
        assert!((d.distance(&p, &q).unwrap() - 0.5f64.atanh()).abs() < 1e-12);
        let disc = PlanarOracle(ModelDomain::UnitDisc);
        let x = ComplexPoint2::new(c(0.2, 0.1), c(0.2, 0.1)).unwrap();
        let y = ComplexPoint2::new(c(-0.4, 0.3), c(-0.4, 0.3)).unwrap();
        let lhs = product_distance(&disc, &disc, &x, &y).unwrap();
        assert_eq!(lhs, disc_distance(x.z(), y.z()).unwrap());
        let nested = ModelDomain::product(ModelDomain::bidisc(), ModelDomain::UnitDisc);
        assert!(nested.is_err());
    }

    fn disc_pt() -> impl Strategy<Value = ComplexScalar> {
        (0.0f64..0.95, 0.0f64..(2.0 * PI)).prop_map(|(r, a)| ComplexScalar::from_polar(r, a))
    }

    fn hp_pt() -> impl Strategy<Value = ComplexScalar> {
        (0.01f64..5.0, -5.0f64..5.0).prop_map(|(x, y)| c(x, y))
    }

    fn ann_pt() -> impl Strategy<Value = ComplexScalar> {
        (1.01f64..2.69, 0.0f64..(2.0 * PI)).prop_map(|(r, a)| ComplexScalar::from_polar(r, a))
    }

    proptest! {
        #[test]
        fn disc_metric_axioms(p in disc_pt(), q in disc_pt(), r in disc_pt()) {
            let (pq, qp) = (disc_distance(p, q).unwrap(), disc_distance(q, p).unwrap());
            prop_assert_eq!(pq, qp);
            let pr = disc_distance(p, r).unwrap();
            let qr = disc_distance(q, r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-12);
        }

        #[test]
        fn halfplane_metric_axioms(p in hp_pt(), q in hp_pt(), r in hp_pt()) {
            let pq = halfplane_distance(p, q).unwrap();
            prop_assert_eq!(pq, halfplane_distance(q, p).unwrap());
            prop_assert!(halfplane_distance(p, r).unwrap() <= pq + halfplane_distance(q, r).unwrap() + 1e-12);
        }

        #[test]
        fn cayley_transport(p in hp_pt(), q in hp_pt()) {
            let one = c(1.0, 0.0);
            let cay = |w: ComplexScalar| (one - w) / (one + w);
            let a = halfplane_distance(p, q).unwrap();
            let b = disc_distance(cay(p), cay(q)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }

        #[test]
        fn annulus_symmetries(p in ann_pt(), q in ann_pt(), alpha in 0.0f64..(2.0 * PI)) {
            let (r1, r2) = (1.0, std::f64::consts::E);
            let d = annulus_distance(p, q, r1, r2).unwrap();
            prop_assert_eq!(d, annulus_distance(q, p, r1, r2).unwrap());
            let rot = ComplexScalar::from_polar(1.0, alpha);
            prop_assert!((annulus_distance(rot * p, rot * q, r1, r2).unwrap() - d).abs() <= 1e-9);
            let refl = |z: ComplexScalar| (r1 * r2) / z.conj();
            prop_assert!((annulus_distance(refl(p), refl(q), r1, r2).unwrap() - d).abs() <= 1e-9);
        }

        #[test]
        fn annulus_triangle(p in ann_pt(), q in ann_pt(), r in ann_pt()) {
            let (r1, r2) = (1.0, std::f64::consts::E);
            let d = |a, b| annulus_distance(a, b, r1, r2).unwrap();
            prop_assert!(d(p, r) <= d(p, q) + d(q, r) + 1e-12);
        }

        #[test]
        fn royden_homogeneous(z in disc_pt(), dz in hp_pt(), t in hp_pt()) {
            let a = disc_royden(z, dz * t).unwrap();
            let b = t.norm() * disc_royden(z, dz).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}
