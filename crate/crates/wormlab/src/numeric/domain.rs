//! Domains the numerical estimators operate on.

use crate::error::{Error, Result};
use crate::exact::ModelDomain;
use crate::geom::{ComplexPoint2, ComplexScalar, TangentVector2};
use crate::worm::{barrett_scale, PreWormSpec, StripCover, WormSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainHandle {
    Model(ModelDomain),
    /// `B_λ(W)`.
    Worm { spec: WormSpec, scale: f64 },
    PreWorm(PreWormSpec),
}

/// Where a lower bound for the metric came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundSource {
    /// The domain's own metric is known in closed form.
    Exact,
    /// Metric of an enclosing domain with a closed form.
    EnclosingDomain,
    /// Base metric of an enclosing disc through the bundle projection.
    Projection,
    /// Nothing available; the bound is 0.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    pub source: LowerBoundSource,
}

impl LowerBound {
    pub fn flagged(&self) -> bool {
        self.source == LowerBoundSource::None
    }
}

impl DomainHandle {
    pub fn worm(spec: WormSpec, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {scale}")));
        }
        Ok(DomainHandle::Worm { spec, scale })
    }

    pub fn contains(&self, p: &ComplexPoint2) -> bool {
        match self {
            DomainHandle::Model(m) => m.contains(p),
            DomainHandle::Worm { spec, scale } => spec.scaled_contains(*scale, p),
            DomainHandle::PreWorm(s) => s.contains(p),
        }
    }

    /// Interior margin, positive exactly on the domain. For `B_λ(W)` this is
    /// `-λ r(z, w/λ)`, which tends to the half-plane margin `2 Re(w e^{-iθ})`
    /// over `X_in` as `λ → ∞`.
    pub fn margin(&self, p: &ComplexPoint2) -> f64 {
        match self {
            DomainHandle::Model(m) => model_margin(m, p),
            DomainHandle::Worm { spec, scale } => match spec.defining_function(&barrett_scale(1.0 / scale, p)) {
                Ok(r) => -scale * r,
                Err(_) => f64::NEG_INFINITY,
            },
            DomainHandle::PreWorm(s) => s.margin(p),
        }
    }

    /// Closed-form Kobayashi–Royden metric, where one exists.
    pub fn exact_royden(&self, v: &TangentVector2) -> Option<Result<f64>> {
        match self {
            DomainHandle::Model(m) => Some(m.royden(v)),
            DomainHandle::PreWorm(s) if s.angle().is_classical() => {
                if !s.contains(&v.base()) {
                    return Some(Err(Error::OutsideDomain("base point outside the pre-Worm".into())));
                }
                Some(StripCover::new(s.interval()).royden(v))
            }
            _ => None,
        }
    }

    /// The best available lower bound for `K(v)`.
    pub fn royden_lower(&self, v: &TangentVector2) -> Result<LowerBound> {
        if !self.contains(&v.base()) {
            return Err(Error::OutsideDomain(format!("{:?}", v.base())));
        }
        if let Some(k) = self.exact_royden(v) {
            return Ok(LowerBound { value: k?, source: LowerBoundSource::Exact });
        }
        match self {
            DomainHandle::Worm { spec, .. } if spec.angle().is_classical() => {
                // B_λ(W) ⊂ W_out for every λ
                let value = StripCover::new(spec.outer()).royden(v)?;
                Ok(LowerBound { value, source: LowerBoundSource::EnclosingDomain })
            }
            DomainHandle::Worm { spec, .. } => {
                Ok(projection_bound(spec.base_radius(), v.base().z(), v.dz()))
            }
            DomainHandle::PreWorm(s) => {
                let radius = s.angle().sublevel_radius(s.interval().hi());
                Ok(projection_bound(radius, v.base().z(), v.dz()))
            }
            DomainHandle::Model(_) => Ok(LowerBound { value: 0.0, source: LowerBoundSource::None }),
        }
    }
}

/// Metric of the disc `|z| < radius` applied to the base component.
fn projection_bound(radius: f64, z: ComplexScalar, dz: ComplexScalar) -> LowerBound {
    let gap = radius * radius - z.norm_sqr();
    if gap > 0.0 {
        LowerBound { value: dz.norm() * radius / gap, source: LowerBoundSource::Projection }
    } else {
        LowerBound { value: 0.0, source: LowerBoundSource::None }
    }
}

fn planar_margin(m: &ModelDomain, z: ComplexScalar) -> f64 {
    match *m {
        ModelDomain::UnitDisc => 1.0 - z.norm_sqr(),
        ModelDomain::RightHalfPlane => {
            let n = z.norm();
            if n > 0.0 {
                z.re / n
            } else {
                -1.0
            }
        }
        ModelDomain::Strip { height } => (0.5 * height - z.im.abs()) / height,
        ModelDomain::Annulus { inner, outer } => {
            let l = z.norm().ln();
            (l - inner.ln()).min(outer.ln() - l) / (outer / inner).ln()
        }
        ModelDomain::Product { .. } => f64::NEG_INFINITY,
    }
}

fn model_margin(m: &ModelDomain, p: &ComplexPoint2) -> f64 {
    match m {
        ModelDomain::Product { first, second } => planar_margin(first, p.z()).min(planar_margin(second, p.w())),
        _ => planar_margin(m, p.z()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::MetricOracle;
    use crate::worm::CoverOracle;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn margins_agree_with_membership() {
        let domains = [
            DomainHandle::Model(ModelDomain::UnitDisc),
            DomainHandle::Model(ModelDomain::Strip { height: 1.0 }),
            DomainHandle::Model(ModelDomain::Annulus { inner: 1.0, outer: 2.0 }),
            DomainHandle::Model(ModelDomain::bidisc()),
            DomainHandle::worm(WormSpec::classical_default(), 3.0).unwrap(),
            DomainHandle::PreWorm(WormSpec::classical_default().inner_preworm()),
        ];
        for d in &domains {
            for k in 0..400 {
                let a = k as f64 * 0.37;
                let p = ComplexPoint2::new(ComplexScalar::from_polar(0.05 + 0.006 * k as f64, a), ComplexScalar::from_polar(0.004 * k as f64, 1.3 * a)).unwrap();
                assert_eq!(d.margin(&p) > 0.0, d.contains(&p), "{d:?} at {p:?}");
            }
        }
    }

    #[test]
    fn preworm_lower_bound_is_fiber_value_for_vertical_vectors() {
        let s = WormSpec::classical_default().inner_preworm();
        let d = DomainHandle::PreWorm(s.clone());
        let z = c(1.05, 0.1);
        let theta = s.angle().theta(z).unwrap();
        let w = ComplexScalar::from_polar(1.0, theta) * c(0.8, 0.3);
        let v = TangentVector2::new(ComplexPoint2::new(z, w).unwrap(), c(0.0, 0.0), c(0.2, 0.1)).unwrap();
        let lb = d.royden_lower(&v).unwrap();
        assert_eq!(lb.source, LowerBoundSource::Exact);
        let f = s.angle().f_principal(z).unwrap();
        let u = (-f).exp() * w;
        let du = (-f).exp() * v.dw();
        assert!((lb.value - du.norm() / (2.0 * u.re)).abs() < 1e-12 * lb.value);
        assert_eq!(lb.value, CoverOracle::new(&s).unwrap().royden(&v).unwrap());
    }

    #[test]
    fn worm_lower_bounds_dominate_projection() {
        let spec = WormSpec::classical_default();
        let d = DomainHandle::worm(spec.clone(), 1.0).unwrap();
        let p = ComplexPoint2::new(c(1.0, 0.0), c(1.0, 0.2)).unwrap();
        let v = TangentVector2::new(p, c(0.3, 0.1), c(0.1, 0.0)).unwrap();
        let lb = d.royden_lower(&v).unwrap();
        assert_eq!(lb.source, LowerBoundSource::EnclosingDomain);
        let base = crate::exact::annulus_royden(p.z(), v.dz(), (-0.8f64).exp(), 0.8f64.exp()).unwrap();
        assert!(lb.value >= base - 1e-12);
    }
}
