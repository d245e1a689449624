//! Worm domains
//! `W = {(z, w) : |w - e^{iθ(z)}|² < 1 - η(θ(z))}` over `C*` or a punctured
//! plane, their boundary strata and Levi geometry, and the pre-Worms
//! `W_in`, `W_out` that bracket them.

mod angle;
mod cover;
mod eta;
mod preworm;

pub use angle::AngleFunction;
pub use cover::{CoverCoords, CoverOracle, StripCover};
pub use eta::{exp_integral_e1, h0, h1, h2, EtaFunction, EtaKernel};
pub use preworm::{base_region_membership, preworm_contains, trivialize, untrivialize, BaseRegion, PreWormSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ComplexPoint2, ComplexScalar, HermitianForm2, RealInterval};

const I: ComplexScalar = ComplexScalar::new(0.0, 1.0);

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStratum {
    Spine,
    Body,
    Exceptional,
    Cap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WormRepr {
    angle: AngleFunction,
    eta: EtaFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WormRepr", into = "WormRepr")]
pub struct WormSpec {
    angle: AngleFunction,
    eta: EtaFunction,
}

impl TryFrom<WormRepr> for WormSpec {
    type Error = Error;
    fn try_from(r: WormRepr) -> Result<Self> {
        WormSpec::new(r.angle, r.eta)
    }
}

impl From<WormSpec> for WormRepr {
    fn from(s: WormSpec) -> Self {
        WormRepr { angle: s.angle, eta: s.eta }
    }
}

/// Derivatives of `θ`, `F` and `η∘θ` at one base point, on the principal branch.
#[derive(Debug, Clone, Copy)]
struct BaseJet {
    f: ComplexScalar,
    fp: ComplexScalar,
    eta: (f64, f64, f64),
}

impl WormSpec {
    pub fn new(angle: AngleFunction, eta: EtaFunction) -> Result<Self> {
        if eta.kernel() != EtaKernel::FlatConvex {
            return Err(Error::InvalidParameter("η must be convex off I".into()));
        }
        let spec = WormSpec { angle, eta };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a Worm from an `η` that may violate convexity; only meant for
    /// negative-control audits.
    pub fn with_corrupted_eta(angle: AngleFunction, eta: EtaFunction) -> Result<Self> {
        let spec = WormSpec { angle, eta };
        spec.validate()?;
        Ok(spec)
    }

    /// `θ = log|z|²`, `I = [-1, 1]`, `J = [-1.6, 1.6]`.
    pub fn classical_default() -> Self {
        let eta = EtaFunction::new(RealInterval::new(-1.0, 1.0).unwrap(), RealInterval::new(-1.6, 1.6).unwrap()).unwrap();
        WormSpec::new(AngleFunction::Classical, eta).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("worm spec serialises")
    }

    fn validate(&self) -> Result<()> {
        self.angle.validate()?;
        let (i, j) = (self.eta.inner(), self.eta.outer());
        let levels = [i.lo(), i.hi(), j.lo(), j.hi()];
        for c in self.angle.critical_points() {
            if let Ok(t) = self.angle.theta(c) {
                if levels.iter().any(|l| (t - l).abs() < 1e-8) {
                    return Err(Error::InvalidParameter(format!("θ has a critical point at {c} on a boundary level")));
                }
            }
        }
        for level in levels {
            for z in self.level_set_samples(level, 64) {
                if self.angle.f_prime_unchecked(z).norm() <= 1e-8 {
                    return Err(Error::InvalidParameter(format!("|F'| vanishes at {z} on the level θ = {level}")));
                }
            }
        }
        Ok(())
    }

    /// Points of `{θ = level}` found by bisection along rays leaving each puncture.
    pub fn level_set_samples(&self, level: f64, rays: usize) -> Vec<ComplexScalar> {
        let far = self.angle.sublevel_radius(level) * 2.0 + 1.0;
        let mut out = Vec::new();
        for (a, _) in self.angle.terms() {
            for k in 0..rays {
                let dir = ComplexScalar::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.5) / rays as f64);
                let reach = far + a.norm();
                let (mut lo, mut hi) = (1e-300_f64.max(reach * 1e-12), reach);
                let g = |r: f64| self.angle.theta_unchecked(a + dir * r) - level;
                if !(g(lo) < 0.0 && g(hi) > 0.0) {
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(a + dir * (0.5 * (lo + hi)));
            }
        }
        out
    }

    pub fn angle(&self) -> &AngleFunction {
        &self.angle
    }

    pub fn eta(&self) -> &EtaFunction {
        &self.eta
    }

    pub fn inner(&self) -> RealInterval {
        self.eta.inner()
    }

    pub fn outer(&self) -> RealInterval {
        self.eta.outer()
    }

    pub fn inner_preworm(&self) -> PreWormSpec {
        PreWormSpec::new(BaseRegion::Inner, self.angle.clone(), self.inner())
    }

    pub fn outer_preworm(&self) -> PreWormSpec {
        PreWormSpec::new(BaseRegion::Outer, self.angle.clone(), self.outer())
    }

    /// Radius of a disc about 0 containing `θ⁻¹(J)`.
    pub fn base_radius(&self) -> f64 {
        self.angle.sublevel_radius(self.outer().hi())
    }

    fn jet(&self, z: ComplexScalar) -> Result<BaseJet> {
        let theta = self.angle.theta(z)?;
        Ok(BaseJet {
            f: self.angle.f_principal(z)?,
            fp: self.angle.f_prime_unchecked(z),
            eta: self.eta.eval(theta),
        })
    }

    /// `r = |w|² - 2 Re(w e^{-iθ}) + η(θ)`.
    pub fn defining_function(&self, p: &ComplexPoint2) -> Result<f64> {
        let theta = self.angle.theta(p.z())?;
        Ok(self.r_at(theta, p.w()))
    }

    fn r_at(&self, theta: f64, w: ComplexScalar) -> f64 {
        w.norm_sqr() - 2.0 * (w * ComplexScalar::from_polar(1.0, -theta)).re + self.eta.value(theta)
    }

    pub fn contains(&self, p: &ComplexPoint2) -> bool {
        matches!(self.defining_function(p), Ok(r) if r < 0.0)
    }

    /// Membership in `B_λ(W) = {(z, λw) : (z, w) ∈ W}`.
    pub fn scaled_contains(&self, lambda: f64, p: &ComplexPoint2) -> bool {
        self.contains(&barrett_scale(1.0 / lambda, p))
    }

    /// Radius of the `w`-slice disc over `z`, `None` when the slice is empty.
    pub fn slice_radius(&self, z: ComplexScalar) -> Result<Option<f64>> {
        let theta = self.angle.theta(z)?;
        let rad2 = 1.0 - self.eta.value(theta);
        Ok(if rad2 > 0.0 { Some(rad2.sqrt()) } else { None })
    }

    /// Boundary point `w = e^{iθ}(1 + ρ e^{iφ})` over `z`, `ρ² = 1 - η(θ)`.
    pub fn boundary_point(&self, z: ComplexScalar, phi: f64) -> Result<Option<ComplexPoint2>> {
        let theta = self.angle.theta(z)?;
        let rad2 = 1.0 - self.eta.value(theta);
        if rad2 < 0.0 {
            return Ok(None);
        }
        let w = ComplexScalar::from_polar(1.0, theta) * (1.0 + ComplexScalar::from_polar(rad2.sqrt(), phi));
        Ok(Some(ComplexPoint2::new(z, w)?))
    }

    pub fn classify_boundary(&self, p: &ComplexPoint2, tol: f64) -> Result<BoundaryStratum> {
        let r = self.defining_function(p)?;
        if r.abs() > tol {
            return Err(Error::NotOnBoundary(r));
        }
        let theta = self.angle.theta(p.z())?;
        let dtheta = 0.5 * self.angle.f_prime_unchecked(p.z()).norm();
        let inner = self.inner();
        let wn = p.w().norm();
        Ok(if inner.contains_closed(theta) && wn <= tol {
            BoundaryStratum::Spine
        } else if dtheta <= tol && wn > tol {
            BoundaryStratum::Exceptional
        } else if !inner.contains_closed(theta) && self.outer().contains_closed(theta) {
            BoundaryStratum::Cap
        } else {
            BoundaryStratum::Body
        })
    }

    /// `(r̃_z, r̃_w)` for the local defining function `r̃ = e^{-v} r`.
    fn local_gradient(&self, jet: &BaseJet, w: ComplexScalar) -> (ComplexScalar, ComplexScalar) {
        let ev = (-jet.f.re).exp();
        let emf = (-jet.f).exp();
        let (eta, deta, _) = jet.eta;
        let fp = jet.fp;
        let rz = -fp / 2.0 * ev * w.norm_sqr() + w * fp * emf + ev * (-fp * eta / 2.0 + deta * fp / (2.0 * I));
        let rw = ev * w.conj() - emf;
        (rz, rw)
    }

    /// Levi form of `r̃ = e^{-v} r` at `p`, including the `e^{-v} η∘θ` term.
    pub fn levi_form(&self, p: &ComplexPoint2) -> Result<HermitianForm2> {
        let jet = self.jet(p.z())?;
        Ok(levi_matrix(&jet, p.w()))
    }

    /// `|(2∂_z + wF'∂_w) r̃|`, equal to `|w F' e^{-F}|` on the body.
    pub fn tangency_check(&self, p: &ComplexPoint2) -> Result<f64> {
        let jet = self.jet(p.z())?;
        let (rz, rw) = self.local_gradient(&jet, p.w());
        Ok((2.0 * rz + p.w() * jet.fp * rw).norm())
    }

    /// Euclidean gradient norm of `r`.
    pub fn gradient_norm(&self, p: &ComplexPoint2) -> Result<f64> {
        let theta = self.angle.theta(p.z())?;
        let fp = self.angle.f_prime_unchecked(p.z());
        let e = ComplexScalar::from_polar(1.0, theta);
        let r_wbar = p.w() - e;
        let dr_dtheta = -2.0 * (p.w() * e.conj()).im + self.eta.eval(theta).1;
        let r_zbar = dr_dtheta * (fp / (2.0 * I)).conj();
        Ok(2.0 * (r_zbar.norm_sqr() + r_wbar.norm_sqr()).sqrt())
    }

    /// Levi form on the complex tangent line `t = (r̃_w, -r̃_z)`, normalised by
    /// `|t|² |∂r̃|`; this is invariant under positive rescalings of `r̃`.
    pub fn tangential_curvature(&self, p: &ComplexPoint2) -> Result<f64> {
        let jet = self.jet(p.z())?;
        let (rz, rw) = self.local_gradient(&jet, p.w());
        let (a, b) = (rw, -rz);
        let t2 = a.norm_sqr() + b.norm_sqr();
        let grad = (rz.norm_sqr() + rw.norm_sqr()).sqrt();
        if t2 == 0.0 {
            return Err(Error::InvalidParameter("degenerate gradient".into()));
        }
        Ok(levi_matrix(&jet, p.w()).apply(a, b) / (t2 * grad))
    }
}

fn levi_matrix(jet: &BaseJet, w: ComplexScalar) -> HermitianForm2 {
    let ev = (-jet.f.re).exp();
    let fp = jet.fp;
    let (eta, _, eta2) = jet.eta;
    let m11 = ev * w.norm_sqr() * fp.norm_sqr() / 4.0 + 0.25 * ev * fp.norm_sqr() * (eta + eta2);
    let m12 = -w.conj() * fp.conj() / 2.0 * ev;
    HermitianForm2::from_parts(m11, m12, ev)
}

/// Barrett's dilation `B_λ(z, w) = (z, λw)`.
pub fn barrett_scale(lambda: f64, p: &ComplexPoint2) -> ComplexPoint2 {
    ComplexPoint2::raw(p.z(), p.w() * lambda)
}

pub fn defining_function(spec: &WormSpec, p: &ComplexPoint2) -> Result<f64> {
    spec.defining_function(p)
}

pub fn worm_contains(spec: &WormSpec, p: &ComplexPoint2) -> bool {
    spec.contains(p)
}

pub fn classify_boundary(spec: &WormSpec, p: &ComplexPoint2, tol: f64) -> Result<BoundaryStratum> {
    spec.classify_boundary(p, tol)
}

pub fn levi_form(spec: &WormSpec, p: &ComplexPoint2) -> Result<HermitianForm2> {
    spec.levi_form(p)
}

pub fn tangency_check(spec: &WormSpec, p: &ComplexPoint2) -> Result<f64> {
    spec.tangency_check(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn pt(z: ComplexScalar, w: ComplexScalar) -> ComplexPoint2 {
        ComplexPoint2::new(z, w).unwrap()
    }

    fn genus_zero() -> WormSpec {
        let angle = AngleFunction::punctured(vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.5)], vec![1.0, 0.5, 0.75]).unwrap();
        let eta = EtaFunction::new(RealInterval::new(-1.0, 3.0).unwrap(), RealInterval::new(-1.5, 3.5).unwrap()).unwrap();
        WormSpec::new(angle, eta).unwrap()
    }

    #[test]
    fn defining_function_examples() {
        let s = WormSpec::classical_default();
        assert_eq!(s.defining_function(&pt(c(1.0, 0.0), c(1.0, 0.0))).unwrap(), -1.0);
        assert_eq!(s.defining_function(&pt(c(1.0, 0.0), c(0.0, 0.0))).unwrap(), 0.0);
        assert_eq!(s.defining_function(&pt(c(1.0, 0.0), c(2.0, 0.0))).unwrap(), 0.0);
        assert!(s.defining_function(&pt(c(0.0, 0.0), c(1.0, 0.0))).is_err());
        assert!(s.contains(&pt(c(1.0, 0.0), c(1.0, 0.0))));
        assert!(!s.contains(&pt(c(1.0, 0.0), c(0.0, 0.0))));
        // θ = log|z|² = 2 outside J
        let z = c(1.0f64.exp(), 0.0);
        for k in 0..40 {
            let w = ComplexScalar::from_polar(0.05 * k as f64, 0.3 * k as f64) + ComplexScalar::from_polar(1.0, 2.0);
            assert!(!s.contains(&pt(z, w)));
        }
    }

    #[test]
    fn classify_examples() {
        let s = WormSpec::classical_default();
        assert_eq!(s.classify_boundary(&pt(c(1.0, 0.0), c(0.0, 0.0)), 1e-7).unwrap(), BoundaryStratum::Spine);
        assert_eq!(s.classify_boundary(&pt(c(1.0, 0.0), c(2.0, 0.0)), 1e-7).unwrap(), BoundaryStratum::Body);
        let z = c((1.3f64 / 2.0).exp(), 0.0);
        let p = s.boundary_point(z, 0.4).unwrap().unwrap();
        assert_eq!(s.classify_boundary(&p, 1e-7).unwrap(), BoundaryStratum::Cap);
        assert!(s.classify_boundary(&pt(c(1.0, 0.0), c(1.0, 0.0)), 1e-7).is_err());
    }

    #[test]
    fn exceptional_points_of_genus_zero_worm() {
        let s = genus_zero();
        let crit = s.angle().critical_points();
        let mut found = 0;
        for z in crit {
            let theta = s.angle().theta(z).unwrap();
            if s.inner().contains_open(theta) {
                let p = s.boundary_point(z, 0.3).unwrap().unwrap();
                assert_eq!(s.classify_boundary(&p, 1e-7).unwrap(), BoundaryStratum::Exceptional);
                found += 1;
            }
        }
        assert!(found >= 1);
    }

    #[test]
    fn classical_sweep_has_no_exceptional_points() {
        let s = WormSpec::classical_default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut n = 0;
        while n < 10_000 {
            let theta = rng.gen_range(-1.6..1.6);
            let z = ComplexScalar::from_polar((theta / 2.0f64).exp(), rng.gen_range(0.0..6.3));
            if let Some(p) = s.boundary_point(z, rng.gen_range(0.0..6.3)).unwrap() {
                let st = s.classify_boundary(&p, 1e-7).unwrap();
                assert_ne!(st, BoundaryStratum::Exceptional);
                n += 1;
            }
        }
    }

    #[test]
    fn levi_kernel_and_tangency() {
        let s = WormSpec::classical_default();
        let p = pt(c(1.0, 0.0), c(2.0, 0.0));
        assert!((s.tangency_check(&p).unwrap() - 4.0).abs() < 1e-12);
        let spine = pt(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(s.tangency_check(&spine).unwrap(), 0.0);
        for st in [WormSpec::classical_default(), genus_zero()] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut n = 0;
            while n < 500 {
                let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let Ok(theta) = st.angle().theta(z) else { continue };
                if !st.inner().contains_open(theta) {
                    continue;
                }
                let p = st.boundary_point(z, rng.gen_range(0.0..std::f64::consts::TAU)).unwrap().unwrap();
                let l = st.levi_form(&p).unwrap();
                let fp = st.angle().f_prime(z).unwrap();
                let k = l.apply(c(2.0, 0.0), p.w() * fp);
                assert!(k.abs() <= 1e-10 * (1.0 + l.max_eigenvalue()), "kernel residual {k}");
                assert!(l.min_eigenvalue() >= -1e-8);
                let expected = (p.w() * fp * (-st.angle().f_principal(z).unwrap()).exp()).norm();
                assert!((st.tangency_check(&p).unwrap() - expected).abs() < 1e-9 * (1.0 + expected));
                n += 1;
            }
        }
    }

    /// The full complex Hessian of `r̃` by central differences is the oracle
    /// for the analytic Levi form, cap term included.
    #[test]
    fn levi_form_matches_finite_differences() {
        let s = WormSpec::classical_default();
        let rt = |z: ComplexScalar, w: ComplexScalar| {
            let f = s.angle().holo_f_branch(c(1.5, 0.5), z).unwrap();
            (-f.re).exp() * s.defining_function(&pt(z, w)).unwrap()
        };
        let h = 1e-4;
        // ∂_a ∂_ā g = ¼ Δ along the complex line spanned by (a₁, a₂)
        let hess = |z: ComplexScalar, w: ComplexScalar, a: ComplexScalar, b: ComplexScalar| {
            let g = |t: ComplexScalar| rt(z + a * t, w + b * t);
            (g(c(h, 0.0)) + g(c(-h, 0.0)) + g(c(0.0, h)) + g(c(0.0, -h)) - 4.0 * g(c(0.0, 0.0))) / (4.0 * h * h)
        };
        for (z, w) in [(c(1.5, 0.5), c(0.3, 0.8)), (c(1.9, 0.3), c(0.2, -0.4)), (c(0.5, 0.2), c(1.0, 1.0))] {
            let l = s.levi_form(&pt(z, w)).unwrap();
            let f = s.angle().f_principal(z).unwrap();
            let fb = s.angle().holo_f_branch(c(1.5, 0.5), z).unwrap();
            // the two branches differ by a constant, which rescales r̃
            let scale = (fb.re - f.re).exp();
            for (a, b) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)), (c(0.6, 0.2), c(-0.3, 0.7))] {
                let fd = hess(z, w, a, b) * scale;
                let an = l.apply(a, b);
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{fd} vs {an} at {z}");
            }
        }
    }

    #[test]
    fn spine_has_zero_tangential_curvature_and_body_positive() {
        let s = WormSpec::classical_default();
        let spine = pt(c(1.0, 0.0), c(0.0, 0.0));
        assert!(s.tangential_curvature(&spine).unwrap().abs() <= 1e-8);
        let body = s.boundary_point(c(1.0, 0.0), 0.5).unwrap().unwrap();
        assert!(s.tangential_curvature(&body).unwrap() > 1e-6);
        assert!(s.gradient_norm(&body).unwrap() > 1e-6);
    }

    #[test]
    fn scaling_group_law() {
        let p = pt(c(1.0, 0.2), c(0.3, -0.4));
        assert_eq!(barrett_scale(1.0, &p), p);
        let a = barrett_scale(2.0, &barrett_scale(3.0, &p));
        assert_eq!(a, barrett_scale(6.0, &p));
        let s = WormSpec::classical_default();
        let inside_win = pt(c(1.0, 0.3), c(5.0, 2.0));
        assert!(s.inner_preworm().contains(&inside_win));
        assert!((1..=100).map(|n| n as f64).skip_while(|n| !s.scaled_contains(*n, &inside_win)).all(|n| s.scaled_contains(n, &inside_win)));
    }

    #[test]
    fn spec_json_roundtrip_and_rejection() {
        let s = WormSpec::classical_default();
        let back = WormSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"angle":{"surface":"classical"},"eta":{"inner":[-1.0,1.0],"outer":[-1.6,1.6],"kernel":"flipped_control"}}"#;
        assert!(WormSpec::from_json(bad).is_err());
        // a critical point of θ sitting on ∂I
        let angle = AngleFunction::punctured(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![1.0, 1.0]).unwrap();
        let crit_level = angle.theta(c(0.0, 0.0)).unwrap();
        let eta = EtaFunction::new(RealInterval::new(crit_level, 3.0).unwrap(), RealInterval::new(-1.0, 4.0).unwrap()).unwrap();
        assert!(WormSpec::new(angle, eta).is_err());
    }

    proptest! {
        #[test]
        fn defining_function_sign_matches_membership(x in -2.5f64..2.5, y in -2.5f64..2.5, u in -2.5f64..2.5, v in -2.5f64..2.5) {
            let s = WormSpec::classical_default();
            let p = pt(c(x, y), c(u, v));
            if let Ok(r) = s.defining_function(&p) {
                prop_assert_eq!(r < 0.0, s.contains(&p));
            }
        }
    }
}
