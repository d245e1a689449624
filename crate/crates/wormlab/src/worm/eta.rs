//! The bump `η`: zero on `I`, strictly convex off `I`, calibrated so that
//! `η = 1` at the endpoints of `J`.
//!
//! The profile is the second antiderivative `h₂` of `h(x) = e^{-1/x}` (`x > 0`),
//! which has the closed form
//! `h₂(s) = (s²/2 + s/2) e^{-1/s} - (s + 1/2) E₁(1/s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::RealInterval;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^x E₁(x)` for `x > 0`.
fn scaled_e1(x: f64) -> f64 {
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut k = 1.0;
        loop {
            term *= -x / k;
            let add = -term / k;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
            k += 1.0;
        }
        (-EULER_GAMMA - x.ln() + sum) * x.exp()
    } else {
        // modified Lentz on the continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

pub fn exp_integral_e1(x: f64) -> f64 {
    scaled_e1(x) * (-x).exp()
}

/// `h(s) = e^{-1/s}` for `s > 0`, else 0.
pub fn h0(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// First antiderivative of `h0` vanishing at 0.
pub fn h1(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = 1.0 / s;
    if x < 1.0 {
        s * (-x).exp() - exp_integral_e1(x)
    } else {
        (-x).exp() * (s - scaled_e1(x))
    }
}

/// Second antiderivative of `h0` vanishing to infinite order at 0.
pub fn h2(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = 1.0 / s;
    if x < 1.0 {
        0.5 * s * (s + 1.0) * (-x).exp() - (s + 0.5) * exp_integral_e1(x)
    } else {
        (-x).exp() * (0.5 * s * (s + 1.0) - (s + 0.5) * scaled_e1(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaKernel {
    /// `h₂` on each side of `I`.
    FlatConvex,
    /// Negative control with the convexity flipped on `J \ I`:
    /// `p(s) = h₂(L) - h₂(L - s)`, `L` the gap between `I` and `J` on that side.
    FlippedControl,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EtaRepr {
    inner: RealInterval,
    outer: RealInterval,
    #[serde(default = "default_kernel")]
    kernel: EtaKernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_minus: Option<f64>,
}

fn default_kernel() -> EtaKernel {
    EtaKernel::FlatConvex
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EtaRepr", into = "EtaRepr")]
pub struct EtaFunction {
    inner: RealInterval,
    outer: RealInterval,
    alpha_plus: f64,
    alpha_minus: f64,
    kernel: EtaKernel,
}

impl TryFrom<EtaRepr> for EtaFunction {
    type Error = Error;
    fn try_from(r: EtaRepr) -> Result<Self> {
        let eta = EtaFunction::with_kernel(r.inner, r.outer, r.kernel)?;
        for (given, actual, name) in [(r.alpha_plus, eta.alpha_plus, "alpha_plus"), (r.alpha_minus, eta.alpha_minus, "alpha_minus")] {
            if let Some(g) = given {
                if (g - actual).abs() > 1e-9 * actual {
                    return Err(Error::InvalidParameter(format!("{name} = {g} does not match the calibration {actual}")));
                }
            }
        }
        Ok(eta)
    }
}

impl From<EtaFunction> for EtaRepr {
    fn from(e: EtaFunction) -> Self {
        EtaRepr {
            inner: e.inner,
            outer: e.outer,
            kernel: e.kernel,
            alpha_plus: Some(e.alpha_plus),
            alpha_minus: Some(e.alpha_minus),
        }
    }
}

impl EtaFunction {
    pub fn new(inner: RealInterval, outer: RealInterval) -> Result<Self> {
        Self::with_kernel(inner, outer, EtaKernel::FlatConvex)
    }

    pub fn flipped_control(inner: RealInterval, outer: RealInterval) -> Result<Self> {
        Self::with_kernel(inner, outer, EtaKernel::FlippedControl)
    }

    pub fn with_kernel(inner: RealInterval, outer: RealInterval, kernel: EtaKernel) -> Result<Self> {
        if !inner.inside_interior_of(&outer) {
            return Err(Error::InvalidParameter(format!(
                "inner interval [{}, {}] must lie in the interior of [{}, {}]",
                inner.lo(),
                inner.hi(),
                outer.lo(),
                outer.hi()
            )));
        }
        let alpha_plus = 1.0 / h2(outer.hi() - inner.hi());
        let alpha_minus = 1.0 / h2(inner.lo() - outer.lo());
        if !(alpha_plus.is_finite() && alpha_minus.is_finite()) {
            return Err(Error::InvalidParameter("gap between I and J too small to calibrate".into()));
        }
        Ok(Self { inner, outer, alpha_plus, alpha_minus, kernel })
    }

    pub fn inner(&self) -> RealInterval {
        self.inner
    }

    pub fn outer(&self) -> RealInterval {
        self.outer
    }

    pub fn alphas(&self) -> (f64, f64) {
        (self.alpha_plus, self.alpha_minus)
    }

    pub fn kernel(&self) -> EtaKernel {
        self.kernel
    }

    fn gaps(&self) -> (f64, f64) {
        (self.outer.hi() - self.inner.hi(), self.inner.lo() - self.outer.lo())
    }

    /// Profile value and first two derivatives at offset `s` from `I` on one side.
    fn profile(&self, s: f64, gap: f64) -> (f64, f64, f64) {
        if s <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        match self.kernel {
            EtaKernel::FlatConvex => (h2(s), h1(s), h0(s)),
            EtaKernel::FlippedControl => {
                let r = gap - s;
                (h2(gap) - h2(r), h1(r), -h0(r))
            }
        }
    }

    /// `(η, η', η'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (gp, gm) = self.gaps();
        let (p0, p1, p2) = self.profile(t - self.inner.hi(), gp);
        let (m0, m1, m2) = self.profile(self.inner.lo() - t, gm);
        (
            self.alpha_plus * p0 + self.alpha_minus * m0,
            self.alpha_plus * p1 - self.alpha_minus * m1,
            self.alpha_plus * p2 + self.alpha_minus * m2,
        )
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson, used as an independent oracle for the closed forms.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn e1_reference_values() {
        // tabulated E1
        assert!((exp_integral_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((exp_integral_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((exp_integral_e1(2.0) - 0.048_900_510_708_061_19).abs() < 1e-15);
        assert!((exp_integral_e1(10.0) - 4.156_968_929_685_324e-6).abs() < 1e-18);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for s in [0.05, 0.1, 0.3, 0.6, 0.999, 1.0, 1.7, 3.0] {
            let q1 = simpson(&h0, 0.0, s, 1e-15);
            let q2 = simpson(&|x| (s - x) * h0(x), 0.0, s, 1e-15);
            assert!((h1(s) - q1).abs() < 1e-12 * (1.0 + q1), "h1({s}): {} vs {q1}", h1(s));
            assert!((h2(s) - q2).abs() < 1e-10_f64.min(1e-8 * q2.max(1e-20)) + 1e-14, "h2({s}): {} vs {q2}", h2(s));
        }
    }

    #[test]
    fn derivatives_are_consistent() {
        let e = 1e-5;
        for s in [0.08, 0.4, 0.9, 1.1, 2.5] {
            assert!(((h2(s + e) - h2(s - e)) / (2.0 * e) - h1(s)).abs() < 1e-8);
            assert!(((h1(s + e) - h1(s - e)) / (2.0 * e) - h0(s)).abs() < 1e-8);
        }
    }

    fn default_eta() -> EtaFunction {
        EtaFunction::new(RealInterval::new(-1.0, 1.0).unwrap(), RealInterval::new(-1.6, 1.6).unwrap()).unwrap()
    }

    #[test]
    fn eta_invariants() {
        let eta = default_eta();
        for k in 0..=200 {
            let t = -1.0 + 0.01 * k as f64;
            assert_eq!(eta.value(t), 0.0);
        }
        assert!((eta.value(1.6) - 1.0).abs() < 1e-8);
        assert!((eta.value(-1.6) - 1.0).abs() < 1e-8);
        let hstep = 1e-3;
        let mut t = -1.6;
        while t <= 1.6 {
            assert!(eta.value(t) <= 1.0 + 1e-15);
            if t.abs() > 1.0 + 0.05 {
                let second = eta.value(t + hstep) - 2.0 * eta.value(t) + eta.value(t - hstep);
                assert!(second > 0.0, "second difference at {t}");
                assert!(eta.eval(t).2 > 0.0);
            }
            t += 0.0137;
        }
        let (v, d1, d2) = eta.eval(1.3);
        let e = 1e-5;
        assert!(((eta.value(1.3 + e) - eta.value(1.3 - e)) / (2.0 * e) - d1).abs() < 1e-6 * (1.0 + d1.abs()));
        assert!(((eta.eval(1.3 + e).1 - eta.eval(1.3 - e).1) / (2.0 * e) - d2).abs() < 1e-5 * (1.0 + d2.abs()));
        assert!(v > 0.0);
    }

    #[test]
    fn flipped_control_is_concave() {
        let i = RealInterval::new(-1.0, 1.0).unwrap();
        let j = RealInterval::new(-1.6, 1.6).unwrap();
        let eta = EtaFunction::flipped_control(i, j).unwrap();
        assert!((eta.value(1.6) - 1.0).abs() < 1e-8);
        assert!(eta.eval(1.3).2 < 0.0);
        assert!(eta.eval(-1.3).2 < 0.0);
    }

    #[test]
    fn rejects_bad_intervals() {
        let i = RealInterval::new(-1.0, 1.0).unwrap();
        assert!(EtaFunction::new(i, RealInterval::new(-1.0, 2.0).unwrap()).is_err());
        assert!(EtaFunction::new(i, RealInterval::new(-0.5, 2.0).unwrap()).is_err());
    }

    #[test]
    fn serde_roundtrip_and_alpha_check() {
        let eta = default_eta();
        let s = serde_json::to_string(&eta).unwrap();
        let back: EtaFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, eta);
        let bad = r#"{"inner":[-1.0,1.0],"outer":[-1.6,1.6],"alpha_plus":3.0}"#;
        assert!(serde_json::from_str::<EtaFunction>(bad).is_err());
    }
}
