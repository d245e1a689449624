//! Harmonic angle functions `θ = Im F` on `C*` and on finitely punctured planes,
//! with explicit branch bookkeeping for the holomorphic `F = v + iθ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{check_finite, ComplexScalar};

const I: ComplexScalar = ComplexScalar::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum AngleFunction {
    /// `θ(z) = log|z|²` on `C*`, `F(z) = 2i log z`.
    Classical,
    /// `θ(z) = Σ λ_j log|z - a_j|²`, `F(z) = 2i Σ λ_j log(z - a_j)`.
    PuncturedPlane { punctures: Vec<ComplexScalar>, weights: Vec<f64> },
}

impl AngleFunction {
    pub fn punctured(punctures: Vec<ComplexScalar>, weights: Vec<f64>) -> Result<Self> {
        let a = AngleFunction::PuncturedPlane { punctures, weights };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if let AngleFunction::PuncturedPlane { punctures, weights } = self {
            if punctures.is_empty() || punctures.len() != weights.len() {
                return Err(Error::InvalidParameter("punctures and weights must be nonempty and of equal length".into()));
            }
            for p in punctures {
                check_finite(*p, "puncture")?;
            }
            if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                return Err(Error::InvalidParameter("weights must be positive".into()));
            }
            for (i, a) in punctures.iter().enumerate() {
                if punctures[..i].contains(a) {
                    return Err(Error::InvalidParameter(format!("repeated puncture {a}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, AngleFunction::Classical)
    }

    /// Punctures with their weights; the classical surface is `{0}` with weight 1.
    pub fn terms(&self) -> Vec<(ComplexScalar, f64)> {
        match self {
            AngleFunction::Classical => vec![(ComplexScalar::new(0.0, 0.0), 1.0)],
            AngleFunction::PuncturedPlane { punctures, weights } => {
                punctures.iter().copied().zip(weights.iter().copied()).collect()
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.terms().iter().map(|t| t.1).sum()
    }

    fn check_point(&self, z: ComplexScalar) -> Result<()> {
        check_finite(z, "base point")?;
        for (a, _) in self.terms() {
            if z == a {
                return Err(Error::OutsideDomain(format!("{z} is a puncture")));
            }
        }
        Ok(())
    }

    pub fn theta(&self, z: ComplexScalar) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.theta_unchecked(z))
    }

    pub(crate) fn theta_unchecked(&self, z: ComplexScalar) -> f64 {
        match self {
            AngleFunction::Classical => z.norm_sqr().ln(),
            AngleFunction::PuncturedPlane { punctures, weights } => punctures
                .iter()
                .zip(weights)
                .map(|(a, l)| l * (z - a).norm_sqr().ln())
                .sum(),
        }
    }

    /// `F'(z)`, single valued.
    pub fn f_prime(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        self.check_point(z)?;
        Ok(self.f_prime_unchecked(z))
    }

    pub(crate) fn f_prime_unchecked(&self, z: ComplexScalar) -> ComplexScalar {
        match self {
            AngleFunction::Classical => 2.0 * I / z,
            AngleFunction::PuncturedPlane { punctures, weights } => {
                punctures.iter().zip(weights).map(|(a, l)| 2.0 * I * *l / (z - a)).sum()
            }
        }
    }

    /// `∂θ/∂z = F'/(2i)`.
    pub fn dtheta_dz(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        Ok(self.f_prime(z)? / (2.0 * I))
    }

    /// `F` on the principal logarithms.
    pub fn f_principal(&self, z: ComplexScalar) -> Result<ComplexScalar> {
        self.check_point(z)?;
        Ok(self.terms().iter().map(|(a, l)| 2.0 * I * *l * (z - a).ln()).sum())
    }

    /// Branch of `F` on the chart star-shaped about `center`: principal at the
    /// centre, continued along the segment `[center, z]`. Each puncture carries
    /// the cut on the ray from it pointing away from the centre; a segment
    /// that passes through (or numerically grazes) a puncture is an error.
    pub fn holo_f_branch(&self, center: ComplexScalar, z: ComplexScalar) -> Result<ComplexScalar> {
        self.check_point(z)?;
        let base = self.f_principal(center)?;
        let mut f = base;
        for (a, l) in self.terms() {
            check_segment(center, z, a)?;
            f += 2.0 * I * l * ((z - a) / (center - a)).ln();
        }
        Ok(f)
    }

    /// Analytic continuation of `F` along a polygonal path starting from the
    /// principal value at `path[0]`.
    pub fn continue_along(&self, path: &[ComplexScalar]) -> Result<ComplexScalar> {
        let first = *path.first().ok_or_else(|| Error::InvalidParameter("empty path".into()))?;
        let mut f = self.f_principal(first)?;
        for seg in path.windows(2) {
            self.check_point(seg[1])?;
            for (a, l) in self.terms() {
                check_segment(seg[0], seg[1], a)?;
                f += 2.0 * I * l * ((seg[1] - a) / (seg[0] - a)).ln();
            }
        }
        Ok(f)
    }

    /// Critical points of `θ` (zeros of `F'`).
    pub fn critical_points(&self) -> Vec<ComplexScalar> {
        let terms = self.terms();
        if terms.len() < 2 {
            return Vec::new();
        }
        let total: f64 = terms.iter().map(|t| t.1).sum();
        // monic numerator of F'/(2i): Σ λ_j Π_{i≠j}(z - a_i) / Σ λ_j
        let poly = |z: ComplexScalar| -> ComplexScalar {
            let mut s = ComplexScalar::new(0.0, 0.0);
            for (j, (_, l)) in terms.iter().enumerate() {
                let mut p = ComplexScalar::new(*l / total, 0.0);
                for (i, (a, _)) in terms.iter().enumerate() {
                    if i != j {
                        p *= z - a;
                    }
                }
                s += p;
            }
            s
        };
        durand_kerner(poly, terms.len() - 1, terms.iter().map(|t| t.0.norm()).fold(1.0, f64::max))
    }

    /// Radius of a disc about 0 containing `{θ ≤ level}`.
    pub fn sublevel_radius(&self, level: f64) -> f64 {
        let terms = self.terms();
        let amax = terms.iter().map(|t| t.0.norm()).fold(0.0, f64::max);
        amax + (level / (2.0 * self.total_weight())).exp()
    }

    /// Lower bound for the distance from `{θ ≥ level, |z| ≤ radius}` to the punctures.
    pub fn puncture_clearance(&self, level: f64, radius: f64) -> f64 {
        let terms = self.terms();
        terms
            .iter()
            .enumerate()
            .map(|(j, (_, lj))| {
                let rest: f64 = terms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, (a, l))| l * ((radius + a.norm()).powi(2)).ln())
                    .sum();
                ((level - rest) / (2.0 * lj)).exp()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_segment(from: ComplexScalar, to: ComplexScalar, a: ComplexScalar) -> Result<()> {
    let d = to - from;
    let len2 = d.norm_sqr();
    let t = if len2 > 0.0 { (((a - from) * d.conj()).re / len2).clamp(0.0, 1.0) } else { 0.0 };
    let closest = from + d * t;
    let scale = 1.0 + from.norm().max(to.norm());
    if (closest - a).norm() <= 1e-12 * scale {
        return Err(Error::Branch(format!("segment [{from}, {to}] crosses the puncture {a}")));
    }
    Ok(())
}

fn durand_kerner(p: impl Fn(ComplexScalar) -> ComplexScalar, degree: usize, scale: f64) -> Vec<ComplexScalar> {
    let seed = ComplexScalar::new(0.4, 0.9);
    let mut roots: Vec<ComplexScalar> = (0..degree).map(|k| scale * seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut change: f64 = 0.0;
        for m in 0..degree {
            let mut denom = ComplexScalar::new(1.0, 0.0);
            for l in 0..degree {
                if l != m {
                    denom *= roots[m] - roots[l];
                }
            }
            let step = p(roots[m]) / denom;
            roots[m] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * scale {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn three_punctures() -> AngleFunction {
        AngleFunction::punctured(vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.5)], vec![1.0, 0.5, 0.75]).unwrap()
    }

    #[test]
    fn imaginary_part_of_branch_is_theta() {
        for a in [AngleFunction::Classical, three_punctures()] {
            let center = c(2.5, -2.0);
            for k in 0..50 {
                let z = center + ComplexScalar::from_polar(0.3 + 0.02 * k as f64, 0.7 * k as f64);
                let f = a.holo_f_branch(center, z).unwrap();
                assert!((f.im - a.theta(z).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn theta_is_harmonic_and_f_holomorphic() {
        let h = 1e-3;
        for a in [AngleFunction::Classical, three_punctures()] {
            for z in [c(0.7, 0.4), c(-2.0, 1.1), c(1.5, -0.8)] {
                let t = |d: ComplexScalar| a.theta(z + d).unwrap();
                // nine-point stencil, fourth order on harmonic functions
                let edges = t(c(h, 0.0)) + t(c(-h, 0.0)) + t(c(0.0, h)) + t(c(0.0, -h));
                let corners = t(c(h, h)) + t(c(-h, h)) + t(c(h, -h)) + t(c(-h, -h));
                let lap = (4.0 * edges + corners - 20.0 * t(c(0.0, 0.0))) / (6.0 * h * h);
                assert!(lap.abs() <= 1e-6, "laplacian {lap}");
                let f = |d: ComplexScalar| a.holo_f_branch(z, z + d).unwrap();
                let e = 1e-5;
                let dx = (f(c(e, 0.0)) - f(c(-e, 0.0))) / (2.0 * e);
                let dy = (f(c(0.0, e)) - f(c(0.0, -e))) / (2.0 * e);
                let dzbar = 0.5 * (dx + I * dy);
                assert!(dzbar.norm() <= 1e-8, "dF/dzbar {dzbar}");
                let dz = 0.5 * (dx - I * dy);
                assert!((dz - a.f_prime(z).unwrap()).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn classical_loop_holonomy() {
        let n = 64;
        let path: Vec<_> = (0..=n).map(|k| ComplexScalar::from_polar(1.3, 2.0 * PI * k as f64 / n as f64)).collect();
        let a = AngleFunction::Classical;
        let end = a.continue_along(&path).unwrap();
        let start = a.f_principal(path[0]).unwrap();
        // v = Re F drops by 4π once around the origin
        assert!((end.re - start.re + 4.0 * PI).abs() < 1e-12);
        assert!(((start.re - end.re).exp() - (4.0 * PI).exp()).abs() < 1e-6 * (4.0 * PI).exp());
    }

    #[test]
    fn crossing_a_puncture_is_an_error() {
        let a = AngleFunction::Classical;
        assert!(a.holo_f_branch(c(1.0, 0.0), c(-1.0, 0.0)).is_err());
        assert!(a.holo_f_branch(c(1.0, 0.0), c(-1.0, 1e-3)).is_ok());
        assert!(a.theta(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn critical_points_are_zeros_of_f_prime() {
        let a = three_punctures();
        let crit = a.critical_points();
        assert_eq!(crit.len(), 2);
        for z in crit {
            assert!(a.f_prime(z).unwrap().norm() < 1e-9);
        }
        assert!(AngleFunction::Classical.critical_points().is_empty());
    }

    #[test]
    fn sublevel_radius_bounds_level_set() {
        let a = three_punctures();
        let r = a.sublevel_radius(2.0);
        for k in 0..100 {
            let z = ComplexScalar::from_polar(r * 1.0001, 0.0628 * k as f64);
            assert!(a.theta(z).unwrap() > 2.0);
        }
        let clear = a.puncture_clearance(-1.0, r);
        for (p, _) in a.terms() {
            for k in 0..20 {
                let z = p + ComplexScalar::from_polar(0.999 * clear, 0.314 * k as f64);
                assert!(a.theta(z).unwrap() < -1.0);
            }
        }
    }

    #[test]
    fn serde_schema() {
        let s = serde_json::to_string(&AngleFunction::Classical).unwrap();
        assert_eq!(s, r#"{"surface":"classical"}"#);
        let p: AngleFunction =
            serde_json::from_str(r#"{"surface":"punctured_plane","punctures":[[0.0,0.0],[1.0,0.0]],"weights":[1.0,2.0]}"#).unwrap();
        assert_eq!(p.terms().len(), 2);
    }
}
