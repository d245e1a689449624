//! Value types shared by every module: complex points and tangent vectors in
//! base × fiber coordinates, real intervals, 2×2 Hermitian forms and the
//! metric oracle contract.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

pub(crate) fn check_finite(c: ComplexScalar, what: &'static str) -> Result<ComplexScalar> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// A point `(z, w)`: `z` is the base coordinate, `w` the fiber coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint2 {
    z: ComplexScalar,
    w: ComplexScalar,
}

impl ComplexPoint2 {
    pub fn new(z: ComplexScalar, w: ComplexScalar) -> Result<Self> {
        Ok(Self {
            z: check_finite(z, "point z")?,
            w: check_finite(w, "point w")?,
        })
    }

    /// Caller guarantees finiteness (hot loops that already validated inputs).
    pub(crate) fn raw(z: ComplexScalar, w: ComplexScalar) -> Self {
        debug_assert!(z.re.is_finite() && z.im.is_finite() && w.re.is_finite() && w.im.is_finite());
        Self { z, w }
    }

    pub fn z(&self) -> ComplexScalar {
        self.z
    }

    pub fn w(&self) -> ComplexScalar {
        self.w
    }

    pub fn is_finite(&self) -> bool {
        self.z.re.is_finite() && self.z.im.is_finite() && self.w.re.is_finite() && self.w.im.is_finite()
    }

    /// Euclidean distance in C².
    pub fn euclid(&self, other: &Self) -> f64 {
        ((self.z - other.z).norm_sqr() + (self.w - other.w).norm_sqr()).sqrt()
    }
}

/// Tangent vector `(dz, dw)` attached at `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector2 {
    base: ComplexPoint2,
    dz: ComplexScalar,
    dw: ComplexScalar,
}

impl TangentVector2 {
    pub fn new(base: ComplexPoint2, dz: ComplexScalar, dw: ComplexScalar) -> Result<Self> {
        Ok(Self {
            base,
            dz: check_finite(dz, "tangent dz")?,
            dw: check_finite(dw, "tangent dw")?,
        })
    }

    pub fn base(&self) -> ComplexPoint2 {
        self.base
    }

    pub fn dz(&self) -> ComplexScalar {
        self.dz
    }

    pub fn dw(&self) -> ComplexScalar {
        self.dw
    }

    pub fn is_zero(&self) -> bool {
        self.dz == ComplexScalar::new(0.0, 0.0) && self.dw == ComplexScalar::new(0.0, 0.0)
    }

    pub fn scale(&self, t: ComplexScalar) -> Self {
        Self { base: self.base, dz: self.dz * t, dw: self.dw * t }
    }

    pub fn norm(&self) -> f64 {
        (self.dz.norm_sqr() + self.dw.norm_sqr()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct RealInterval {
    lo: f64,
    hi: f64,
}

impl RealInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_closed(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn contains_open(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }

    /// `self` lies in the interior of `other`.
    pub fn inside_interior_of(&self, other: &RealInterval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }
}

impl TryFrom<[f64; 2]> for RealInterval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        RealInterval::new(v[0], v[1])
    }
}

impl From<RealInterval> for [f64; 2] {
    fn from(i: RealInterval) -> Self {
        [i.lo, i.hi]
    }
}

/// Hermitian 2×2 form `H`, evaluated as `conj(x)ᵀ H x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianForm2 {
    h11: ComplexScalar,
    h12: ComplexScalar,
    h21: ComplexScalar,
    h22: ComplexScalar,
}

impl HermitianForm2 {
    /// Validates `h21 = conj(h12)` and real diagonal, to a relative tolerance.
    pub fn new(h11: ComplexScalar, h12: ComplexScalar, h21: ComplexScalar, h22: ComplexScalar) -> Result<Self> {
        for (c, what) in [(h11, "h11"), (h12, "h12"), (h21, "h21"), (h22, "h22")] {
            check_finite(c, what)?;
        }
        let scale = 1.0 + h11.norm() + h12.norm() + h22.norm();
        let tol = 1e-12 * scale;
        if h11.im.abs() > tol || h22.im.abs() > tol || (h21 - h12.conj()).norm() > tol {
            return Err(Error::InvalidParameter("matrix is not Hermitian".into()));
        }
        Ok(Self::from_parts(h11.re, h12, h22.re))
    }

    pub fn from_parts(h11: f64, h12: ComplexScalar, h22: f64) -> Self {
        Self {
            h11: ComplexScalar::new(h11, 0.0),
            h12,
            h21: h12.conj(),
            h22: ComplexScalar::new(h22, 0.0),
        }
    }

    pub fn identity() -> Self {
        Self::from_parts(1.0, ComplexScalar::new(0.0, 0.0), 1.0)
    }

    pub fn entries(&self) -> [ComplexScalar; 4] {
        [self.h11, self.h12, self.h21, self.h22]
    }

    /// Full complex evaluation; the imaginary part is rounding noise only.
    pub fn apply_complex(&self, a: ComplexScalar, b: ComplexScalar) -> ComplexScalar {
        a.conj() * (self.h11 * a + self.h12 * b) + b.conj() * (self.h21 * a + self.h22 * b)
    }

    pub fn apply(&self, a: ComplexScalar, b: ComplexScalar) -> f64 {
        self.apply_complex(a, b).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (a, d) = (self.h11.re, self.h22.re);
        let half_gap = (0.5 * (a - d)).hypot(self.h12.norm());
        0.5 * (a + d) - half_gap
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let (a, d) = (self.h11.re, self.h22.re);
        0.5 * (a + d) + (0.5 * (a - d)).hypot(self.h12.norm())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_parts(self.h11.re + other.h11.re, self.h12 + other.h12, self.h22.re + other.h22.re)
    }
}

pub fn hermitian_apply(h: &HermitianForm2, a: ComplexScalar, b: ComplexScalar) -> f64 {
    h.apply(a, b)
}

pub fn min_eigenvalue(h: &HermitianForm2) -> f64 {
    h.min_eigenvalue()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundDirection {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AccuracyClass {
    Exact,
    GraphApprox { resolution: f64 },
    DiscSearchBound { direction: BoundDirection },
}

impl AccuracyClass {
    /// Additive slack carried by distances of this class.
    pub fn resolution(&self) -> f64 {
        match self {
            AccuracyClass::GraphApprox { resolution } => *resolution,
            _ => 0.0,
        }
    }
}

/// Distance and infinitesimal metric provider.
pub trait MetricOracle {
    type Point;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> Result<f64>;

    fn royden(&self, _v: &TangentVector2) -> Result<f64> {
        Err(Error::Unsupported("royden metric"))
    }

    fn accuracy(&self) -> AccuracyClass;

    /// `rows[i][j] = d(from[i], to[j])`.
    fn distance_rows(&self, from: &[Self::Point], to: &[Self::Point]) -> Result<Vec<Vec<f64>>> {
        from.iter().map(|p| to.iter().map(|q| self.distance(p, q)).collect()).collect()
    }

    /// Distance from each point of `from` to the nearest point of `set`.
    fn distance_to_set(&self, from: &[Self::Point], set: &[Self::Point]) -> Result<Vec<f64>> {
        Ok(self.distance_rows(from, set)?.into_iter().map(|row| row.into_iter().fold(f64::INFINITY, f64::min)).collect())
    }
}
