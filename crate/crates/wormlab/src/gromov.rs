//! Gromov products, four-point δ, quasigeodesic fits, slimness of sampled
//! triangles, and the non-slim triangle construction over a trivialised
//! product chart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{ComplexPoint2, ComplexScalar, MetricOracle};
use crate::numeric::{GraphOracle, MetricGraph};

/// Largest sample scanned exhaustively by [`delta_four_point`].
pub const EXHAUSTIVE_LIMIT: usize = 60;
/// Quadruples drawn when the sample is larger than [`EXHAUSTIVE_LIMIT`].
pub const SAMPLED_QUADRUPLES: usize = 10_000_000;
/// Seed used by [`delta_four_point`].
pub const DEFAULT_DELTA_SEED: u64 = 0x5eed_de17a;

/// Claimed `(A, B)` of an `(A, B)`-quasigeodesic:
/// `A⁻¹|t - s| - B ≤ d(σ(s), σ(t)) ≤ A|t - s| + B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiConstants {
    pub a: f64,
    pub b: f64,
}

impl QuasiConstants {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 1.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("quasigeodesic constants ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub const GEODESIC: QuasiConstants = QuasiConstants { a: 1.0, b: 0.0 };
}

/// A curve known at increasing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve<P = ComplexPoint2> {
    params: Vec<f64>,
    points: Vec<P>,
    claimed: QuasiConstants,
}

impl<P: Clone> SampledCurve<P> {
    pub fn new(params: Vec<f64>, points: Vec<P>, claimed: QuasiConstants) -> Result<Self> {
        if params.len() != points.len() {
            return Err(Error::InvalidParameter(format!("{} parameters for {} points", params.len(), points.len())));
        }
        if params.is_empty() {
            return Err(Error::InvalidParameter("empty curve".into()));
        }
        if params.iter().any(|t| !t.is_finite()) || params.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("parameters must be finite and strictly increasing".into()));
        }
        Ok(Self { params, points, claimed })
    }

    /// Samples `f` on `[t0, t1]` at uniform parameters, doubling the count
    /// until consecutive samples are within `resolution` of each other.
    pub fn sample<O, F>(oracle: &O, f: F, t0: f64, t1: f64, resolution: f64, claimed: QuasiConstants) -> Result<Self>
    where
        O: MetricOracle<Point = P>,
        F: Fn(f64) -> P,
    {
        if !(t1 > t0 && resolution > 0.0) {
            return Err(Error::InvalidParameter(format!("sampling [{t0}, {t1}] at {resolution}")));
        }
        let mut m = ((t1 - t0) / resolution).ceil().max(1.0) as usize;
        loop {
            let params: Vec<f64> = (0..=m).map(|k| if k == m { t1 } else { t0 + (t1 - t0) * k as f64 / m as f64 }).collect();
            let curve = Self::new(params.clone(), params.iter().map(|&t| f(t)).collect(), claimed)?;
            if curve.max_chord(oracle)? <= resolution {
                return Ok(curve);
            }
            if m > 1 << 20 {
                return Err(Error::InvalidParameter("curve cannot be sampled at this resolution".into()));
            }
            m *= 2;
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn claimed(&self) -> QuasiConstants {
        self.claimed
    }

    pub fn with_claimed(mut self, claimed: QuasiConstants) -> Self {
        self.claimed = claimed;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> &P {
        &self.points[0]
    }

    pub fn end(&self) -> &P {
        &self.points[self.points.len() - 1]
    }

    pub fn param_length(&self) -> f64 {
        self.params[self.params.len() - 1] - self.params[0]
    }

    /// Largest parameter gap between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.params.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Largest distance between consecutive samples.
    pub fn max_chord<O: MetricOracle<Point = P>>(&self, oracle: &O) -> Result<f64> {
        self.points.windows(2).try_fold(0.0f64, |m, w| Ok(m.max(oracle.distance(&w[0], &w[1])?)))
    }

    pub fn map<Q: Clone>(&self, f: impl Fn(&P) -> Q) -> SampledCurve<Q> {
        SampledCurve { params: self.params.clone(), points: self.points.iter().map(f).collect(), claimed: self.claimed }
    }
}

/// Three sides with `a` from `V₀` to `V₁`, `b` from `V₀` to `V₂` and `c`
/// from `V₁` to `V₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTriangle<P = ComplexPoint2> {
    pub a: SampledCurve<P>,
    pub b: SampledCurve<P>,
    pub c: SampledCurve<P>,
}

impl<P: Clone + PartialEq + std::fmt::Debug> SampledTriangle<P> {
    /// Vertices must agree exactly.
    pub fn new(a: SampledCurve<P>, b: SampledCurve<P>, c: SampledCurve<P>) -> Result<Self> {
        Self::closed_by(a, b, c, |p, q| p == q)
    }

    /// Vertices must agree within `tolerance` under `oracle`.
    pub fn snapped<O: MetricOracle<Point = P>>(oracle: &O, tolerance: f64, a: SampledCurve<P>, b: SampledCurve<P>, c: SampledCurve<P>) -> Result<Self> {
        Self::closed_by(a, b, c, |p, q| oracle.distance(p, q).is_ok_and(|d| d <= tolerance))
    }

    fn closed_by(a: SampledCurve<P>, b: SampledCurve<P>, c: SampledCurve<P>, close: impl Fn(&P, &P) -> bool) -> Result<Self> {
        let joints = [(a.start(), b.start(), "V0"), (a.end(), c.start(), "V1"), (c.end(), b.end(), "V2")];
        for (p, q, name) in joints {
            if !close(p, q) {
                return Err(Error::InvalidParameter(format!("triangle does not close at {name}: {p:?} vs {q:?}")));
            }
        }
        Ok(Self { a, b, c })
    }
}

impl<P: Clone> SampledTriangle<P> {
    pub fn sides(&self) -> [&SampledCurve<P>; 3] {
        [&self.a, &self.b, &self.c]
    }

    /// Largest parameter gap over the three sides.
    pub fn sampling_step(&self) -> f64 {
        self.sides().iter().map(|s| s.max_step()).fold(0.0, f64::max)
    }

    pub fn vertices(&self) -> [P; 3] {
        [self.a.start().clone(), self.a.end().clone(), self.b.end().clone()]
    }
}

/// `(x|y)_o = ½(d(x, o) + d(y, o) - d(x, y))`.
pub fn gromov_product<O: MetricOracle>(d: &O, x: &O::Point, y: &O::Point, o: &O::Point) -> Result<f64> {
    Ok(0.5 * (d.distance(x, o)? + d.distance(y, o)? - d.distance(x, y)?))
}

/// Four-point δ of a finite sample under `d`.
pub fn delta_four_point<O>(d: &O, sample: &[O::Point]) -> Result<f64>
where
    O: MetricOracle,
{
    delta_four_point_seeded(d, sample, DEFAULT_DELTA_SEED)
}

pub fn delta_four_point_seeded<O>(d: &O, sample: &[O::Point], seed: u64) -> Result<f64>
where
    O: MetricOracle,
{
    if sample.len() < 4 {
        return Err(Error::InvalidParameter(format!("four-point δ needs at least 4 points, got {}", sample.len())));
    }
    let rows = d.distance_rows(sample, sample)?;
    delta_from_matrix(&rows, seed)
}

/// Four-point δ of a symmetric distance matrix: the max over quadruples of
/// `min((x|z)_o, (y|z)_o) - (x|y)_o`. Exhaustive up to [`EXHAUSTIVE_LIMIT`]
/// points, otherwise over [`SAMPLED_QUADRUPLES`] quadruples drawn from `seed`.
pub fn delta_from_matrix(rows: &[Vec<f64>], seed: u64) -> Result<f64> {
    let n = rows.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("four-point δ needs at least 4 points, got {n}")));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("distance matrix is not square".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("distance matrix has non-finite entries".into()));
    }
    if n <= EXHAUSTIVE_LIMIT {
        let per_base: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|o| {
                let g: Vec<Vec<f64>> = (0..n).map(|x| (0..n).map(|y| 0.5 * (rows[x][o] + rows[y][o] - rows[x][y])).collect()).collect();
                let mut best = f64::NEG_INFINITY;
                for x in 0..n {
                    for y in 0..n {
                        let gxy = g[x][y];
                        for (a, b) in g[x].iter().zip(&g[y]) {
                            best = best.max(a.min(*b) - gxy);
                        }
                    }
                }
                best
            })
            .collect();
        return Ok(per_base.into_iter().fold(f64::NEG_INFINITY, f64::max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..SAMPLED_QUADRUPLES {
        let [x, y, z, o]: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..n));
        let g = |a: usize, b: usize| 0.5 * (rows[a][o] + rows[b][o] - rows[a][b]);
        best = best.max(g(x, z).min(g(y, z)) - g(x, y));
    }
    Ok(best)
}

/// Outcome of [`quasigeodesic_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiFit {
    /// Smallest `A ≥ 1` satisfying both inequalities with the claimed `B`
    /// plus slack; infinite if none does.
    pub a_fit: f64,
    /// Smallest `B ≥ 0` satisfying both inequalities with the claimed `A`.
    pub b_fit: f64,
    pub ok: bool,
}

/// Checks the quasigeodesic inequalities over all sampled parameter pairs.
/// The slack on `B` is three times the oracle resolution.
pub fn quasigeodesic_check<O: MetricOracle>(d: &O, c: &SampledCurve<O::Point>) -> Result<QuasiFit>
where
    O::Point: Clone,
{
    let slack = 3.0 * d.accuracy().resolution() + 1e-9;
    let claimed = c.claimed();
    let rows = d.distance_rows(c.points(), c.points())?;
    let b_avail = claimed.b + slack;
    let mut a_fit = 1.0f64;
    let mut b_fit = 0.0f64;
    let t = c.params();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let gap = t[j] - t[i];
            let dist = rows[i][j];
            a_fit = a_fit.max((dist - b_avail) / gap);
            a_fit = a_fit.max(if dist + b_avail > 0.0 { gap / (dist + b_avail) } else { f64::INFINITY });
            b_fit = b_fit.max(dist - claimed.a * gap).max(gap / claimed.a - dist);
        }
    }
    let ok = a_fit <= claimed.a * (1.0 + 1e-12) && b_fit <= b_avail;
    Ok(QuasiFit { a_fit, b_fit, ok })
}

/// Largest distance from a sample of one side to the union of the other two.
pub fn slimness<O: MetricOracle>(d: &O, t: &SampledTriangle<O::Point>) -> Result<f64>
where
    O::Point: Clone,
{
    let sides = t.sides();
    let mut worst = 0.0f64;
    for k in 0..3 {
        let others: Vec<O::Point> = (0..3).filter(|&j| j != k).flat_map(|j| sides[j].points().iter().cloned()).collect();
        let dist = d.distance_to_set(sides[k].points(), &others)?;
        worst = dist.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Ingredients of the non-slim triangle over a trivialised product chart:
/// base point `z_n`, fiber point `q`, and unit-speed geodesics `γ_n` from
/// `z_n` and `σ_n` from `q`, both of parameter length `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRecipe {
    pub z_n: ComplexScalar,
    pub q: ComplexScalar,
    pub t_n: f64,
    pub gamma: SampledCurve<ComplexScalar>,
    pub sigma: SampledCurve<ComplexScalar>,
    /// Constants claimed for every side.
    pub claimed: QuasiConstants,
}

/// Sides `a(t) = (z_n, σ(t))`, `b(t) = (γ(t), q)` and `c` on `[0, 2t_n]`
/// running `(γ(t), σ(t_n))` and then `(γ(t_n), σ(2t_n - t))`.
pub fn build_theorem_triangle(recipe: &TriangleRecipe) -> Result<SampledTriangle> {
    let TriangleRecipe { z_n, q, t_n, gamma, sigma, claimed } = recipe;
    let t_n = *t_n;
    if !(t_n > 0.0 && t_n.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_n = {t_n}")));
    }
    let tol = 1e-12 * t_n.max(1.0);
    for (name, curve) in [("γ", gamma), ("σ", sigma)] {
        let p = curve.params();
        if p[0].abs() > tol || (p[p.len() - 1] - t_n).abs() > tol {
            return Err(Error::InvalidParameter(format!("{name} runs over [{}, {}], expected [0, {t_n}]", p[0], p[p.len() - 1])));
        }
    }
    if gamma.start() != z_n || sigma.start() != q {
        return Err(Error::InvalidParameter("γ(0) must be z_n and σ(0) must be q".into()));
    }
    let pt = |z: ComplexScalar, w: ComplexScalar| ComplexPoint2::new(z, w);
    let a = SampledCurve::new(sigma.params().to_vec(), sigma.points().iter().map(|&w| pt(*z_n, w)).collect::<Result<_>>()?, *claimed)?;
    let b = SampledCurve::new(gamma.params().to_vec(), gamma.points().iter().map(|&z| pt(z, *q)).collect::<Result<_>>()?, *claimed)?;
    let (g_end, s_end) = (*gamma.end(), *sigma.end());
    let mut params = gamma.params().to_vec();
    let mut points: Vec<ComplexPoint2> = gamma.points().iter().map(|&z| pt(z, s_end)).collect::<Result<_>>()?;
    let sp = sigma.params();
    for k in (0..sp.len() - 1).rev() {
        params.push(2.0 * t_n - sp[k]);
        points.push(pt(g_end, sigma.points()[k])?);
    }
    let last = params.len() - 1;
    params[last] = 2.0 * t_n;
    let c = SampledCurve::new(params, points, *claimed)?;
    SampledTriangle::new(a, b, c)
}

/// Empirical bilipschitz constant of a ball inside its fourfold enlargement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilipschitzProbe {
    /// Largest observed `k_{B(p,4R)} / k_M`; at least 1.
    pub constant: f64,
    pub pairs: usize,
    pub radius: f64,
}

/// Ratio of distances in the induced subgraph on `B(p, 4R)` to distances in
/// the whole graph, over pairs of nodes in `B(p, R)`: `sources` nodes drawn
/// from `seed`, each paired with every node of the ball.
pub fn bilipschitz_constant_probe(g: &MetricGraph, p: usize, radius: f64, sources: usize, seed: u64) -> Result<BilipschitzProbe> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("probe radius {radius}")));
    }
    if p >= g.node_count() {
        return Err(Error::InvalidParameter(format!("node {p} out of range")));
    }
    let from_p = g.distances_from(&[p]);
    let ball: Vec<usize> = (0..g.node_count()).filter(|&i| from_p[i] < radius).collect();
    let keep: Vec<bool> = from_p.iter().map(|&d| d < 4.0 * radius).collect();
    let index: Vec<Option<usize>> = {
        let mut next = 0;
        keep.iter()
            .map(|&k| {
                let out = k.then_some(next);
                next += usize::from(k);
                out
            })
            .collect()
    };
    let sub = g.induced(&keep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<usize> = Vec::new();
    for _ in 0..sources.min(ball.len()) {
        let cand = ball[rng.gen_range(0..ball.len())];
        if !picks.contains(&cand) {
            picks.push(cand);
        }
    }
    let full = GraphOracle(g);
    let inner = GraphOracle(&sub);
    let ball_sub: Vec<usize> = ball.iter().map(|&i| index[i].expect("ball lies in the enlargement")).collect();
    let picks_sub: Vec<usize> = picks.iter().map(|&i| index[i].expect("ball lies in the enlargement")).collect();
    let d_full = full.distance_rows(&picks, &ball)?;
    let d_sub = inner.distance_rows(&picks_sub, &ball_sub)?;
    let mut constant = 1.0f64;
    let mut pairs = 0;
    for (rf, rs) in d_full.iter().zip(&d_sub) {
        for (&a, &b) in rf.iter().zip(rs) {
            if a > 0.0 {
                pairs += 1;
                constant = constant.max(b / a);
            }
        }
    }
    Ok(BilipschitzProbe { constant, pairs, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{disc_distance, ModelDomain};
    use crate::geom::AccuracyClass;
    use proptest::prelude::*;
    use rand::Rng;

    struct Line;

    impl MetricOracle for Line {
        type Point = f64;
        fn distance(&self, p: &f64, q: &f64) -> Result<f64> {
            Ok((p - q).abs())
        }
        fn accuracy(&self) -> AccuracyClass {
            AccuracyClass::Exact
        }
    }

    /// Two lines with the max metric.
    struct MaxPlane;

    impl MetricOracle for MaxPlane {
        type Point = (f64, f64);
        fn distance(&self, p: &(f64, f64), q: &(f64, f64)) -> Result<f64> {
            Ok((p.0 - q.0).abs().max((p.1 - q.1).abs()))
        }
        fn accuracy(&self) -> AccuracyClass {
            AccuracyClass::Exact
        }
    }

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn brute_delta(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        let g = |x: usize, y: usize, o: usize| 0.5 * (rows[x][o] + rows[y][o] - rows[x][y]);
        let mut best = f64::NEG_INFINITY;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for o in 0..n {
                        best = best.max(g(x, z, o).min(g(y, z, o)) - g(x, y, o));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn gromov_product_on_the_line() {
        assert_eq!(gromov_product(&Line, &3.0, &5.0, &0.0).unwrap(), 3.0);
        assert_eq!(gromov_product(&Line, &4.0, &4.0, &1.0).unwrap(), 3.0);
    }

    #[test]
    fn delta_of_trees_and_squares() {
        assert_eq!(delta_four_point(&Line, &[0.0, 1.0, 2.5, 7.0]).unwrap(), 0.0);
        let square = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let rows = MaxPlane.distance_rows(&square, &square).unwrap();
        assert_eq!(delta_four_point(&MaxPlane, &square).unwrap(), brute_delta(&rows));
        let diamond = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        assert_eq!(delta_four_point(&MaxPlane, &diamond).unwrap(), 1.0);
        assert!(delta_four_point(&Line, &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn sampled_delta_is_a_lower_bound() {
        let pts: Vec<(f64, f64)> = (0..64).map(|k| ((k as f64 * 0.37).sin() * 3.0, (k as f64 * 0.71).cos() * 3.0)).collect();
        let rows = MaxPlane.distance_rows(&pts, &pts).unwrap();
        let sampled = delta_from_matrix(&rows, 7).unwrap();
        let exact = brute_delta(&rows);
        assert!(sampled > 0.0 && sampled <= exact);
        assert_eq!(delta_from_matrix(&rows, 7).unwrap(), sampled);
        let head: Vec<Vec<f64>> = rows[..20].iter().map(|r| r[..20].to_vec()).collect();
        assert_eq!(delta_from_matrix(&head, 7).unwrap(), brute_delta(&head));
    }

    #[test]
    fn disc_delta_is_small() {
        let pts: Vec<ComplexScalar> = (0..40).map(|k| ComplexScalar::from_polar(0.9 * ((k * 7 % 40) as f64 / 40.0).sqrt(), k as f64 * 2.39996)).collect();
        let oracle = crate::exact::PlanarOracle(ModelDomain::UnitDisc);
        let delta = delta_four_point(&oracle, &pts).unwrap();
        assert!(delta > 0.0 && delta <= 3f64.ln(), "{delta}");
    }

    #[test]
    fn quasigeodesic_fits() {
        let geodesic = SampledCurve::new((0..=10).map(f64::from).collect(), (0..=10).map(|k| 2.0 * f64::from(k)).collect(), QuasiConstants::new(2.0, 0.0).unwrap()).unwrap();
        let fit = quasigeodesic_check(&Line, &geodesic).unwrap();
        assert!(fit.ok);
        assert!((fit.a_fit - 2.0).abs() < 1e-9);
        let unit = geodesic.map(|x| x / 2.0).with_claimed(QuasiConstants::GEODESIC);
        let fit = quasigeodesic_check(&Line, &unit).unwrap();
        assert!(fit.ok && fit.a_fit == 1.0 && fit.b_fit <= 1e-12);
        let constant = SampledCurve::new(vec![0.0, 0.5, 1.0], vec![3.0; 3], QuasiConstants::new(5.0, 0.0).unwrap()).unwrap();
        let fit = quasigeodesic_check(&Line, &constant).unwrap();
        assert!(!fit.ok && fit.a_fit > 1e6);
    }

    #[test]
    fn curve_validation() {
        assert!(SampledCurve::new(vec![0.0, 0.0], vec![1.0, 2.0], QuasiConstants::GEODESIC).is_err());
        assert!(SampledCurve::new(vec![0.0, 1.0], vec![1.0], QuasiConstants::GEODESIC).is_err());
        assert!(QuasiConstants::new(0.5, 0.0).is_err());
        let s = SampledCurve::sample(&Line, |t| t * t, 0.0, 2.0, 0.1, QuasiConstants::GEODESIC).unwrap();
        assert!(s.max_chord(&Line).unwrap() <= 0.1);
        assert_eq!(*s.end(), 4.0);
    }

    fn clean_recipe(t_n: f64, step: f64) -> TriangleRecipe {
        let m = (t_n / step).round() as usize;
        let params: Vec<f64> = (0..=m).map(|k| t_n * k as f64 / m as f64).collect();
        let geo = |y: f64| SampledCurve::new(params.clone(), params.iter().map(|t| c((2.0 * t).exp(), y)).collect(), QuasiConstants::GEODESIC).unwrap();
        TriangleRecipe { z_n: c(1.0, 0.3), q: c(1.0, 0.0), t_n, gamma: geo(0.3), sigma: geo(0.0), claimed: QuasiConstants::new(2.0, 0.0).unwrap() }
    }

    #[test]
    fn theorem_triangle_is_t_n_slim_and_quasigeodesic() {
        let rhp = ModelDomain::product(ModelDomain::RightHalfPlane, ModelDomain::RightHalfPlane).unwrap();
        for t_n in [1.0, 2.0, 4.0] {
            let r = clean_recipe(t_n, 0.05);
            let tri = build_theorem_triangle(&r).unwrap();
            assert_eq!(*tri.a.end(), ComplexPoint2::new(r.z_n, *r.sigma.end()).unwrap());
            assert_eq!(tri.c.end(), tri.b.end());
            assert_eq!(tri.c.param_length(), 2.0 * t_n);
            let s = slimness(&rhp, &tri).unwrap();
            assert!((s - t_n).abs() <= 3.0 * tri.sampling_step(), "{s} vs {t_n}");
            for side in tri.sides() {
                assert!(quasigeodesic_check(&rhp, side).unwrap().ok);
            }
        }
    }

    #[test]
    fn recipe_validation() {
        let mut r = clean_recipe(1.0, 0.1);
        r.z_n = c(2.0, 0.0);
        assert!(build_theorem_triangle(&r).is_err());
        let mut r = clean_recipe(1.0, 0.1);
        r.t_n = 2.0;
        assert!(build_theorem_triangle(&r).is_err());
    }

    #[test]
    fn thin_disc_triangle() {
        let disc = crate::exact::PlanarOracle(ModelDomain::UnitDisc);
        let verts = [c(0.0, 0.0), c(0.7, 0.1), c(-0.3, 0.65)];
        let side = |p: ComplexScalar, q: ComplexScalar| {
            let m = |z: ComplexScalar| (z - p) / (c(1.0, 0.0) - p.conj() * z);
            let mi = |z: ComplexScalar| (z + p) / (c(1.0, 0.0) + p.conj() * z);
            let e = m(q);
            let len = disc_distance(p, q).unwrap();
            SampledCurve::sample(&disc, move |t| mi(ComplexScalar::from_polar(t.tanh(), e.arg())), 0.0, len, 0.02, QuasiConstants::GEODESIC).unwrap()
        };
        let tri = SampledTriangle::snapped(&disc, 1e-9, side(verts[0], verts[1]), side(verts[0], verts[2]), side(verts[1], verts[2])).unwrap();
        let s = slimness(&disc, &tri).unwrap();
        assert!(s > 0.0 && s <= 1.0, "{s}");
        assert!(SampledTriangle::new(side(verts[0], verts[1]), side(verts[1], verts[2]), side(verts[0], verts[2])).is_err());
    }

    #[test]
    fn bilipschitz_probe_on_the_disc() {
        use crate::numeric::{build_metric_graph, DiscSearchConfig, DomainHandle, LatticeChart, SamplingRegion, Stencil};
        let origin = ComplexPoint2::new(c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        let region = SamplingRegion::new(LatticeChart::Affine { origin }, [-0.95, -0.95, 0.0, 0.0], [0.95, 0.95, 0.0, 0.0], 0.05, Stencil::Product16).unwrap();
        let g = build_metric_graph(&DomainHandle::Model(ModelDomain::UnitDisc), &region, &DiscSearchConfig::linear()).unwrap();
        let p = g.node_near(&[0.0; 4]).unwrap();
        let probe = bilipschitz_constant_probe(&g, p, 0.3, 6, 1).unwrap();
        assert!(probe.constant >= 1.0 && probe.constant < 1.5, "{probe:?}");
        assert!(probe.pairs > 0);
    }

    proptest! {
        #[test]
        fn gromov_product_is_symmetric_and_bounded(a in -0.9f64..0.9, b in -0.9f64..0.9, x in -0.9f64..0.9, y in -0.9f64..0.9, o in -0.9f64..0.9, p in -0.9f64..0.9) {
            let disc = crate::exact::PlanarOracle(ModelDomain::UnitDisc);
            let (u, v, w) = (c(a, 0.0) * 0.7, c(b, x) * 0.7, c(y, o * p) * 0.7);
            let g1 = gromov_product(&disc, &u, &v, &w).unwrap();
            let g2 = gromov_product(&disc, &v, &u, &w).unwrap();
            prop_assert_eq!(g1, g2);
            prop_assert!(g1 <= disc.distance(&u, &w).unwrap().min(disc.distance(&v, &w).unwrap()) + 1e-12);
            prop_assert!(g1 >= -1e-12);
        }

        #[test]
        fn delta_grows_with_the_sample(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<(f64, f64)> = (0..12).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let small = delta_four_point(&MaxPlane, &pts[..6]).unwrap();
            let large = delta_four_point(&MaxPlane, &pts).unwrap();
            prop_assert!(small <= large);
        }

        #[test]
        fn slimness_is_bounded_by_the_vertex_diameter(ax in -2.0f64..2.0, ay in -2.0f64..2.0, bx in -2.0f64..2.0, by in -2.0f64..2.0) {
            let verts = [(0.0, 0.0), (ax, ay), (bx, by)];
            let seg = |p: (f64, f64), q: (f64, f64)| {
                let params: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
                let pts = params.iter().map(|&t| if t == 1.0 { q } else { (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)) }).collect();
                SampledCurve::new(params, pts, QuasiConstants::GEODESIC).unwrap()
            };
            let tri = SampledTriangle::new(seg(verts[0], verts[1]), seg(verts[0], verts[2]), seg(verts[1], verts[2])).unwrap();
            let s = slimness(&MaxPlane, &tri).unwrap();
            let diam = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| MaxPlane.distance(&verts[i], &verts[j]).unwrap()).fold(0.0, f64::max);
            prop_assert!(s <= diam + 1e-12);
        }
    }
}
