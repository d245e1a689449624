//! Metric graphs: lattice samples of a domain joined by short edges whose
//! weights are Kobayashi–Royden lengths, and shortest paths on them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{AccuracyClass, ComplexPoint2, ComplexScalar, MetricOracle, RealInterval, TangentVector2};
use crate::worm::StripCover;

use super::disc::{royden_upper, DiscSearchConfig};
use super::domain::DomainHandle;

const I: ComplexScalar = ComplexScalar::new(0.0, 1.0);

/// Real coordinates of a lattice point.
pub type ChartCoords = [f64; 4];

/// Parametrisation of the sampling lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeChart {
    /// `(z, w) = origin + (x₀ + i x₁, x₂ + i x₃)`.
    Affine { origin: ComplexPoint2 },
    /// `(z, w) = origin + (a (x₀ + i x₁), b (x₂ + i x₃))`: each plane rotated
    /// and scaled by its own complex axis.
    Framed { origin: ComplexPoint2, z_axis: ComplexScalar, w_axis: ComplexScalar },
    /// `z = exp(x₀ + i x₁)`, `w = x₂ + i x₃`; suited to annuli.
    Exponential,
    /// Normalised coordinates on a product of right half-planes:
    /// `t = i Im t₀ + Re t₀ e^{2x₀}(1 + 2i x₁)` and likewise `u` from
    /// `(x₂, x₃)`. The Kobayashi metric is the max of the Euclidean norms of
    /// the two planes along `x₁ = x₃ = 0`.
    HalfPlanePair { t0: ComplexScalar, u0: ComplexScalar },
    /// The coordinates of `HalfPlanePair` on the universal cover of the
    /// classical pre-Worm over `interval`, pushed down to ambient points.
    ClassicalCover { interval: RealInterval, t0: ComplexScalar, u0: ComplexScalar },
    /// Cone with apex `apex` through `origin`:
    /// `p = apex + e^{-x₀}((origin - apex) + |origin - apex| Σ_k x_k e_k)`
    /// with `e_k` an orthonormal frame of the real complement.
    Cone { apex: ComplexPoint2, origin: ComplexPoint2 },
}

fn to_real(p: &ComplexPoint2) -> [f64; 4] {
    [p.z().re, p.z().im, p.w().re, p.w().im]
}

fn from_real(x: [f64; 4]) -> ComplexPoint2 {
    ComplexPoint2::raw(ComplexScalar::new(x[0], x[1]), ComplexScalar::new(x[2], x[3]))
}

/// Orthonormal frame of the complement of `d` in ℝ⁴.
fn complement_frame(d: [f64; 4]) -> [[f64; 4]; 3] {
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut basis: Vec<[f64; 4]> = vec![d.map(|x| x / norm)];
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        for b in &basis {
            let dot: f64 = (0..4).map(|i| e[i] * b[i]).sum();
            for i in 0..4 {
                e[i] -= dot * b[i];
            }
        }
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 && basis.len() < 4 {
            basis.push(e.map(|x| x / n));
        }
    }
    [basis[1], basis[2], basis[3]]
}

fn normalised_half_plane(t0: ComplexScalar, x: f64, y: f64) -> ComplexScalar {
    I * t0.im + t0.re * (2.0 * x).exp() * ComplexScalar::new(1.0, 2.0 * y)
}

impl LatticeChart {
    pub fn map(&self, x: &ChartCoords) -> Option<ComplexPoint2> {
        let p = match self {
            LatticeChart::Affine { origin } => ComplexPoint2::raw(origin.z() + ComplexScalar::new(x[0], x[1]), origin.w() + ComplexScalar::new(x[2], x[3])),
            LatticeChart::Framed { origin, z_axis, w_axis } => {
                ComplexPoint2::raw(origin.z() + z_axis * ComplexScalar::new(x[0], x[1]), origin.w() + w_axis * ComplexScalar::new(x[2], x[3]))
            }
            LatticeChart::Exponential => ComplexPoint2::raw(ComplexScalar::new(x[0], x[1]).exp(), ComplexScalar::new(x[2], x[3])),
            LatticeChart::HalfPlanePair { t0, u0 } => ComplexPoint2::raw(normalised_half_plane(*t0, x[0], x[1]), normalised_half_plane(*u0, x[2], x[3])),
            LatticeChart::ClassicalCover { interval, t0, u0 } => {
                let cover = StripCover::new(*interval);
                let zeta = cover.t_to_zeta(normalised_half_plane(*t0, x[0], x[1]));
                ComplexPoint2::raw(zeta.exp(), (2.0 * I * zeta).exp() * normalised_half_plane(*u0, x[2], x[3]))
            }
            LatticeChart::Cone { apex, origin } => {
                let (a, o) = (to_real(apex), to_real(origin));
                let d = [o[0] - a[0], o[1] - a[1], o[2] - a[2], o[3] - a[3]];
                let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                let frame = complement_frame(d);
                let s = (-x[0]).exp();
                let mut out = a;
                for i in 0..4 {
                    let off = d[i] + len * (x[1] * frame[0][i] + x[2] * frame[1][i] + x[3] * frame[2][i]);
                    out[i] += s * off;
                }
                from_real(out)
            }
        };
        p.is_finite().then_some(p)
    }
}

/// Neighbourhood joined to each lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Unit steps along each axis.
    Axis,
    /// Axis steps and the diagonals `±e_i ± e_j`.
    TwoAxis,
    /// In each coordinate plane `(x₀, x₁)`, `(x₂, x₃)` the primitive steps
    /// with entries at most 2 (16 directions), and all their combinations
    /// across the two planes.
    Product16,
    /// Pairs of planar steps `(i, j)` with `|i| ≤ reach` along the first axis
    /// of each plane and `|j| ≤ 1` across it, primitive in ℝ⁴. Meant for
    /// `Framed` charts whose first axes follow the chord in each plane: the
    /// two planes can then advance at any ratio `p : q` with `p, q ≤ reach`.
    Ladder { reach: u8 },
}

impl Stencil {
    /// One representative of each `±` pair, restricted to the active axes.
    fn vectors(&self, active: [bool; 4]) -> Vec<[i64; 4]> {
        let mut out: Vec<[i64; 4]> = Vec::new();
        match self {
            Stencil::Axis => {
                for i in 0..4 {
                    let mut v = [0; 4];
                    v[i] = 1;
                    out.push(v);
                }
            }
            Stencil::TwoAxis => {
                out = Stencil::Axis.vectors([true; 4]);
                for i in 0..4 {
                    for j in i + 1..4 {
                        for s in [1, -1] {
                            let mut v = [0; 4];
                            v[i] = 1;
                            v[j] = s;
                            out.push(v);
                        }
                    }
                }
            }
            Stencil::Ladder { reach } => {
                let m = i64::from(*reach).max(1);
                let planar: Vec<(i64, i64)> = (-m..=m).flat_map(|i| (-1..=1).map(move |j| (i, j))).collect();
                for &(a, b) in &planar {
                    for &(c, d) in &planar {
                        let g = gcd(gcd(a.abs(), b.abs()), gcd(c.abs(), d.abs()));
                        if g == 1 {
                            out.push([a, b, c, d]);
                        }
                    }
                }
                out.retain(|v| v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0));
            }
            Stencil::Product16 => {
                let short = primitive_steps(2);
                let mut with_zero = vec![(0, 0)];
                with_zero.extend(&short);
                for &(a, b) in &with_zero {
                    for &(c, d) in &with_zero {
                        out.push([a, b, c, d]);
                    }
                }
                out.retain(|v| v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0));
            }
        }
        out.retain(|v| (0..4).all(|i| v[i] == 0 || active[i]));
        out
    }
}

/// Primitive integer steps in the plane with entries bounded by `m`.
fn primitive_steps(m: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            if (a, b) != (0, 0) && gcd(a.abs(), b.abs()) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Sampling box with lattice step `step`; an axis with `lo == hi` is frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRegion {
    pub chart: LatticeChart,
    pub lo: ChartCoords,
    pub hi: ChartCoords,
    pub step: f64,
    pub stencil: Stencil,
}

impl SamplingRegion {
    pub fn new(chart: LatticeChart, lo: ChartCoords, hi: ChartCoords, step: f64, stencil: Stencil) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("lattice step {step}")));
        }
        if (0..4).any(|i| !(hi[i] >= lo[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::InvalidParameter("sampling box bounds".into()));
        }
        Ok(Self { chart, lo, hi, step, stencil })
    }

    /// Box around the chord from `p` to `q` in a `Framed` chart whose first
    /// axes run along the chord in each plane, `steps` lattice units long,
    /// with `transverse` units of slack. Both endpoints are lattice nodes:
    /// `p` at the origin and `q` at `(steps, 0, steps, 0)`. A plane in which
    /// `p` and `q` agree is frozen.
    pub fn chord_frame(p: &ComplexPoint2, q: &ComplexPoint2, steps: u32, transverse: u32, stencil: Stencil) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("chord frame needs at least one step".into()));
        }
        let n = f64::from(steps);
        let slack = f64::from(transverse);
        let axis = |a: ComplexScalar, b: ComplexScalar| {
            let d = (b - a) / n;
            if d.norm() > 0.0 {
                (d, [-slack, -slack], [n + slack, slack])
            } else {
                (ComplexScalar::new(1.0, 0.0), [0.0, 0.0], [0.0, 0.0])
            }
        };
        let (z_axis, zlo, zhi) = axis(p.z(), q.z());
        let (w_axis, wlo, whi) = axis(p.w(), q.w());
        if zhi[0] == 0.0 && whi[0] == 0.0 {
            return Err(Error::InvalidParameter("chord frame between equal points".into()));
        }
        Self::new(
            LatticeChart::Framed { origin: *p, z_axis, w_axis },
            [zlo[0], zlo[1], wlo[0], wlo[1]],
            [zhi[0], zhi[1], whi[0], whi[1]],
            1.0,
            stencil,
        )
    }

    fn counts(&self) -> [usize; 4] {
        std::array::from_fn(|i| ((self.hi[i] - self.lo[i]) / self.step + 1e-9).floor() as usize + 1)
    }

    pub fn coords_of(&self, k: [usize; 4]) -> ChartCoords {
        std::array::from_fn(|i| self.lo[i] + k[i] as f64 * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    coords: Vec<ChartCoords>,
    nodes: Vec<ComplexPoint2>,
    edges: Vec<Edge>,
    resolution: f64,
    /// Longest ambient Euclidean edge; the snapping tolerance.
    max_chord: f64,
    fallback_edges: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    component: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphPath {
    pub length: f64,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Kobayashi–Royden length of the chord `a → b`, evaluated at its midpoint.
/// Returns the weight and whether the disc search fell back.
fn edge_weight(domain: &DomainHandle, a: &ComplexPoint2, b: &ComplexPoint2, mid: &ComplexPoint2, cfg: &DiscSearchConfig) -> Result<Option<(f64, bool)>> {
    if !domain.contains(mid) {
        return Ok(None);
    }
    let v = TangentVector2::new(*mid, b.z() - a.z(), b.w() - a.w())?;
    if let Some(k) = domain.exact_royden(&v) {
        return Ok(Some((k?, false)));
    }
    let up = royden_upper(domain, &v, cfg)?;
    let lo = domain.royden_lower(&v)?;
    let w = if lo.flagged() { up.value } else { 0.5 * (up.value + lo.value) };
    Ok(Some((w, up.fallback)))
}

/// Samples the lattice of `region` inside `domain` and joins stencil
/// neighbours. Edge weights are the closed-form metric where the domain has
/// one, otherwise the midpoint of the disc-search upper bound and the best
/// lower bound (the upper bound alone when no lower bound exists).
pub fn build_metric_graph(domain: &DomainHandle, region: &SamplingRegion, cfg: &DiscSearchConfig) -> Result<MetricGraph> {
    build_filtered(domain, region, cfg, |_, _| true)
}

/// As `build_metric_graph`, keeping only lattice points accepted by `keep`.
pub fn build_filtered<F>(domain: &DomainHandle, region: &SamplingRegion, cfg: &DiscSearchConfig, keep: F) -> Result<MetricGraph>
where
    F: Fn(&ChartCoords, &ComplexPoint2) -> bool + Sync,
{
    cfg.validate()?;
    let n = region.counts();
    let total = n.iter().product::<usize>();
    if total > 50_000_000 {
        return Err(Error::InvalidParameter(format!("lattice of {total} points is too large")));
    }
    let unflatten = |mut idx: usize| -> [usize; 4] {
        let mut k = [0; 4];
        for i in (0..4).rev() {
            k[i] = idx % n[i];
            idx /= n[i];
        }
        k
    };
    let sampled: Vec<Option<(ChartCoords, ComplexPoint2)>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let x = region.coords_of(unflatten(idx));
            region.chart.map(&x).filter(|p| domain.contains(p) && domain.margin(p) > 0.0 && keep(&x, p)).map(|p| (x, p))
        })
        .collect();
    let mut lattice_to_node = vec![u32::MAX; total];
    let mut coords = Vec::new();
    let mut nodes = Vec::new();
    for (idx, s) in sampled.into_iter().enumerate() {
        if let Some((x, p)) = s {
            lattice_to_node[idx] = nodes.len() as u32;
            coords.push(x);
            nodes.push(p);
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let active: [bool; 4] = std::array::from_fn(|i| n[i] > 1);
    let stencil = region.stencil.vectors(active);
    let node_lattice: Vec<[usize; 4]> = {
        let mut v = vec![[0; 4]; nodes.len()];
        for (idx, &id) in lattice_to_node.iter().enumerate() {
            if id != u32::MAX {
                v[id as usize] = unflatten(idx);
            }
        }
        v
    };
    let flatten = |k: [i64; 4]| -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..4 {
            if k[i] < 0 || k[i] as usize >= n[i] {
                return None;
            }
            idx = idx * n[i] + k[i] as usize;
        }
        Some(idx)
    };
    let per_node: Vec<Result<Vec<(Edge, bool)>>> = (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let ka = node_lattice[a];
            let mut out = Vec::new();
            for s in &stencil {
                let kb: [i64; 4] = std::array::from_fn(|i| ka[i] as i64 + s[i]);
                let Some(idx) = flatten(kb) else { continue };
                let b = lattice_to_node[idx];
                if b == u32::MAX {
                    continue;
                }
                let b = b as usize;
                let xm: ChartCoords = std::array::from_fn(|i| 0.5 * (coords[a][i] + coords[b][i]));
                let Some(mid) = region.chart.map(&xm) else { continue };
                if let Some((w, fb)) = edge_weight(domain, &nodes[a], &nodes[b], &mid, cfg)? {
                    if w > 0.0 && w.is_finite() {
                        out.push((Edge { from: a as u32, to: b as u32, weight: w }, fb));
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut edges = Vec::new();
    let mut fallback_edges = 0;
    for r in per_node {
        for (e, fb) in r? {
            fallback_edges += fb as usize;
            edges.push(e);
        }
    }
    Ok(MetricGraph::assemble(coords, nodes, edges, region.step, fallback_edges))
}

impl MetricGraph {
    fn assemble(coords: Vec<ChartCoords>, nodes: Vec<ComplexPoint2>, edges: Vec<Edge>, resolution: f64, fallback_edges: usize) -> Self {
        let n = nodes.len();
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.from as usize + 1] += 1;
            degree[e.to as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; 2 * edges.len()];
        let mut weights = vec![0.0; 2 * edges.len()];
        for e in &edges {
            for (a, b) in [(e.from as usize, e.to), (e.to as usize, e.from)] {
                targets[fill[a]] = b;
                weights[fill[a]] = e.weight;
                fill[a] += 1;
            }
        }
        let max_chord = edges.iter().map(|e| nodes[e.from as usize].euclid(&nodes[e.to as usize])).fold(0.0, f64::max);
        let mut g = Self { coords, nodes, edges, resolution, max_chord, fallback_edges, offsets, targets, weights, component: Vec::new() };
        g.component = g.label_components();
        g
    }

    fn label_components(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(a) = stack.pop() {
                for &b in &self.targets[self.offsets[a]..self.offsets[a + 1]] {
                    if label[b as usize] == usize::MAX {
                        label[b as usize] = next;
                        stack.push(b as usize);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[ComplexPoint2] {
        &self.nodes
    }

    pub fn coords(&self) -> &[ChartCoords] {
        &self.coords
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Lattice step in chart units.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn max_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    pub fn max_chord(&self) -> f64 {
        self.max_chord
    }

    /// Edges whose disc search fell back to the inscribed-disc bound.
    pub fn fallback_edges(&self) -> usize {
        self.fallback_edges
    }

    pub fn component_of(&self, node: usize) -> usize {
        self.component[node]
    }

    pub fn component_count(&self) -> usize {
        self.component.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn accuracy(&self) -> AccuracyClass {
        AccuracyClass::GraphApprox { resolution: self.resolution }
    }

    /// Nearest node in ambient Euclidean distance, within one chord.
    pub fn snap(&self, p: &ComplexPoint2) -> Result<usize> {
        let (best, d) = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, q)| (i, q.euclid(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .ok_or(Error::EmptyRegion)?;
        if d <= self.max_chord.max(1e-300) {
            Ok(best)
        } else {
            Err(Error::Snap(format!("{p:?} ({d:e} away)")))
        }
    }

    /// Node nearest to the given chart coordinates.
    pub fn node_near(&self, x: &ChartCoords) -> Result<usize> {
        let dist = |c: &ChartCoords| (0..4).map(|i| (c[i] - x[i]).powi(2)).sum::<f64>().sqrt();
        let (best, d) = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| (i, dist(c)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .ok_or(Error::EmptyRegion)?;
        if d <= self.resolution * 2.0 {
            Ok(best)
        } else {
            Err(Error::Snap(format!("chart point {x:?} ({d:e} away)")))
        }
    }

    /// Shortest-path distances from the nearest of `sources` to every node;
    /// unreachable nodes get `+∞`.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        self.dijkstra(sources, None).0
    }

    fn dijkstra(&self, sources: &[usize], target: Option<usize>) -> (Vec<f64>, Vec<u32>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            if dist[s] > 0.0 {
                dist[s] = 0.0;
                heap.push(Reverse((Key(0.0), s as u32)));
            }
        }
        while let Some(Reverse((Key(d), a))) = heap.pop() {
            let a = a as usize;
            if d > dist[a] {
                continue;
            }
            if Some(a) == target {
                break;
            }
            for k in self.offsets[a]..self.offsets[a + 1] {
                let b = self.targets[k] as usize;
                let nd = d + self.weights[k];
                if nd < dist[b] {
                    dist[b] = nd;
                    pred[b] = a as u32;
                    heap.push(Reverse((Key(nd), b as u32)));
                }
            }
        }
        (dist, pred)
    }

    /// Shortest path between two nodes.
    pub fn path_between(&self, a: usize, b: usize) -> Result<GraphPath> {
        if self.component[a] != self.component[b] {
            return Err(Error::Disconnected { from: a, to: b, component_from: self.component[a], component_to: self.component[b] });
        }
        // search from the smaller index so that the result is symmetric
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        let (dist, pred) = self.dijkstra(&[s], Some(t));
        let mut nodes = vec![t];
        let mut cur = t;
        while cur != s {
            cur = pred[cur] as usize;
            nodes.push(cur);
        }
        if s == a {
            nodes.reverse();
        }
        Ok(GraphPath { length: dist[t], nodes })
    }

    /// Subgraph induced on the nodes where `keep` is true.
    pub fn induced(&self, keep: &[bool]) -> MetricGraph {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut coords = Vec::new();
        let mut nodes = Vec::new();
        for i in 0..self.nodes.len() {
            if keep[i] {
                map[i] = nodes.len();
                coords.push(self.coords[i]);
                nodes.push(self.nodes[i]);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.from as usize] && keep[e.to as usize])
            .map(|e| Edge { from: map[e.from as usize] as u32, to: map[e.to as usize] as u32, weight: e.weight })
            .collect();
        MetricGraph::assemble(coords, nodes, edges, self.resolution, 0)
    }

    /// Writes `<stem>_nodes.csv` and `<stem>_edges.csv`.
    ///
    /// Nodes: `id,x0,x1,x2,x3,z_re,z_im,w_re,w_im,resolution` (the resolution
    /// column is repeated on every row). Edges: `from,to,weight`. Floats use
    /// the shortest representation that reads back exactly.
    pub fn export_csv(&self, dir: &Path, stem: &str) -> Result<()> {
        let mut nw = csv::Writer::from_path(dir.join(format!("{stem}_nodes.csv"))).map_err(csv_err)?;
        nw.write_record(["id", "x0", "x1", "x2", "x3", "z_re", "z_im", "w_re", "w_im", "resolution"]).map_err(csv_err)?;
        for (i, (x, p)) in self.coords.iter().zip(&self.nodes).enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(x.iter().map(|v| format!("{v:e}")));
            rec.extend([p.z().re, p.z().im, p.w().re, p.w().im, self.resolution].iter().map(|v| format!("{v:e}")));
            nw.write_record(&rec).map_err(csv_err)?;
        }
        nw.flush()?;
        let mut ew = csv::Writer::from_path(dir.join(format!("{stem}_edges.csv"))).map_err(csv_err)?;
        ew.write_record(["from", "to", "weight"]).map_err(csv_err)?;
        for e in &self.edges {
            ew.write_record([e.from.to_string(), e.to.to_string(), format!("{:e}", e.weight)]).map_err(csv_err)?;
        }
        ew.flush()?;
        Ok(())
    }

    pub fn import_csv(dir: &Path, stem: &str) -> Result<MetricGraph> {
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let mut coords = Vec::new();
        let mut nodes = Vec::new();
        let mut resolution = f64::NAN;
        let mut nr = csv::Reader::from_path(dir.join(format!("{stem}_nodes.csv"))).map_err(csv_err)?;
        for (i, rec) in nr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 10 || rec[0].parse::<usize>().ok() != Some(i) {
                return Err(Error::Parse(format!("node row {i}")));
            }
            let v: Vec<f64> = (1..10).map(|k| parse(&rec[k])).collect::<Result<_>>()?;
            coords.push([v[0], v[1], v[2], v[3]]);
            nodes.push(ComplexPoint2::new(ComplexScalar::new(v[4], v[5]), ComplexScalar::new(v[6], v[7]))?);
            resolution = v[8];
        }
        let mut edges = Vec::new();
        let mut er = csv::Reader::from_path(dir.join(format!("{stem}_edges.csv"))).map_err(csv_err)?;
        for rec in er.records() {
            let rec = rec.map_err(csv_err)?;
            let idx = |k: usize| rec[k].parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
            let (from, to, weight) = (idx(0)?, idx(1)?, parse(&rec[2])?);
            if from >= nodes.len() || to >= nodes.len() || !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::Parse(format!("edge {from}-{to}")));
            }
            edges.push(Edge { from: from as u32, to: to as u32, weight });
        }
        Ok(MetricGraph::assemble(coords, nodes, edges, resolution, 0))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Shortest-path distance between the nodes nearest to `p` and `q`.
pub fn graph_distance(g: &MetricGraph, p: &ComplexPoint2, q: &ComplexPoint2) -> Result<GraphPath> {
    let a = g.snap(p)?;
    let b = g.snap(q)?;
    g.path_between(a, b)
}

/// Graph distance as an oracle on node indices.
#[derive(Debug, Clone, Copy)]
pub struct GraphOracle<'a>(pub &'a MetricGraph);

impl MetricOracle for GraphOracle<'_> {
    type Point = usize;

    fn distance(&self, p: &usize, q: &usize) -> Result<f64> {
        Ok(self.0.path_between(*p, *q)?.length)
    }

    fn accuracy(&self) -> AccuracyClass {
        self.0.accuracy()
    }

    /// Each entry comes from the search rooted at the smaller node index, so
    /// the result is exactly symmetric.
    fn distance_rows(&self, from: &[usize], to: &[usize]) -> Result<Vec<Vec<f64>>> {
        let mut roots: Vec<usize> = from.iter().flat_map(|&p| to.iter().map(move |&q| p.min(q))).collect();
        roots.sort_unstable();
        roots.dedup();
        let tables: Vec<Vec<f64>> = roots.par_iter().map(|&r| self.0.distances_from(&[r])).collect();
        from.iter()
            .map(|&p| {
                to.iter()
                    .map(|&q| {
                        let (a, b) = (p.min(q), p.max(q));
                        let d = tables[roots.binary_search(&a).expect("root")][b];
                        if d.is_finite() {
                            Ok(d)
                        } else {
                            Err(Error::Disconnected { from: p, to: q, component_from: self.0.component[p], component_to: self.0.component[q] })
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn distance_to_set(&self, from: &[usize], set: &[usize]) -> Result<Vec<f64>> {
        let d = self.0.distances_from(set);
        Ok(from.iter().map(|&p| d[p]).collect())
    }
}

/// Graph distances from `o` to points approaching `boundary_target`
/// geometrically: the `k`-th point sits at `target + 2^{-k}(o - target)`.
/// The graph lives on a cone with apex at the target.
pub fn completeness_probe(domain: &DomainHandle, o: &ComplexPoint2, boundary_target: &ComplexPoint2, steps: usize) -> Result<Vec<f64>> {
    completeness_probe_with(domain, o, boundary_target, steps, &ProbeConfig::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    /// Lattice step along the cone axis (log-distance units) and across it.
    pub step: f64,
    /// Half-width of the cone cross-section in units of the axis length.
    pub width: f64,
    pub disc: DiscSearchConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { step: 0.1, width: 0.2, disc: DiscSearchConfig::linear() }
    }
}

pub fn completeness_probe_with(domain: &DomainHandle, o: &ComplexPoint2, boundary_target: &ComplexPoint2, steps: usize, cfg: &ProbeConfig) -> Result<Vec<f64>> {
    if !domain.contains(o) {
        return Err(Error::OutsideDomain(format!("{o:?}")));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let depth = steps as f64 * std::f64::consts::LN_2;
    let region = SamplingRegion::new(
        LatticeChart::Cone { apex: *boundary_target, origin: *o },
        [0.0, -cfg.width, -cfg.width, -cfg.width],
        [depth + 0.5 * cfg.step, cfg.width, cfg.width, cfg.width],
        cfg.step,
        Stencil::TwoAxis,
    )?;
    let g = build_metric_graph(domain, &region, &cfg.disc)?;
    let origin = g.node_near(&[0.0; 4])?;
    let d = g.distances_from(&[origin]);
    (1..=steps)
        .map(|k| {
            let node = g.node_near(&[k as f64 * std::f64::consts::LN_2, 0.0, 0.0, 0.0])?;
            if d[node].is_finite() {
                Ok(d[node])
            } else {
                Err(Error::Disconnected { from: origin, to: node, component_from: g.component[origin], component_to: g.component[node] })
            }
        })
        .collect()
}
