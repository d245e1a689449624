//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::DiscSearchConfig;
use crate::worm::WormSpec;

/// A complex number as `[re, im]`.
pub type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// JSON file with the Worm; the classical default when absent.
    #[serde(default)]
    pub worm: Option<PathBuf>,
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_seed() -> u64 {
    1
}

fn default_resolution() -> f64 {
    0.05
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    LeviAudit(LeviAuditParams),
    MetricBench(BenchParams),
    TriangleGrowth(TriangleParams),
    ScalingConvergence(ScalingParams),
    DeltaGrowth(DeltaParams),
    ProjectionAudit(ProjectionParams),
    Completeness(CompletenessParams),
    Slice(SliceParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LeviAudit(_) => "levi_audit",
            Experiment::MetricBench(_) => "metric_bench",
            Experiment::TriangleGrowth(_) => "triangle_growth",
            Experiment::ScalingConvergence(_) => "scaling_convergence",
            Experiment::DeltaGrowth(_) => "delta_growth",
            Experiment::ProjectionAudit(_) => "projection_audit",
            Experiment::Completeness(_) => "completeness",
            Experiment::Slice(_) => "slice",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeviAuditParams {
    /// Levels of `θ` across `J`, rays per level, and boundary angles per
    /// base point.
    pub levels: usize,
    pub rays: usize,
    pub phis: usize,
    pub min_samples: usize,
    /// Lowest admissible Levi eigenvalue.
    pub eigen_floor: f64,
    /// Complex-tangential curvature required on body and caps.
    pub strict_floor: f64,
    pub kernel_tol: f64,
    pub gradient_floor: f64,
    /// Bound on `|λ|` along the spine.
    pub spine_tol: f64,
    /// Replace `η` by the concave negative control.
    pub negative_control: bool,
}

impl Default for LeviAuditParams {
    fn default() -> Self {
        Self {
            levels: 64,
            rays: 12,
            phis: 16,
            min_samples: 10_000,
            eigen_floor: -1e-8,
            strict_floor: 1e-6,
            kernel_tol: 1e-10,
            gradient_floor: 1e-6,
            spine_tol: 1e-8,
            negative_control: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchParams {
    pub exact_tol: f64,
    /// Base points for the disc Royden benchmark and the expected values.
    pub royden_points: Vec<(Complex, f64)>,
    pub royden_rel_tol: f64,
    /// Random disc pairs, drawn in `|z| ≤ disc_radius`, plus `0 → 0.5`.
    pub disc_pairs: usize,
    pub disc_radius: f64,
    pub disc_rel_tol: f64,
    pub bidisc_pairs: usize,
    pub bidisc_radius: f64,
    /// Lattice steps along each chord, and transverse slack.
    pub bidisc_steps: u32,
    pub bidisc_transverse: u32,
    pub bidisc_rel_tol: f64,
    pub disc: DiscSearchConfig,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            exact_tol: 1e-9,
            royden_points: vec![([0.0, 0.0], 1.0), ([0.5, 0.0], 4.0 / 3.0)],
            royden_rel_tol: 0.02,
            disc_pairs: 10,
            disc_radius: 0.75,
            disc_rel_tol: 0.05,
            bidisc_pairs: 20,
            bidisc_radius: 0.6,
            bidisc_steps: 16,
            bidisc_transverse: 4,
            bidisc_rel_tol: 0.05,
            disc: DiscSearchConfig::default(),
        }
    }
}

/// Probe of the bilipschitz constant on the base annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantProbeParams {
    pub radius: f64,
    pub sources: usize,
}

impl Default for ConstantProbeParams {
    fn default() -> Self {
        Self { radius: 1.0, sources: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriangleParams {
    pub scales: Vec<f64>,
    pub probe: ConstantProbeParams,
    /// Trivializing radius demanded per unit of `C t_n`.
    pub radius_factor: f64,
    /// Allowed `|slim_exact - t_n|` in units of the side sampling step.
    pub slim_tol_steps: f64,
    /// `slim_graph ≥ graph_ratio · t_n` at the two largest scales.
    pub graph_ratio: f64,
    /// Scales spanning fewer lattice steps than this are inconclusive.
    pub min_steps: f64,
}

impl Default for TriangleParams {
    fn default() -> Self {
        Self { scales: vec![1.0, 2.0, 4.0], probe: ConstantProbeParams::default(), radius_factor: 16.0, slim_tol_steps: 3.0, graph_ratio: 0.5, min_steps: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingParams {
    pub n_list: Vec<f64>,
    /// Pairs in the chart coordinates of the lattice about `(t0, u0)`.
    pub pairs: Vec<[[f64; 4]; 2]>,
    /// Cover base point and fiber point of the lattice.
    pub t0: Complex,
    pub u0: Complex,
    pub half_width: f64,
    /// Residual bound in units of the combined graph resolution.
    pub residual_factor: f64,
    /// Tangent vectors `(chart point, (dz, dw))` for the metric inequalities.
    pub vectors: Vec<([f64; 4], [Complex; 2])>,
    pub edge_disc: DiscSearchConfig,
    pub metric_disc: DiscSearchConfig,
}

impl Default for ScalingParams {
    fn default() -> Self {
        let pts = [[0.0, 0.0, 0.0, 0.0], [0.15, 0.0, -0.1, 0.05], [-0.1, 0.1, 0.1, -0.05]];
        let dirs = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]], [[0.6, 0.2], [0.4, -0.3]]];
        Self {
            n_list: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            pairs: vec![
                [[-0.2, 0.0, 0.0, 0.0], [0.2, 0.0, 0.0, 0.0]],
                [[0.0, 0.0, -0.2, 0.0], [0.0, 0.0, 0.2, 0.0]],
                [[-0.2, 0.0, -0.2, 0.0], [0.2, 0.0, 0.2, 0.0]],
                [[-0.15, -0.1, 0.15, 0.0], [0.15, 0.1, -0.15, 0.0]],
                [[0.0, -0.15, -0.1, 0.1], [0.0, 0.15, 0.1, -0.1]],
            ],
            t0: [1.0, 0.0],
            u0: [0.5, 0.0],
            half_width: 0.25,
            residual_factor: 2.0,
            vectors: pts.iter().flat_map(|p| dirs.iter().map(move |d| (*p, *d))).collect(),
            edge_disc: DiscSearchConfig::linear(),
            metric_disc: DiscSearchConfig { restarts: 0, ..DiscSearchConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaParams {
    pub radii: Vec<f64>,
    /// New sample points drawn for each radius; samples are nested.
    pub per_radius: usize,
    /// Required `δ(R_last) - δ(R_first)`.
    pub gain: f64,
    pub control_radii: Vec<f64>,
    pub control_per_radius: usize,
    /// Ceiling for the disc control.
    pub control_ceiling: f64,
    pub radius_factor: f64,
}

impl Default for DeltaParams {
    fn default() -> Self {
        Self { radii: vec![1.0, 2.0, 3.0], per_radius: 20, gain: 0.5, control_radii: vec![1.0, 2.0, 3.0, 4.0, 6.0], control_per_radius: 12, control_ceiling: 1.2, radius_factor: 16.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionParams {
    pub pairs: usize,
    pub fiber_pairs: usize,
    pub product_pairs: usize,
    /// Slack in units of the resolution.
    pub tol_factor: f64,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self { pairs: 200, fiber_pairs: 10, product_pairs: 10, tol_factor: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompletenessParams {
    /// Base point over which the probes run, and its boundary angle.
    pub z: Complex,
    pub phi: f64,
    pub steps: usize,
    pub min_ratio: f64,
    /// Interior control: last increment at most this fraction of the final
    /// distance.
    pub control_increment: f64,
    /// Lattice step of the probe cone, along the axis in units of `ln` of the
    /// distance to the target and across it relative to the axis length.
    pub step: f64,
    pub width: f64,
    pub disc: DiscSearchConfig,
}

impl Default for CompletenessParams {
    fn default() -> Self {
        Self { z: [1.0, 0.0], phi: 0.0, steps: 8, min_ratio: 2.0, control_increment: 0.05, step: 0.1, width: 0.2, disc: DiscSearchConfig::linear() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceParams {
    pub z_list: Vec<Complex>,
    /// Pixel size of each SVG.
    pub size: u32,
}

impl Default for SliceParams {
    fn default() -> Self {
        let r = |theta: f64| [(0.5 * theta).exp(), 0.0];
        Self { z_list: vec![r(0.0), r(0.7), r(1.3), r(1.6), r(2.0)], size: 320 }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { worm: None, experiment, seed: default_seed(), resolution: default_resolution(), output_dir: default_output_dir() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolution {}", self.resolution)));
        }
        let increasing = |name: &str, xs: &[f64]| {
            if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) || xs.windows(2).any(|w| w[1] <= w[0]) {
                Err(Error::InvalidParameter(format!("{name} must be a nonempty increasing list of positive numbers")))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::TriangleGrowth(p) => increasing("scales", &p.scales),
            Experiment::ScalingConvergence(p) => {
                increasing("n_list", &p.n_list)?;
                if p.pairs.is_empty() {
                    return Err(Error::InvalidParameter("no pairs".into()));
                }
                Ok(())
            }
            Experiment::DeltaGrowth(p) => {
                increasing("radii", &p.radii)?;
                increasing("control_radii", &p.control_radii)
            }
            Experiment::LeviAudit(p) if p.levels < 2 || p.rays == 0 || p.phis == 0 => Err(Error::InvalidParameter("empty Levi sampling".into())),
            Experiment::Completeness(p) if p.steps < 2 => Err(Error::InvalidParameter("completeness needs at least two steps".into())),
            _ => Ok(()),
        }
    }

    /// The Worm named by the config.
    pub fn worm_spec(&self) -> Result<WormSpec> {
        match &self.worm {
            Some(path) => WormSpec::from_json(&std::fs::read_to_string(path)?),
            None => Ok(WormSpec::classical_default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": {"kind": "triangle_growth", "scales": [1, 2]}}"#).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.resolution, 0.05);
        let Experiment::TriangleGrowth(p) = &cfg.experiment else { panic!() };
        assert_eq!(p.scales, vec![1.0, 2.0]);
        assert_eq!(p.radius_factor, 16.0);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_lists() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": {"kind": "triangle_growth", "scales": [2, 1]}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": {"kind": "delta_growth", "radii": []}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": {"kind": "slice"}, "resolution": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": {"kind": "slice"}, "bogus": 1}"#).is_err());
    }
}
