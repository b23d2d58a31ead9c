//! Experiment configuration read from TOML.

use std::path::Path;

use gauge_levy::algebra::{GeneratorPath, RotationCurve, Side};
use gauge_levy::connection::{Connection, Region};
use gauge_levy::geometry::MetricChart;
use gauge_levy::transport::{random_fourier_loops, random_open_curves, Resolution, SharedCurve};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub chart: MetricChart,
    pub connection: Connection,
    pub rotation: RotationSpec,
    pub curves: CurveFamily,
    pub resolution: ResolutionSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub levy: LevySpec,
    #[serde(default)]
    pub charge: ChargeSpec,
    #[serde(default)]
    pub holonomy: HolonomySpec,
    #[serde(default)]
    pub lemma2: Lemma2Spec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub side: Side,
    pub path: GeneratorPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    FourierLoops,
    OpenCurves,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFamily {
    pub kind: CurveKind,
    pub count: usize,
    /// Basepoint of loops or start of open curves.
    pub base: [f64; 4],
    pub amplitude: f64,
    pub modes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionSpec {
    /// Integrator steps per unit time.
    pub steps: usize,
    /// Step for differences of rotation curves in the conjugation oracle.
    pub fd_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub points_per_axis: usize,
    pub half_width: f64,
    pub ratio_tolerance: f64,
    pub codifferential_tolerance: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            points_per_axis: 20,
            half_width: 2.0,
            ratio_tolerance: 1e-10,
            codifferential_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevyExpectation {
    /// Every curve must give a vanishing Laplacian.
    Vanishes,
    /// At least one curve must exceed `nonzero_tolerance`.
    Nonzero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevySpec {
    pub expect: LevyExpectation,
    pub nonzero_tolerance: f64,
    pub route_tolerance: f64,
}

impl Default for LevySpec {
    fn default() -> Self {
        Self {
            expect: LevyExpectation::Vanishes,
            nonzero_tolerance: 1e-3,
            route_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeSpec {
    pub region: Region,
    /// Relative tolerance on `S = 4π²|k|`.
    pub saturation_tolerance: f64,
    /// Distance of `k` from the nearest integer.
    pub integrality_tolerance: f64,
}

impl Default for ChargeSpec {
    fn default() -> Self {
        Self {
            region: Region::ball([0.0; 4], 1.0, 50.0),
            saturation_tolerance: 0.01,
            integrality_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolonomySource {
    /// Levi-Civita transport of the chart around the configured loops.
    Chart,
    /// Rotations about a fixed self-dual bivector with seeded angles.
    SyntheticSo2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomySpec {
    pub source: HolonomySource,
    /// Expected class ("Trivial", "SO2", "SO3"); the check passes on any
    /// successful classification when absent.
    pub expect: Option<String>,
}

impl Default for HolonomySpec {
    fn default() -> Self {
        Self {
            source: HolonomySource::Chart,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma2Spec {
    pub rs: Vec<f64>,
    /// Index of the curve in the family.
    pub curve_index: usize,
    pub min_r_squared: f64,
}

impl Default for Lemma2Spec {
    fn default() -> Self {
        Self {
            rs: vec![0.5, 0.25, 0.125, 0.0625],
            curve_index: 0,
            min_r_squared: 0.99,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.into()));
        if self.curves.count == 0 || self.curves.modes == 0 {
            return usage("curves.count and curves.modes must be positive");
        }
        if self.resolution.steps < 2 {
            return usage("resolution.steps must be at least 2");
        }
        if !(self.resolution.fd_step > 0.0 && self.resolution.fd_step < 0.1) {
            return usage("resolution.fd_step must lie in (0, 0.1)");
        }
        if self.lemma2.curve_index >= self.curves.count {
            return usage("lemma2.curve_index is outside the curve family");
        }
        if let Some(e) = &self.holonomy.expect {
            if !["Trivial", "SO2", "SO3"].contains(&e.as_str()) {
                return usage("holonomy.expect must be one of Trivial, SO2, SO3");
            }
        }
        self.connection.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.rotation_curve()?;
        Ok(())
    }

    pub fn rotation_curve(&self) -> Result<RotationCurve, CliError> {
        RotationCurve::new(self.rotation.side, self.rotation.path.clone())
            .map_err(|e| CliError::Usage(format!("rotation: {e}")))
    }

    pub fn resolution(&self) -> Resolution {
        Resolution::new(self.resolution.steps)
    }

    pub fn curves(&self) -> Vec<SharedCurve> {
        let c = &self.curves;
        match c.kind {
            CurveKind::FourierLoops => random_fourier_loops(self.seed, c.count, c.base, c.amplitude, c.modes)
                .into_iter()
                .map(|x| std::sync::Arc::new(x) as SharedCurve)
                .collect(),
            CurveKind::OpenCurves => random_open_curves(self.seed, c.count, c.base, c.amplitude, c.modes)
                .into_iter()
                .map(|x| std::sync::Arc::new(x) as SharedCurve)
                .collect(),
        }
    }

    /// SHA-256 of the canonical JSON form, after any seed override.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
