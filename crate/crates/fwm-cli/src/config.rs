//! Experiment configuration: a single TOML file describing the pump,
//! medium, mode subspace, detection arrangement, numerical controls and
//! sweep axes. Every field has a default; `--print-config` shows the
//! fully resolved result.

use fwm_core::{
    BeamGeometry, DetectionConfig, GridSpec, MediumGeometry, ModeIndex, PhaseMatchKernel, PumpSpec,
    QuadratureConfig, Representation, Subspace,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Documented subspace ceilings: larger spaces are legal library calls
/// but explode runtimes, so the CLI refuses them.
pub const MAX_L: u32 = 6;
pub const MAX_P: u32 = 8;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PumpModeEntry {
    pub ell: i32,
    pub q: u32,
    #[serde(default = "one")]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PumpSection {
    /// Beam waist at the focus (m).
    pub waist: f64,
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// LG composition; coefficients are normalized on load.
    pub modes: Vec<PumpModeEntry>,
}

impl Default for PumpSection {
    fn default() -> Self {
        Self {
            waist: 1.0e-3,
            wavelength: 780.0e-9,
            modes: vec![PumpModeEntry {
                ell: 0,
                q: 0,
                re: 1.0,
                im: 0.0,
            }],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MediumSection {
    /// "cell" (transversely uniform) or "cloud" (Gaussian density).
    pub kind: String,
    /// Cell length L or cloud longitudinal extent (m).
    pub length: f64,
    /// Cloud transverse radius (m); required when kind = "cloud".
    pub radius: Option<f64>,
}

impl Default for MediumSection {
    fn default() -> Self {
        Self {
            kind: "cell".into(),
            length: 0.05,
            radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SubspaceSection {
    pub l_max: u32,
    pub p_max: u32,
    /// Common charge offset of both photons' windows. Sweeps over the
    /// pumped OAM recenter automatically.
    pub center: i32,
}

impl Default for SubspaceSection {
    fn default() -> Self {
        Self {
            l_max: 2,
            p_max: 4,
            center: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionSection {
    /// Radial truncation order g of the squared-pump expansion.
    pub truncation: u32,
}

impl Default for ExpansionSection {
    fn default() -> Self {
        Self { truncation: 2 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSection {
    pub radial_nodes: usize,
    pub radial_truncation: f64,
    pub azimuthal_nodes: usize,
    pub z_nodes: usize,
    pub bessel_tol: f64,
    pub bessel_max_terms: usize,
    /// Enables the node-doubling verification of the momentum
    /// quadrature; exceeding it is a convergence failure (exit 3).
    pub convergence_tolerance: Option<f64>,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            radial_nodes: q.radial_nodes,
            radial_truncation: q.radial_truncation,
            azimuthal_nodes: q.azimuthal_nodes,
            z_nodes: q.z_nodes,
            bessel_tol: q.bessel_tol,
            bessel_max_terms: q.bessel_max_terms,
            convergence_tolerance: q.convergence_tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionSection {
    /// "pinholes_x" or "full_probe".
    pub kind: String,
    /// Detection plane (m), measured from the medium center.
    pub z: f64,
    /// Optional list of planes for multi-plane g2 maps; overrides `z`.
    pub z_planes: Vec<f64>,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            kind: "pinholes_x".into(),
            z: 0.025,
            z_planes: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    /// Half extent of the map axes (m).
    pub half_extent: f64,
    /// Samples per axis.
    pub samples: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_extent: 3.0e-3,
            samples: 128,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSection {
    /// "medium_length" | "waist" | "pump_charge" | "cloud_xi".
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Log-spaced steps when true.
    pub log: bool,
    /// "entanglement" or "distance".
    pub report: String,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: "pump_charge".into(),
            start: 0.0,
            stop: 3.0,
            steps: 4,
            log: false,
            report: "entanglement".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    /// Also emit the |Vp|^4 reference map from the g2 command.
    pub reference_map: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for OutputSection {
    fn default() -> Self {
        Self {
            reference_map: false,
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pump: PumpSection,
    pub medium: MediumSection,
    pub subspace: SubspaceSection,
    pub expansion: ExpansionSection,
    pub quadrature: QuadratureSection,
    pub detection: DetectionSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pump.waist <= 0.0 || self.pump.wavelength <= 0.0 {
            return Err(ConfigError(
                "pump waist and wavelength must be positive".into(),
            ));
        }
        if self.pump.modes.is_empty() {
            return Err(ConfigError("pump needs at least one mode".into()));
        }
        match self.medium.kind.as_str() {
            "cell" => {}
            "cloud" => {
                if self.medium.radius.is_none() {
                    return Err(ConfigError("cloud medium needs a radius".into()));
                }
            }
            other => return Err(ConfigError(format!("unknown medium kind '{other}'"))),
        }
        if self.medium.length <= 0.0 {
            return Err(ConfigError("medium length must be positive".into()));
        }
        if let Some(r) = self.medium.radius {
            if r <= 0.0 {
                return Err(ConfigError("cloud radius must be positive".into()));
            }
        }
        if self.subspace.l_max > MAX_L || self.subspace.p_max > MAX_P {
            return Err(ConfigError(format!(
                "subspace limited to l_max <= {MAX_L}, p_max <= {MAX_P}"
            )));
        }
        match self.detection.kind.as_str() {
            "pinholes_x" | "full_probe" => {}
            other => return Err(ConfigError(format!("unknown detection kind '{other}'"))),
        }
        for &z in self
            .detection
            .z_planes
            .iter()
            .chain(std::iter::once(&self.detection.z))
        {
            if z < self.medium.length / 2.0 {
                return Err(ConfigError(format!(
                    "detection plane {z} is inside the medium"
                )));
            }
        }
        if self.grid.half_extent <= 0.0 || self.grid.samples < 2 {
            return Err(ConfigError(
                "grid needs positive extent and >= 2 samples".into(),
            ));
        }
        match self.sweep.parameter.as_str() {
            "medium_length" | "waist" | "pump_charge" | "cloud_xi" => {}
            other => return Err(ConfigError(format!("unknown sweep parameter '{other}'"))),
        }
        match self.sweep.report.as_str() {
            "entanglement" | "distance" => {}
            other => return Err(ConfigError(format!("unknown sweep report '{other}'"))),
        }
        if self.sweep.steps == 0 {
            return Err(ConfigError("sweep needs at least one step".into()));
        }
        if self.sweep.log && (self.sweep.start <= 0.0 || self.sweep.stop <= 0.0) {
            return Err(ConfigError("log-spaced sweep needs positive bounds".into()));
        }
        Ok(())
    }

    pub fn beam(&self) -> Result<BeamGeometry, ConfigError> {
        BeamGeometry::new(self.pump.waist, self.pump.wavelength)
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn pump_spec(&self) -> Result<PumpSpec, ConfigError> {
        let beam = self.beam()?;
        let coeffs: Vec<(ModeIndex, Complex64)> = self
            .pump
            .modes
            .iter()
            .map(|m| (ModeIndex::new(m.ell, m.q), Complex64::new(m.re, m.im)))
            .collect();
        PumpSpec::normalized(coeffs, beam).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn medium_geometry(&self) -> MediumGeometry {
        match self.medium.kind.as_str() {
            "cloud" => MediumGeometry::ColdCloud {
                radius: self.medium.radius.unwrap_or(self.pump.waist),
                length: self.medium.length,
            },
            _ => MediumGeometry::UniformCell {
                length: self.medium.length,
            },
        }
    }

    pub fn subspace_obj(&self) -> Subspace {
        Subspace::centered(
            self.subspace.l_max,
            self.subspace.p_max,
            self.subspace.center,
        )
    }

    pub fn quadrature_config(&self) -> QuadratureConfig {
        QuadratureConfig {
            radial_nodes: self.quadrature.radial_nodes,
            radial_truncation: self.quadrature.radial_truncation,
            azimuthal_nodes: self.quadrature.azimuthal_nodes,
            z_nodes: self.quadrature.z_nodes,
            bessel_tol: self.quadrature.bessel_tol,
            bessel_max_terms: self.quadrature.bessel_max_terms,
            convergence_tolerance: self.quadrature.convergence_tolerance,
        }
    }

    pub fn kernel(&self) -> Result<PhaseMatchKernel, ConfigError> {
        PhaseMatchKernel::new(self.beam()?, self.medium_geometry())
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn detection_config(&self) -> DetectionConfig {
        match self.detection.kind.as_str() {
            "full_probe" => DetectionConfig::FullProbePointSignal {
                z: self.detection.z,
            },
            _ => DetectionConfig::PointPinholesX {
                z: self.detection.z,
            },
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            half_extent: self.grid.half_extent,
            samples: self.grid.samples,
        }
    }

    /// Detection planes for g2 maps: the list when given, else the
    /// single plane.
    pub fn g2_planes(&self) -> Vec<f64> {
        if self.detection.z_planes.is_empty() {
            vec![self.detection.z]
        } else {
            self.detection.z_planes.clone()
        }
    }

    /// Resolved config as pretty TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Resolved config as single-line JSON, for embedding in CSV
    /// headers.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Representation choice from the CLI flag.
pub fn parse_representation(s: &str) -> Result<Representation, ConfigError> {
    match s {
        "position" => Ok(Representation::Position),
        "momentum" => Ok(Representation::Momentum),
        other => Err(ConfigError(format!(
            "unknown representation '{other}' (expected position|momentum)"
        ))),
    }
}
