//! Scenario configuration, JSON with schema tag `wulff-flow/1`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::shapes::ShapeConfig;
use crate::anisotropy::{AnisoNorm, NormSpec};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::GridSpec;
use crate::stepper::{FlowParams, StopCriteria, DEFAULT_STENCIL_BOUND};
use crate::symmetry::{halfspace_family, root_system, DirectionSet, HalfSpace};

pub const SCHEMA: &str = "wulff-flow/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub norms: NormsConfig,
    pub grid: GridConfig,
    pub flow: FlowConfig,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsToggles,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Only used by randomized shape perturbations.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    pub phi: NormSpec,
    #[serde(default = "NormSpec::euclidean")]
    pub psi: NormSpec,
}

/// Either `half_width` (square grid centered at the origin) or
/// `extent = [xmin, ymin, xmax, ymax]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dx: f64,
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub extent: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub h: f64,
    /// Target area; defaults to the area of the rasterized initial set.
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_one")]
    pub snapshot_stride: usize,
    #[serde(default = "default_order")]
    pub stencil_order: usize,
    #[serde(default = "default_bound")]
    pub stencil_bound: f64,
    #[serde(default)]
    pub stop: StopConfig,
    /// Record per-step wall time in the trace; off by default so traces are reproducible.
    #[serde(default)]
    pub timing: bool,
}

fn default_max_steps() -> usize {
    100
}
fn default_one() -> usize {
    1
}
fn default_order() -> usize {
    16
}
fn default_bound() -> f64 {
    DEFAULT_STENCIL_BOUND
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_factor")]
    pub factor: f64,
}

fn yes() -> bool {
    true
}
fn default_patience() -> usize {
    StopCriteria::default().patience
}
fn default_factor() -> f64 {
    StopCriteria::default().factor
}

impl Default for StopConfig {
    fn default() -> Self {
        StopConfig { enabled: true, patience: default_patience(), factor: default_factor() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsToggles {
    #[serde(default)]
    pub alexandrov: bool,
    #[serde(default)]
    pub gauss_bonnet: bool,
    #[serde(default)]
    pub reflection: Option<ReflectionConfig>,
    /// Per-step contour diagnostics stride in the trace; 0 disables.
    #[serde(default)]
    pub step_stride: usize,
    #[serde(default)]
    pub rate_window: RateWindowConfig,
    #[serde(default)]
    pub frames: bool,
}

/// Half-space family: tight half-planes of the convex set `d` (a single point by
/// default) normal to the root system `Q_{2m}` or to explicit directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionConfig {
    #[serde(default)]
    pub root_system: Option<usize>,
    #[serde(default)]
    pub directions: Option<Vec<[f64; 2]>>,
    #[serde(default = "origin")]
    pub d: Vec<[f64; 2]>,
}

fn origin() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}

impl ReflectionConfig {
    pub fn family(&self) -> Result<Vec<HalfSpace>> {
        let dirs = match (&self.root_system, &self.directions) {
            (Some(m), None) => root_system(*m)?,
            (None, Some(d)) => DirectionSet::new(d.iter().map(|p| Vec2::new(p[0], p[1])).collect())?,
            _ => return Err(Error::config("diagnostics.reflection", "give exactly one of `root_system` or `directions`")),
        };
        halfspace_family(&self.d_polygon(), &dirs)
    }

    pub fn d_polygon(&self) -> Vec<Vec2> {
        self.d.iter().map(|p| Vec2::new(p[0], p[1])).collect()
    }
}

/// Fraction of the time range skipped as transient, and the noise floor in cells
/// (`floor_cells·Δx·L_ψ`) at which the fit window ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateWindowConfig {
    #[serde(default = "default_start")]
    pub start_fraction: f64,
    #[serde(default = "default_floor")]
    pub floor_cells: f64,
}

fn default_start() -> f64 {
    0.1
}
fn default_floor() -> f64 {
    1.0
}

impl Default for RateWindowConfig {
    fn default() -> Self {
        RateWindowConfig { start_fraction: default_start(), floor_cells: default_floor() }
    }
}

/// Everything a run needs, resolved and validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub phi: AnisoNorm,
    pub psi: AnisoNorm,
    pub spec: GridSpec,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<Resolved> {
        if self.schema != SCHEMA {
            return Err(Error::config("schema", format!("expected `{SCHEMA}`, found `{}`", self.schema)));
        }
        let phi = AnisoNorm::from_spec(&self.norms.phi).map_err(|e| Error::config("norms.phi", e.to_string()))?;
        let psi = AnisoNorm::from_spec(&self.norms.psi).map_err(|e| Error::config("norms.psi", e.to_string()))?;
        let spec = self.grid.spec()?;
        let f = &self.flow;
        if !(f.h > 0.0 && f.h.is_finite()) {
            return Err(Error::config("flow.h", "time step must be positive"));
        }
        if self.grid.dx > f.h / 4.0 {
            return Err(Error::config(
                "grid.dx",
                format!("dx = {} exceeds h/4 = {}; the lattice would pin the flow", self.grid.dx, f.h / 4.0),
            ));
        }
        if f.snapshot_stride == 0 {
            return Err(Error::config("flow.snapshot_stride", "stride must be at least 1"));
        }
        if let Some(r) = &self.diagnostics.reflection {
            r.family().map_err(|e| match e {
                Error::Config { .. } => e,
                other => Error::config("diagnostics.reflection", other.to_string()),
            })?;
        }
        Ok(Resolved { phi, psi, spec })
    }

    pub fn params(&self, r: &Resolved, m: f64) -> Result<FlowParams> {
        let f = &self.flow;
        let mut p = FlowParams::with_stencil_bound(
            r.phi.clone(),
            r.psi.clone(),
            f.h,
            m,
            self.grid.dx,
            f.stencil_order,
            f.stencil_bound,
        )?;
        p.max_steps = f.max_steps;
        p.snapshot_stride = f.snapshot_stride;
        p.diagnostics.stride = self.diagnostics.step_stride;
        p.timing = f.timing;
        Ok(p)
    }

    pub fn stop(&self) -> StopCriteria {
        let s = &self.flow.stop;
        StopCriteria { enabled: s.enabled, patience: s.patience, factor: s.factor }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| {
            let name = if self.name.is_empty() { "scenario" } else { &self.name };
            Path::new("runs").join(name)
        })
    }
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::config("grid.dx", "spacing must be positive"));
        }
        match (self.half_width, self.extent) {
            (Some(hw), None) => GridSpec::centered(hw, self.dx).map_err(|e| Error::config("grid.half_width", e.to_string())),
            (None, Some([x0, y0, x1, y1])) => {
                if !(x1 > x0 && y1 > y0) {
                    return Err(Error::config("grid.extent", "extent must be [xmin, ymin, xmax, ymax]"));
                }
                let nx = ((x1 - x0) / self.dx).round() as usize;
                let ny = ((y1 - y0) / self.dx).round() as usize;
                GridSpec::new(Vec2::new(x0, y0), self.dx, nx, ny).map_err(|e| Error::config("grid.extent", e.to_string()))
            }
            _ => Err(Error::config("grid", "give exactly one of `half_width` or `extent`")),
        }
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "wulff-flow/1",
        "norms": {"phi": {"family": "euclidean"}},
        "grid": {"dx": 0.015625, "half_width": 1.0},
        "flow": {"h": 0.0625},
        "shape": {"kind": "wulff", "area": 0.5}
    }"#;

    #[test]
    fn minimal_loads() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.flow.max_steps, 100);
        assert_eq!(c.norms.psi, NormSpec::euclidean());
        assert!(c.stop().enabled);
    }

    #[test]
    fn coupling_rejected() {
        let bad = MINIMAL.replace("\"h\": 0.0625", "\"h\": 0.03");
        let err = ScenarioConfig::from_json(&bad).unwrap_err();
        assert!(matches!(&err, Error::Config { path, message } if path == "grid.dx" && message.contains("h/4")), "{err}");
    }

    #[test]
    fn non_elliptic_rejected() {
        let bad = MINIMAL.replace(r#"{"family": "euclidean"}"#, r#"{"family": "fourier", "coeffs": [1.0, 0.0, 0.1]}"#);
        let err = ScenarioConfig::from_json(&bad).unwrap_err();
        assert!(matches!(&err, Error::Config { path, message } if path == "norms.phi" && message.contains("elliptic")), "{err}");
    }

    #[test]
    fn unknown_key_has_path() {
        let bad = MINIMAL.replace("\"h\": 0.0625", "\"h\": 0.0625, \"hh\": 1");
        let err = ScenarioConfig::from_json(&bad).unwrap_err();
        assert!(matches!(&err, Error::Config { path, .. } if path.starts_with("flow")), "{err}");
        let bad = MINIMAL.replace("wulff-flow/1", "wulff-flow/0");
        assert!(matches!(ScenarioConfig::from_json(&bad).unwrap_err(), Error::Config { path, .. } if path == "schema"));
    }
}
