//! Scenario orchestration: config in, trace/snapshots/diagnostics/fits on disk.

mod config;
mod fit;
mod frames;
mod shapes;
mod sweep;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    load_config, DiagnosticsToggles, FlowConfig, GridConfig, NormsConfig, RateWindowConfig, ReflectionConfig,
    ScenarioConfig, StopConfig, SCHEMA,
};
pub use fit::{auto_window, fit_exponential_rate, RateFit, MIN_ACCEPT_R2, MIN_FIT_POINTS};
pub use frames::{export_frames, render_frame, FrameStyle};
pub use shapes::{Perturbation, ShapeConfig};
pub use sweep::{alexandrov_sweep, SweepRow, SweepTable};

use crate::anisotropy::AnisoNorm;
use crate::contour::{alexandrov_report, extract_contours, fit_wulff_union, gauss_bonnet, AlexandrovReport, WulffFit};
use crate::error::{Error, Result};
use crate::grid::{hausdorff_sup_distance, rasterize, write_snapshot};
use crate::stepper::{digest, run_flow, FlowTrace};
use crate::symmetry::{containment_bound, monitor_reflection, ReflectionReport};

pub const RATE_SERIES: &str = "sup_dist_to_fit";

/// Per-snapshot diagnostics; failures of individual diagnostics are recorded, not raised.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub step: usize,
    pub t: f64,
    pub area: f64,
    pub alexandrov: Option<AlexandrovReport>,
    pub gauss_bonnet: Option<Vec<f64>>,
    pub reflection: Option<ReflectionReport>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub phi: AnisoNorm,
    pub psi: AnisoNorm,
    pub trace: FlowTrace,
    pub fit: Option<WulffFit>,
    pub fit_error: Option<String>,
    /// `(t, sup_{E(t) Δ E_fit} d^ψ)` over snapshots.
    pub rate_series: Vec<(f64, f64)>,
    pub rate: Option<RateFit>,
    /// Why no rate was fitted, when the fit stage got that far.
    pub rate_error: Option<String>,
    pub diagnostics: Vec<SnapshotDiagnostics>,
}

impl ScenarioRun {
    /// Largest reflection violation over all snapshots, if a family was configured.
    pub fn max_reflection_violation(&self) -> Option<f64> {
        let v: Vec<f64> = self.diagnostics.iter().filter_map(|d| d.reflection.as_ref().map(|r| r.max_violation())).collect();
        (!v.is_empty()).then(|| v.into_iter().fold(0.0, f64::max))
    }
}

struct Staged<'a> {
    stage: &'a str,
}

impl Staged<'_> {
    fn wrap<T>(&self, r: Result<T>) -> std::result::Result<T, (String, Error)> {
        r.map_err(|e| (self.stage.to_string(), e))
    }
}

/// Runs the scenario in memory.
pub fn simulate(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    simulate_staged(cfg).map_err(|(_, e)| e)
}

fn simulate_staged(cfg: &ScenarioConfig) -> std::result::Result<ScenarioRun, (String, Error)> {
    let st = Staged { stage: "config" };
    let res = st.wrap(cfg.validate())?;
    let st = Staged { stage: "initial" };
    let e0 = st.wrap(cfg.shape.build(res.spec, &res.phi, cfg.seed))?;
    if e0.is_empty() {
        return Err(("initial".into(), Error::InvalidArgument("initial set is empty on this grid".into())));
    }
    let m = cfg.flow.m.unwrap_or_else(|| e0.area());
    let params = st.wrap(cfg.params(&res, m))?;
    let st = Staged { stage: "flow" };
    let trace = st.wrap(run_flow(&e0, &params, cfg.stop()))?;

    let st = Staged { stage: "diagnostics" };
    let family = match &cfg.diagnostics.reflection {
        Some(r) => Some(st.wrap(r.family())?),
        None => None,
    };
    let reflection = match &family {
        Some(f) => st.wrap(monitor_reflection(&trace.snapshots, f))?,
        None => Vec::new(),
    };
    let mut diagnostics = Vec::with_capacity(trace.snapshots.len());
    for (k, (step, set)) in trace.snapshots.iter().enumerate() {
        let mut d = SnapshotDiagnostics {
            step: *step,
            t: *step as f64 * trace.h,
            area: set.area(),
            alexandrov: None,
            gauss_bonnet: None,
            reflection: reflection.get(k).cloned(),
            errors: Vec::new(),
        };
        if cfg.diagnostics.alexandrov {
            match alexandrov_report(set, &res.phi, m) {
                Ok(a) => d.alexandrov = Some(a),
                Err(e) => d.errors.push(format!("alexandrov: {e}")),
            }
        }
        if cfg.diagnostics.gauss_bonnet {
            match extract_contours(set).and_then(|cs| cs.iter().map(|c| gauss_bonnet(c, &res.phi)).collect::<Result<Vec<_>>>()) {
                Ok(g) => d.gauss_bonnet = Some(g),
                Err(e) => d.errors.push(format!("gauss_bonnet: {e}")),
            }
        }
        diagnostics.push(d);
    }

    let st = Staged { stage: "fit" };
    let (fit, fit_error) = match extract_contours(&trace.final_set).and_then(|cs| fit_wulff_union(&cs, &res.phi, m)) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut rate_series = Vec::new();
    let mut rate = None;
    let mut rate_error = None;
    if let Some(f) = fit.as_ref().filter(|f| f.fittable) {
        match rasterize(&f.polygons(&res.phi, 512), res.spec) {
            Err(e) => rate_error = Some(format!("fitted union does not fit the grid: {e}")),
            Ok(target) if target.is_empty() => rate_error = Some("fitted union rasterizes to nothing".into()),
            Ok(target) => {
                for (step, set) in &trace.snapshots {
                    let y = st.wrap(hausdorff_sup_distance(set, &target, &res.psi))?;
                    rate_series.push((*step as f64 * trace.h, y));
                }
                let w = &cfg.diagnostics.rate_window;
                let floor = w.floor_cells * cfg.grid.dx * res.psi.l_phi();
                match auto_window(&rate_series, w.start_fraction, floor) {
                    // never above the noise floor: already at its limit
                    None => rate = Some(RateFit::stationary(RATE_SERIES, (0.0, 0.0))),
                    Some(win) => match fit_exponential_rate(&rate_series, win) {
                        Ok(mut r) => {
                            r.series = RATE_SERIES.into();
                            rate = Some(r);
                        }
                        Err(e) => rate_error = Some(e.to_string()),
                    },
                }
            }
        }
    }
    Ok(ScenarioRun {
        config: cfg.clone(),
        phi: res.phi,
        psi: res.psi,
        trace,
        fit,
        fit_error,
        rate_series,
        rate,
        rate_error,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub name: String,
    pub status: String,
    pub failure_stage: Option<String>,
    pub error: Option<String>,
    pub initial_digest: Option<String>,
    pub final_digest: Option<String>,
    pub steps: Option<usize>,
    pub files: Vec<ManifestEntry>,
}

struct Writer {
    root: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Writer {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.files.push(ManifestEntry { path: rel.to_string(), sha256: hex(&Sha256::digest(bytes)) });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(rel, &bytes)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs the scenario and writes its artifacts under `cfg.output_dir()`. A manifest is
/// written in every case; on failure it names the stage and the error is returned.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let root = cfg.output_dir();
    std::fs::create_dir_all(&root)?;
    let mut w = Writer { root: root.clone(), files: Vec::new() };
    let outcome = simulate_staged(cfg).and_then(|run| match write_artifacts(&mut w, &run) {
        Ok(()) => Ok(run),
        Err(e) => Err(("write".into(), e)),
    });
    let mut manifest = Manifest {
        schema: SCHEMA.into(),
        name: cfg.name.clone(),
        status: "ok".into(),
        failure_stage: None,
        error: None,
        initial_digest: None,
        final_digest: None,
        steps: None,
        files: std::mem::take(&mut w.files),
    };
    match &outcome {
        Ok(run) => {
            manifest.initial_digest = Some(run.trace.initial_digest.clone());
            manifest.final_digest = Some(digest(&run.trace.final_set));
            manifest.steps = Some(run.trace.reports.len());
        }
        Err((stage, e)) => {
            manifest.status = "failed".into();
            manifest.failure_stage = Some(stage.clone());
            manifest.error = Some(e.to_string());
        }
    }
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(root.join("manifest.json"), bytes)?;
    outcome.map_err(|(_, e)| e)
}

fn write_artifacts(w: &mut Writer, run: &ScenarioRun) -> Result<()> {
    w.json("config.json", &run.config)?;
    let mut csv = Vec::new();
    run.trace.write_csv(&mut csv)?;
    w.put("trace.csv", &csv)?;
    for ((step, set), diag) in run.trace.snapshots.iter().zip(&run.diagnostics) {
        let mut bytes = Vec::new();
        write_snapshot(set, &mut bytes)?;
        w.put(&format!("snapshots/step_{step:05}.wfg"), &bytes)?;
        w.json(&format!("diagnostics/step_{step:05}.json"), diag)?;
    }
    if let Some(fit) = &run.fit {
        w.json("fit.json", fit)?;
    }
    if run.rate.is_some() || run.rate_error.is_some() {
        w.json("rate.json", &serde_json::json!({ "fit": run.rate, "error": run.rate_error, "series": run.rate_series }))?;
    }
    if run.config.diagnostics.frames {
        let mut style = FrameStyle::default();
        if let Some(fit) = &run.fit {
            style.outlines = fit.polygons(&run.phi, 256);
        }
        if let Some(r) = &run.config.diagnostics.reflection {
            style.halfspaces = r.family()?;
            style.final_overlay = vec![containment_bound(&r.d_polygon(), run.trace.m, &run.phi)?];
        }
        let dir = w.root.join("frames");
        for path in export_frames(&run.trace.snapshots, &style, &dir)? {
            let bytes = std::fs::read(&path)?;
            let rel = path.strip_prefix(&w.root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            w.files.push(ManifestEntry { path: rel, sha256: hex(&Sha256::digest(&bytes)) });
        }
    }
    Ok(())
}

/// Worker cap from `WULFF_THREADS`, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("WULFF_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs scenarios concurrently, one worker per scenario up to `workers`; results keep
/// the input order.
pub fn run_batch(cfgs: &[ScenarioConfig], workers: usize) -> Vec<Result<ScenarioRun>> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<ScenarioRun>>>> = cfgs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, cfgs.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= cfgs.len() {
                    break;
                }
                let r = run_scenario(&cfgs[k]);
                *slots[k].lock().expect("result slot poisoned") = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("result slot poisoned").expect("every scenario ran")).collect()
}
