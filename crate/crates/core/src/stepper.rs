//! Minimizing-movements engine: each step globally minimizes
//! `P̂_φ(E) + (1/h)∫_E sd^ψ_F + (1/√h)||E| − m|` by parametric min-cut.
//!
//! Energies are tracked relative to the previous set `F`, so that
//! `F_rel(E) = P̂(E) + D(E, F)/h + (1/√h)||E| − m|` with `D(E, F) = Σ_{EΔF} |sd_F| Δx²`,
//! and `F_rel(F)` is the Lyapunov value of `F`.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anisotropy::AnisoNorm;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{
    anisotropic_perimeter, perimeter_weights_with_bound, signed_distance_band, write_snapshot, BoundaryIndex,
    CroftonStencil, DistanceMode, GridSet, GridSpec, ScalarField, MARGIN,
};
use crate::maxflow::Graph;

pub const DEFAULT_STENCIL_BOUND: f64 = 0.02;

/// Which piece of the volume penalty is active at the returned minimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `|E| < m`, multiplier saturated at `+1/√h`.
    Under,
    /// `|E| > m`, multiplier saturated at `−1/√h`.
    Over,
    /// `|E| = m` within tolerance.
    Interior,
    /// The Lagrangian scan jumps over `m`; best candidate by exact energy.
    Pinned,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Under => "under",
            Branch::Over => "over",
            Branch::Interior => "interior",
            Branch::Pinned => "pinned",
        }
    }
}

/// Optional per-step contour diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Compute diagnostics every `stride` steps; 0 disables them.
    pub stride: usize,
    /// Tangent smoothing scale in cells.
    pub sigma_cells: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { stride: 0, sigma_cells: 3.0 }
    }
}

#[derive(Clone, Debug)]
pub struct FlowParams {
    pub h: f64,
    pub m: f64,
    pub phi: AnisoNorm,
    pub psi: AnisoNorm,
    pub stencil: CroftonStencil,
    /// Area tolerance of the multiplier search, at most `Δx²`.
    pub lambda_tol: f64,
    pub max_steps: usize,
    pub dx: f64,
    /// Calibrated constant of the `sup d ≤ c√h` estimate; checked with 10× headroom.
    pub linf_c: Option<f64>,
    /// Smallest narrow band half-width, in units of `Δx·L_ψ`.
    pub band_min_cells: f64,
    pub snapshot_stride: usize,
    pub diagnostics: DiagnosticsConfig,
    /// Record wall-clock time per step; off by default to keep traces reproducible.
    pub timing: bool,
}

impl FlowParams {
    pub fn new(phi: AnisoNorm, psi: AnisoNorm, h: f64, m: f64, dx: f64, order: usize) -> Result<Self> {
        Self::with_stencil_bound(phi, psi, h, m, dx, order, DEFAULT_STENCIL_BOUND)
    }

    pub fn with_stencil_bound(
        phi: AnisoNorm,
        psi: AnisoNorm,
        h: f64,
        m: f64,
        dx: f64,
        order: usize,
        bound: f64,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {h}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("target area must be positive, got {m}")));
        }
        if !(dx > 0.0) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {dx}")));
        }
        if dx > h / 4.0 {
            return Err(Error::InvalidArgument(format!(
                "grid spacing {dx} exceeds h/4 = {}; the lattice flow would pin",
                h / 4.0
            )));
        }
        phi.ellipticity_bounds()?;
        psi.ellipticity_bounds()?;
        let stencil = perimeter_weights_with_bound(&phi, order, bound)?;
        Ok(FlowParams {
            h,
            m,
            phi,
            psi,
            stencil,
            lambda_tol: dx * dx,
            max_steps: 100,
            dx,
            linf_c: None,
            band_min_cells: 6.0,
            snapshot_stride: 0,
            diagnostics: DiagnosticsConfig::default(),
            timing: false,
        })
    }

    pub fn set_lambda_tol(&mut self, tol: f64) -> Result<()> {
        if !(tol > 0.0 && tol <= self.dx * self.dx) {
            return Err(Error::InvalidArgument(format!("lambda tolerance must lie in (0, dx^2], got {tol}")));
        }
        self.lambda_tol = tol;
        Ok(())
    }

    /// Weight `1/√h` of the volume penalty.
    pub fn penalty(&self) -> f64 {
        1.0 / self.h.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub area: f64,
    pub perimeter: f64,
    pub dissipation: f64,
    pub mu: f64,
    pub branch: Branch,
    pub sup_move: f64,
    pub eps: Option<f64>,
    /// `P̂ + (1/√h)||E| − m|` after the step.
    pub lyapunov: f64,
    /// Excess of `F_rel(E_{k+1})` over the Lyapunov value of `E_k`, zero when the step is exact.
    pub slack: f64,
    pub wall_ms: f64,
    pub band: f64,
    pub solves: usize,
    /// Contour average of `κ^φ + sd_F/h`, the Euler–Lagrange multiplier estimate.
    pub el_residual: Option<f64>,
    /// `ε² h² / D`, studied for stability under h-halving.
    pub expu_ratio: Option<f64>,
    /// `max φ°(x)` over the set.
    pub wulff_radius: Option<f64>,
    /// `sup_move / √h`.
    pub linf_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub h: f64,
    pub m: f64,
    pub dx: f64,
    pub lambda_tol: f64,
    pub perimeter0: f64,
    pub lyapunov0: f64,
    pub area0: f64,
    pub reports: Vec<StepReport>,
    pub snapshots: Vec<(usize, GridSet)>,
    pub initial_digest: String,
    pub final_set: GridSet,
    pub stopped_early: bool,
}

impl FlowTrace {
    pub fn lyapunov_series(&self) -> Vec<f64> {
        std::iter::once(self.lyapunov0).chain(self.reports.iter().map(|r| r.lyapunov)).collect()
    }

    /// Fraction of steps whose area misses `m` by more than the multiplier tolerance.
    pub fn off_target_fraction(&self) -> f64 {
        if self.reports.is_empty() {
            return 0.0;
        }
        let off = self.reports.iter().filter(|r| (r.area - self.m).abs() > self.lambda_tol * (1.0 + 1e-9)).count();
        off as f64 / self.reports.len() as f64
    }

    /// `(1/h)Σ D_i` and `P̂(E_0) + (1/√h)||E_0|−m| − Lyapunov(E_k) + Σ slack`; the first
    /// must not exceed the second.
    pub fn iterated_dissipation(&self) -> (f64, f64) {
        let lhs: f64 = self.reports.iter().map(|r| r.dissipation).sum::<f64>() / self.h;
        let slack: f64 = self.reports.iter().map(|r| r.slack).sum();
        let last = self.reports.last().map_or(self.lyapunov0, |r| r.lyapunov);
        (lhs, self.lyapunov0 - last + slack)
    }

    /// Set after step `k` (0 is the initial set) if it was kept as a snapshot.
    pub fn snapshot(&self, k: usize) -> Option<&GridSet> {
        self.snapshots.iter().find(|(s, _)| *s == k).map(|(_, g)| g)
    }

    /// Writes the per-step CSV.
    pub fn write_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        writeln!(out, "step,t,area,perimeter,dissipation,mu,branch,sup_move,eps,lyapunov,wall_ms")?;
        for r in &self.reports {
            let eps = r.eps.map(|e| format!("{e:.12e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e},{},{:.12e},{:.3}",
                r.step,
                r.t,
                r.area,
                r.perimeter,
                r.dissipation,
                r.mu,
                r.branch.as_str(),
                r.sup_move,
                eps,
                r.lyapunov,
                r.wall_ms
            )?;
        }
        Ok(())
    }
}

/// Stop once consecutive sets differ by less than `factor·Δx·P̂(E_0)` for `patience` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    pub enabled: bool,
    pub patience: usize,
    pub factor: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria { enabled: true, patience: 10, factor: 1e-2 }
    }
}

impl StopCriteria {
    pub fn never() -> Self {
        StopCriteria { enabled: false, ..Default::default() }
    }
}

/// `c(x) = (sd_F(x)/h + μ)·Δx²`, the cost of including cell `x`.
pub fn unary_costs(f: &GridSet, psi: &AnisoNorm, h: f64, mu: f64) -> Result<ScalarField> {
    let sd = crate::grid::signed_distance_field(f, psi, DistanceMode::Exact)?;
    let a = f.spec().cell_area();
    let values = sd.values.iter().map(|&d| (d / h + mu) * a).collect();
    Ok(ScalarField { spec: sd.spec, values })
}

/// Global minimizer of `P̂(E) + Σ_{x∈E} c(x)` over sets avoiding the margin; the minimal
/// one when several exist.
pub fn min_cut_solve(unary: &ScalarField, stencil: &CroftonStencil) -> Result<GridSet> {
    let spec = unary.spec;
    let state: Vec<u8> = (0..spec.len())
        .map(|k| {
            let (i, j) = spec.coords(k);
            if spec.in_margin(i, j) {
                OUT
            } else {
                NODE
            }
        })
        .collect();
    let mask = cut(&spec, stencil, &state, |k| unary.values[k])?;
    GridSet::from_mask(spec, mask)
}

/// `𝒟^ψ(E, F) = Σ_{EΔF} d^ψ_F Δx²` with exact distances.
pub fn dissipation(e: &GridSet, f: &GridSet, psi: &AnisoNorm) -> Result<f64> {
    let diff = e.sym_difference(f)?;
    if diff.is_empty() {
        return Ok(0.0);
    }
    let index = BoundaryIndex::new(f)?;
    let spec = *f.spec();
    let mut acc = 0.0;
    for (k, &b) in diff.mask().iter().enumerate() {
        if b {
            acc += index.distance(psi, spec.center_of(k), f64::INFINITY);
        }
    }
    Ok(acc * spec.cell_area())
}

const OUT: u8 = 0;
const IN: u8 = 1;
const NODE: u8 = 2;

/// Min-cut over the `NODE` cells with `IN`/`OUT` cells fixed; cells beyond the grid are `OUT`.
fn cut(spec: &GridSpec, stencil: &CroftonStencil, state: &[u8], unary: impl Fn(usize) -> f64) -> Result<Vec<bool>> {
    let mut node_of = vec![u32::MAX; spec.len()];
    let mut nodes: Vec<usize> = Vec::new();
    for (k, &s) in state.iter().enumerate() {
        if s == NODE {
            node_of[k] = nodes.len() as u32;
            nodes.push(k);
        }
    }
    let active: Vec<((i32, i32), f64)> = stencil.active().collect();
    let mut g = Graph::new(nodes.len(), nodes.len() * active.len());
    let (nx, ny) = (spec.nx as isize, spec.ny as isize);
    let dx = spec.dx;
    for (n, &k) in nodes.iter().enumerate() {
        let c = unary(k);
        let (mut src, mut snk) = if c > 0.0 { (0.0, c) } else { (-c, 0.0) };
        let (i, j) = spec.coords(k);
        let (i, j) = (i as isize, j as isize);
        for &((ex, ey), w) in &active {
            let cap = w * dx;
            for sgn in [1isize, -1] {
                let (p, q) = (i + sgn * ex as isize, j + sgn * ey as isize);
                let st = if p < 0 || q < 0 || p >= nx || q >= ny { OUT } else { state[spec.index(p as usize, q as usize)] };
                match st {
                    IN => src += cap,
                    OUT => snk += cap,
                    _ => {
                        if sgn == 1 {
                            let m = node_of[spec.index(p as usize, q as usize)] as usize;
                            g.add_edge(n, m, cap, cap);
                        }
                    }
                }
            }
        }
        g.add_tweights(n, src, snk);
    }
    g.maxflow()?;
    let mut mask: Vec<bool> = state.iter().map(|&s| s == IN).collect();
    for (n, &k) in nodes.iter().enumerate() {
        if g.in_source_set(n) {
            mask[k] = true;
        }
    }
    Ok(mask)
}

/// Per-step context: the previous set, its banded distance field and the free cells.
struct Ctx<'a> {
    f: &'a GridSet,
    params: &'a FlowParams,
    sd: ScalarField,
    free: Vec<bool>,
    free_list: Vec<usize>,
    active: Vec<((i32, i32), f64)>,
    area_f: f64,
}

/// A candidate minimizer with its energy pieces relative to `F`.
#[derive(Clone)]
struct Cand {
    mask: Vec<bool>,
    area: f64,
    /// `P̂(E) − P̂(F)`.
    dper: f64,
    /// `D(E, F)`.
    diss: f64,
}

impl Cand {
    /// `P̂(E) − P̂(F) + D/h`, the μ-independent part of the Lagrangian.
    fn value(&self, h: f64) -> f64 {
        self.dper + self.diss / h
    }
}

impl<'a> Ctx<'a> {
    fn new(f: &'a GridSet, params: &'a FlowParams, band: f64) -> Result<Self> {
        let l = params.psi.l_phi();
        let sd = signed_distance_band(f, &params.psi, band + 4.0 * params.dx * l)?;
        let spec = *f.spec();
        let mut free = vec![false; spec.len()];
        let mut free_list = Vec::new();
        for k in 0..spec.len() {
            let (i, j) = spec.coords(k);
            if !spec.in_margin(i, j) && sd.values[k].abs() <= band {
                free[k] = true;
                free_list.push(k);
            }
        }
        Ok(Ctx {
            f,
            params,
            sd,
            free,
            free_list,
            active: params.stencil.active().collect(),
            area_f: f.area(),
        })
    }

    fn spec(&self) -> &GridSpec {
        self.f.spec()
    }

    /// Minimal minimizer of the Lagrangian at `mu`, with `lower ⊆ E ⊆ upper`.
    fn solve(&self, mu: f64, lower: Option<&[bool]>, upper: Option<&[bool]>) -> Result<Cand> {
        let spec = *self.spec();
        let fmask = self.f.mask();
        let state: Vec<u8> = (0..spec.len())
            .map(|k| {
                if !self.free[k] {
                    if fmask[k] {
                        IN
                    } else {
                        OUT
                    }
                } else if lower.is_some_and(|l| l[k]) {
                    IN
                } else if upper.is_some_and(|u| !u[k]) {
                    OUT
                } else {
                    NODE
                }
            })
            .collect();
        let a = spec.cell_area();
        let h = self.params.h;
        let mask = cut(&spec, &self.params.stencil, &state, |k| (self.sd.values[k] / h + mu) * a)?;
        Ok(self.evaluate(mask))
    }

    fn evaluate(&self, mask: Vec<bool>) -> Cand {
        let spec = *self.spec();
        let fmask = self.f.mask();
        let a = spec.cell_area();
        let mut diss = 0.0;
        let mut count = 0isize;
        let mut dper = 0.0;
        let (nx, ny) = (spec.nx as isize, spec.ny as isize);
        let get = |m: &[bool], p: isize, q: isize| -> bool {
            if p < 0 || q < 0 || p >= nx || q >= ny {
                false
            } else {
                m[spec.index(p as usize, q as usize)]
            }
        };
        for &k in &self.free_list {
            if mask[k] == fmask[k] {
                continue;
            }
            diss += self.sd.values[k].abs();
            count += if mask[k] { 1 } else { -1 };
            let (i, j) = spec.coords(k);
            let (i, j) = (i as isize, j as isize);
            for &((ex, ey), w) in &self.active {
                for sgn in [1isize, -1] {
                    let (p, q) = (i + sgn * ex as isize, j + sgn * ey as isize);
                    let (en, fn_) = (get(&mask, p, q), get(fmask, p, q));
                    // a pair with both ends changed is counted from its lower index only
                    if en != fn_ && spec.index(p as usize, q as usize) < k {
                        continue;
                    }
                    let now = (mask[k] != en) as i32;
                    let before = (fmask[k] != fn_) as i32;
                    dper += w * (now - before) as f64;
                }
            }
        }
        Cand { mask, area: self.area_f + count as f64 * a, dper: dper * spec.dx, diss: diss * a }
    }

    fn f_rel(&self, c: &Cand, per_f: f64) -> f64 {
        per_f + c.dper + c.diss / self.params.h + self.params.penalty() * (c.area - self.params.m).abs()
    }

    fn candidate_f(&self) -> Cand {
        Cand { mask: self.f.mask().to_vec(), area: self.area_f, dper: 0.0, diss: 0.0 }
    }
}

struct SearchResult {
    cand: Cand,
    mu: f64,
    branch: Branch,
    solves: usize,
}

/// Parametric search over the multiplier `μ ∈ [−1/√h, 1/√h]`, started at `hint`.
///
/// Minimal minimizers are nested (`μ₁ ≤ μ₂` gives `E(μ₂) ⊆ E(μ₁)`), so every solve after
/// the first is contracted to the cells between the current bracket sets.
fn search(ctx: &Ctx, per_f: f64, hint: Option<f64>) -> Result<SearchResult> {
    let p = ctx.params.penalty();
    let m = ctx.params.m;
    let tol = ctx.params.lambda_tol;
    let h = ctx.params.h;
    let mu0 = hint.unwrap_or(-p).clamp(-p, p);
    let first = ctx.solve(mu0, None, None)?;
    let mut solves = 1;
    if (first.area - m).abs() <= tol {
        return Ok(SearchResult { cand: first, mu: mu0, branch: Branch::Interior, solves });
    }
    let mut step = 0.02 * p;
    let (mut lo, mut mu_lo, mut hi, mut mu_hi);
    if first.area > m {
        (lo, mu_lo) = (first, mu0);
        loop {
            if mu_lo >= p {
                return Ok(SearchResult { cand: lo, mu: p, branch: Branch::Over, solves });
            }
            let mu = (mu_lo + step).min(p);
            let c = ctx.solve(mu, None, Some(&lo.mask))?;
            solves += 1;
            if (c.area - m).abs() <= tol {
                return Ok(SearchResult { cand: c, mu, branch: Branch::Interior, solves });
            }
            if c.area > m {
                (lo, mu_lo) = (c, mu);
                step *= 4.0;
            } else {
                (hi, mu_hi) = (c, mu);
                break;
            }
        }
    } else {
        (hi, mu_hi) = (first, mu0);
        loop {
            if mu_hi <= -p {
                return Ok(SearchResult { cand: hi, mu: -p, branch: Branch::Under, solves });
            }
            let mu = (mu_hi - step).max(-p);
            let c = ctx.solve(mu, Some(&hi.mask), None)?;
            solves += 1;
            if (c.area - m).abs() <= tol {
                return Ok(SearchResult { cand: c, mu, branch: Branch::Interior, solves });
            }
            if c.area < m {
                (hi, mu_hi) = (c, mu);
                step *= 4.0;
            } else {
                (lo, mu_lo) = (c, mu);
                break;
            }
        }
    }
    for _ in 0..200 {
        let mut mu_c = (hi.value(h) - lo.value(h)) / (lo.area - hi.area);
        let intersect = mu_c > mu_lo && mu_c < mu_hi;
        if !intersect {
            mu_c = 0.5 * (mu_lo + mu_hi);
        }
        let c = ctx.solve(mu_c, Some(&hi.mask), Some(&lo.mask))?;
        solves += 1;
        assert!(
            c.area <= lo.area + 1e-12 && c.area >= hi.area - 1e-12,
            "area must be non-increasing in the multiplier"
        );
        if (c.area - m).abs() <= tol {
            return Ok(SearchResult { cand: c, mu: mu_c, branch: Branch::Interior, solves });
        }
        let same_hi = c.area == hi.area;
        let same_lo = c.area == lo.area;
        if (same_hi || same_lo) && intersect {
            return resolve_breakpoint(ctx, per_f, lo, hi, mu_c, solves);
        }
        if same_hi || c.area < m {
            hi = c;
            mu_hi = mu_c;
        } else {
            lo = c;
            mu_lo = mu_c;
        }
        if mu_hi - mu_lo <= 1e-13 * p {
            break;
        }
    }
    let mu_c = 0.5 * (mu_lo + mu_hi);
    resolve_breakpoint(ctx, per_f, lo, hi, mu_c, solves)
}

/// At a breakpoint both `E_hi ⊆ E_lo` minimize the Lagrangian. The cells of `E_lo ∖ E_hi`
/// split into clusters without mutual stencil interaction; tied clusters can be added
/// independently, so a subset-sum over their sizes gets as close to `m` as the lattice allows.
fn resolve_breakpoint(ctx: &Ctx, per_f: f64, lo: Cand, hi: Cand, mu: f64, solves: usize) -> Result<SearchResult> {
    let spec = *ctx.spec();
    let h = ctx.params.h;
    let a = spec.cell_area();
    let diff: Vec<usize> = ctx.free_list.iter().copied().filter(|&k| lo.mask[k] && !hi.mask[k]).collect();
    let clusters = cluster_cells(&spec, &diff, &ctx.active);

    let mut base = hi.mask.clone();
    let mut tied: Vec<&Vec<usize>> = Vec::new();
    for cl in &clusters {
        let mut with = hi.mask.clone();
        for &k in cl {
            with[k] = true;
        }
        // the Lagrangian change of adding this cluster alone
        let delta = local_lagrangian_delta(ctx, &hi.mask, &with, cl, mu);
        let scale: f64 = cl.iter().map(|&k| (ctx.sd.values[k].abs() / h + mu.abs()) * a).sum::<f64>()
            + cl.len() as f64 * spec.dx * ctx.active.iter().map(|x| x.1).sum::<f64>();
        if delta.abs() <= 1e-9 * scale.max(1e-300) {
            tied.push(cl);
        } else if delta < 0.0 {
            for &k in cl {
                base[k] = true;
            }
        }
    }
    let base_count = base.iter().filter(|&&b| b).count() as isize;
    let target = ((ctx.params.m / a).round() as isize - base_count).max(0) as usize;

    let mut cands: Vec<Cand> = Vec::new();
    if !tied.is_empty() {
        let sizes: Vec<usize> = tied.iter().map(|c| c.len()).collect();
        for pick in subset_sum_bracket(&sizes, target) {
            let mut mask = base.clone();
            for (idx, cl) in tied.iter().enumerate() {
                if pick[idx] {
                    for &k in cl.iter() {
                        mask[k] = true;
                    }
                }
            }
            cands.push(ctx.evaluate(mask));
        }
    }
    let mut solves = solves;
    cands.extend(partial_layers(ctx, &hi, &diff, mu, &mut solves)?);
    let base_c = ctx.evaluate(base);
    cands.push(base_c);
    cands.push(hi);
    cands.push(lo);
    cands.push(ctx.candidate_f());
    let mut best = 0;
    let mut best_e = f64::INFINITY;
    for (i, c) in cands.iter().enumerate() {
        let e = ctx.f_rel(c, per_f);
        if e < best_e {
            best_e = e;
            best = i;
        }
    }
    let cand = descend(ctx, cands.swap_remove(best));
    let branch = if (cand.area - ctx.params.m).abs() <= ctx.params.lambda_tol { Branch::Interior } else { Branch::Pinned };
    Ok(SearchResult { cand, mu, branch, solves })
}

/// Candidates between `E_hi` and `E_lo` that keep the cells of `D = E_lo ∖ E_hi` far from
/// the centroid of `D` along a lattice axis, for a cutoff bisected toward the target area.
/// Caps are taken at both ends so that symmetric sets do not drift.
fn partial_layers(ctx: &Ctx, hi: &Cand, diff: &[usize], mu: f64, solves: &mut usize) -> Result<Vec<Cand>> {
    let spec = *ctx.spec();
    let mut out = Vec::new();
    if diff.len() < 2 {
        return Ok(out);
    }
    let m = ctx.params.m;
    let c = diff.iter().fold(Vec2::ZERO, |acc, &k| acc + spec.center_of(k)) * (1.0 / diff.len() as f64);
    let mut upper = hi.mask.clone();
    for &k in diff {
        upper[k] = true;
    }
    for e in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)] {
        let t: Vec<f64> = diff.iter().map(|&k| (spec.center_of(k) - c).dot(e).abs()).collect();
        let top = t.iter().cloned().fold(0.0, f64::max) + 4.0 * spec.dx;
        // cells within `window` of the cutoff stay free so the cut can shape the ends
        let window = 3.0 * spec.dx;
        let solve_at = |s: f64| -> Result<Cand> {
            let mut lower = hi.mask.clone();
            let mut up = upper.clone();
            for (&k, &tk) in diff.iter().zip(&t) {
                if tk >= s + window {
                    lower[k] = true;
                } else if tk < s - window {
                    up[k] = false;
                }
            }
            ctx.solve(mu, Some(&lower), Some(&up))
        };
        // area decreases as the cutoff grows
        let (mut s_lo, mut s_hi) = (-4.0 * spec.dx, top);
        let mut below: Option<Cand> = None;
        let mut above: Option<Cand> = None;
        for _ in 0..24 {
            let s = 0.5 * (s_lo + s_hi);
            let cand = solve_at(s)?;
            *solves += 1;
            if cand.area >= m {
                s_lo = s;
                above = Some(cand);
            } else {
                s_hi = s;
                below = Some(cand);
            }
            if s_hi - s_lo < 0.25 * spec.dx {
                break;
            }
        }
        out.extend(below);
        out.extend(above);
    }
    Ok(out)
}

/// Steepest descent of the exact step energy by single-cell flips along the boundary of
/// the candidate. The Lagrangian scan moves whole lattice layers at once; flips of
/// individual kink cells recover areas in between.
fn descend(ctx: &Ctx, mut c: Cand) -> Cand {
    let spec = *ctx.spec();
    let (nx, ny) = (spec.nx as isize, spec.ny as isize);
    let a = spec.cell_area();
    let (h, p, m) = (ctx.params.h, ctx.params.penalty(), ctx.params.m);
    let fmask = ctx.f.mask();
    let limit = 4 * ctx.free_list.len() + 16;
    for _ in 0..limit {
        let mut best: Option<(f64, usize, f64, f64)> = None;
        for &k in &ctx.free_list {
            let (i, j) = spec.coords(k);
            let (i, j) = (i as isize, j as isize);
            let here = c.mask[k];
            let on_boundary = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(di, dj)| {
                let (p, q) = (i + di, j + dj);
                let there = p >= 0 && q >= 0 && p < nx && q < ny && c.mask[spec.index(p as usize, q as usize)];
                there != here
            });
            if !on_boundary {
                continue;
            }
            let mut dpairs = 0.0;
            for &((ex, ey), w) in &ctx.active {
                for sgn in [1isize, -1] {
                    let (p, q) = (i + sgn * ex as isize, j + sgn * ey as isize);
                    let there = p >= 0 && q >= 0 && p < nx && q < ny && c.mask[spec.index(p as usize, q as usize)];
                    dpairs += if there != here { -w } else { w };
                }
            }
            let dper = dpairs * spec.dx;
            let ddiss = if !here != fmask[k] { ctx.sd.values[k].abs() * a } else { -ctx.sd.values[k].abs() * a };
            let new_area = c.area + if here { -a } else { a };
            let delta = dper + ddiss / h + p * ((new_area - m).abs() - (c.area - m).abs());
            if delta < -1e-14 * (1.0 + c.dper.abs()) && best.is_none_or(|b| delta < b.0) {
                best = Some((delta, k, dper, ddiss));
            }
        }
        match best {
            Some((_, k, dper, ddiss)) => {
                c.area += if c.mask[k] { -a } else { a };
                c.mask[k] = !c.mask[k];
                c.dper += dper;
                c.diss += ddiss;
            }
            None => break,
        }
    }
    c
}

fn local_lagrangian_delta(ctx: &Ctx, before: &[bool], after: &[bool], cells: &[usize], mu: f64) -> f64 {
    let spec = *ctx.spec();
    let (nx, ny) = (spec.nx as isize, spec.ny as isize);
    let get = |m: &[bool], p: isize, q: isize| -> bool {
        if p < 0 || q < 0 || p >= nx || q >= ny {
            false
        } else {
            m[spec.index(p as usize, q as usize)]
        }
    };
    let mut dper = 0.0;
    let mut unary = 0.0;
    for &k in cells {
        unary += ctx.sd.values[k] / ctx.params.h + mu;
        let (i, j) = spec.coords(k);
        let (i, j) = (i as isize, j as isize);
        for &((ex, ey), w) in &ctx.active {
            for sgn in [1isize, -1] {
                let (p, q) = (i + sgn * ex as isize, j + sgn * ey as isize);
                let (an, bn) = (get(after, p, q), get(before, p, q));
                if an != bn && spec.index(p as usize, q as usize) < k {
                    continue;
                }
                dper += w * (((after[k] != an) as i32) - ((before[k] != bn) as i32)) as f64;
            }
        }
    }
    dper * spec.dx + unary * spec.cell_area()
}

/// Connected components of `cells` under stencil adjacency.
fn cluster_cells(spec: &GridSpec, cells: &[usize], active: &[((i32, i32), f64)]) -> Vec<Vec<usize>> {
    let mut slot = std::collections::HashMap::with_capacity(cells.len());
    for (n, &k) in cells.iter().enumerate() {
        slot.insert(k, n);
    }
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let (nx, ny) = (spec.nx as isize, spec.ny as isize);
    for (n, &k) in cells.iter().enumerate() {
        let (i, j) = spec.coords(k);
        for &((ex, ey), _) in active {
            let (p, q) = (i as isize + ex as isize, j as isize + ey as isize);
            if p < 0 || q < 0 || p >= nx || q >= ny {
                continue;
            }
            if let Some(&m) = slot.get(&spec.index(p as usize, q as usize)) {
                let (a, b) = (find(&mut parent, n), find(&mut parent, m));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for n in 0..cells.len() {
        let r = find(&mut parent, n);
        groups.entry(r).or_default().push(cells[n]);
    }
    groups.into_values().collect()
}

/// Subsets of `sizes` whose sums are the largest `≤ target` and the smallest `≥ target`.
fn subset_sum_bracket(sizes: &[usize], target: usize) -> Vec<Vec<bool>> {
    let total: usize = sizes.iter().sum();
    let words = total / 64 + 1;
    // reach[i] = sums reachable with the first i items
    let mut reach: Vec<Vec<u64>> = Vec::with_capacity(sizes.len() + 1);
    let mut cur = vec![0u64; words];
    cur[0] = 1;
    reach.push(cur.clone());
    for &s in sizes {
        let mut next = cur.clone();
        let (ws, bs) = (s / 64, s % 64);
        for w in (0..words).rev() {
            let mut v = 0u64;
            if w >= ws {
                v |= cur[w - ws] << bs;
                if bs > 0 && w > ws {
                    v |= cur[w - ws - 1] >> (64 - bs);
                }
            }
            next[w] |= v;
        }
        cur = next;
        reach.push(cur.clone());
    }
    let has = |row: &[u64], v: usize| row[v / 64] >> (v % 64) & 1 == 1;
    let last = &reach[sizes.len()];
    let mut sums = Vec::new();
    if let Some(v) = (0..=target.min(total)).rev().find(|&v| has(last, v)) {
        sums.push(v);
    }
    if let Some(v) = (target..=total).find(|&v| has(last, v)) {
        if !sums.contains(&v) {
            sums.push(v);
        }
    }
    sums.into_iter()
        .map(|mut v| {
            let mut pick = vec![false; sizes.len()];
            for i in (0..sizes.len()).rev() {
                if has(&reach[i], v) {
                    continue;
                }
                pick[i] = true;
                v -= sizes[i];
            }
            pick
        })
        .collect()
}

/// Narrow-band and bookkeeping state carried between steps.
#[derive(Clone, Debug, Default)]
pub struct StepState {
    pub prev_sup: Option<f64>,
    pub prev_mu: Option<f64>,
    pub perimeter: Option<f64>,
}

/// One minimizing-movement step from `f`.
pub fn step(f: &GridSet, params: &FlowParams, state: &mut StepState) -> Result<(GridSet, StepReport)> {
    let started = Instant::now();
    let spec = *f.spec();
    let dx = spec.dx;
    let l = params.psi.l_phi();
    let per_f = match state.perimeter {
        Some(p) => p,
        None => anisotropic_perimeter(f, &params.stencil),
    };
    let lyap_f = per_f + params.penalty() * (f.area() - params.m).abs();
    let diameter = dx * (spec.nx + spec.ny) as f64 * params.psi.data().gamma_max;
    let b_min = params.band_min_cells * dx * l;
    let mut band = match state.prev_sup {
        Some(s) => b_min.max(2.0 * s + 4.0 * dx * l),
        None => b_min.max(0.5 * params.h.sqrt() * l),
    };
    let mut solves = 0;
    // first step: the multiplier of a Wulff shape, −κ^φ = −P_φ/(2|F|)
    let mut hint = state.prev_mu.or_else(|| (f.area() > 0.0).then(|| -per_f / (2.0 * f.area())));
    let (res, ctx) = loop {
        let ctx = Ctx::new(f, params, band)?;
        let res = search(&ctx, per_f, hint)?;
        solves += res.solves;
        let sup = sup_move(&ctx, &res.cand.mask);
        if sup >= band - 2.0 * dx * l && band < diameter {
            band *= 2.0;
            hint = Some(res.mu);
            continue;
        }
        break (res, ctx);
    };
    let sup = sup_move(&ctx, &res.cand.mask);
    for &k in &ctx.free_list {
        let (i, j) = spec.coords(k);
        let ring = i == MARGIN || j == MARGIN || i == spec.nx - 1 - MARGIN || j == spec.ny - 1 - MARGIN;
        if ring && res.cand.mask[k] && !f.mask()[k] {
            return Err(Error::DomainTooSmall(format!("the flow reached cell ({i}, {j}) next to the grid margin")));
        }
    }
    let f_rel = ctx.f_rel(&res.cand, per_f);
    let perimeter = per_f + res.cand.dper;
    let lyapunov = perimeter + params.penalty() * (res.cand.area - params.m).abs();
    let slack = (f_rel - lyap_f).max(0.0);
    let linf_ratio = sup / params.h.sqrt();
    if let Some(c) = params.linf_c {
        if linf_ratio > 10.0 * c {
            log::warn!("L-infinity estimate exceeded: sup move / sqrt(h) = {linf_ratio:.4} > 10 x {c:.4}");
        }
    }
    let report = StepReport {
        step: 0,
        t: 0.0,
        area: res.cand.area,
        perimeter,
        dissipation: res.cand.diss,
        mu: res.mu,
        branch: res.branch,
        sup_move: sup,
        eps: None,
        lyapunov,
        slack,
        wall_ms: if params.timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        band,
        solves,
        el_residual: None,
        expu_ratio: None,
        wulff_radius: None,
        linf_ratio,
    };
    state.prev_sup = Some(sup);
    state.prev_mu = Some(res.mu);
    state.perimeter = Some(perimeter);
    let next = GridSet::from_mask(spec, res.cand.mask)?;
    Ok((next, report))
}

fn sup_move(ctx: &Ctx, mask: &[bool]) -> f64 {
    let fmask = ctx.f.mask();
    ctx.free_list
        .iter()
        .filter(|&&k| mask[k] != fmask[k])
        .map(|&k| ctx.sd.values[k].abs())
        .fold(0.0, f64::max)
}

/// SHA-256 of the snapshot encoding, hex.
pub fn digest(set: &GridSet) -> String {
    let mut buf = Vec::new();
    write_snapshot(set, &mut buf).expect("writing to memory cannot fail");
    let d = Sha256::digest(&buf);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_flow(e0: &GridSet, params: &FlowParams, stop: StopCriteria) -> Result<FlowTrace> {
    run_flow_with(e0, params, stop, |_, _| Ok(()))
}

/// Runs the flow, calling `observer(k, E_k)` for the initial set and after every step.
pub fn run_flow_with(
    e0: &GridSet,
    params: &FlowParams,
    stop: StopCriteria,
    mut observer: impl FnMut(usize, &GridSet) -> Result<()>,
) -> Result<FlowTrace> {
    let a0 = e0.area();
    if (a0 - params.m).abs() > 0.1 * params.m {
        log::warn!("initial area {a0:.6} is more than 10% away from the target {:.6}", params.m);
    }
    let perimeter0 = anisotropic_perimeter(e0, &params.stencil);
    let lyapunov0 = perimeter0 + params.penalty() * (a0 - params.m).abs();
    let threshold = stop.factor * params.dx * perimeter0;
    let mut trace = FlowTrace {
        h: params.h,
        m: params.m,
        dx: params.dx,
        lambda_tol: params.lambda_tol,
        perimeter0,
        lyapunov0,
        area0: a0,
        reports: Vec::new(),
        snapshots: Vec::new(),
        initial_digest: digest(e0),
        final_set: e0.clone(),
        stopped_early: false,
    };
    if params.snapshot_stride > 0 {
        trace.snapshots.push((0, e0.clone()));
    }
    observer(0, e0)?;
    let mut state = StepState { prev_sup: None, prev_mu: None, perimeter: Some(perimeter0) };
    let mut cur = e0.clone();
    let mut quiet = 0usize;
    for k in 1..=params.max_steps {
        let (next, mut report) = step(&cur, params, &mut state)?;
        if next.is_empty() {
            return Err(Error::Vanished { step: k });
        }
        report.step = k;
        report.t = k as f64 * params.h;
        let diag = params.diagnostics;
        if diag.stride > 0 && k % diag.stride == 0 {
            let d = crate::contour::step_diagnostics(&next, &cur, params, report.dissipation)?;
            report.eps = d.eps;
            report.el_residual = d.el_residual;
            report.expu_ratio = d.expu_ratio;
            report.wulff_radius = Some(d.wulff_radius);
        }
        let moved = next.sym_diff_area(&cur)?;
        cur = next;
        observer(k, &cur)?;
        if params.snapshot_stride > 0 && k % params.snapshot_stride == 0 {
            trace.snapshots.push((k, cur.clone()));
        }
        trace.reports.push(report);
        if stop.enabled {
            quiet = if moved < threshold { quiet + 1 } else { 0 };
            if quiet >= stop.patience {
                trace.stopped_early = true;
                break;
            }
        }
    }
    if params.snapshot_stride > 0 && trace.snapshots.last().map(|s| s.0) != Some(trace.reports.len()) {
        trace.snapshots.push((trace.reports.len(), cur.clone()));
    }
    trace.final_set = cur;
    Ok(trace)
}
