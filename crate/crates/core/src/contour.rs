//! Boundary curves of grid sets and the curvature diagnostics built on them.
//!
//! Contours run with the set on their left: outer boundaries counterclockwise, holes
//! clockwise. Angles `θ` are outer-normal angles of the set, so `κ` is negative along holes.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisoNorm;
use crate::error::{Error, Result};
use crate::geometry::{centroid, signed_area, Polygon, Vec2};
use crate::grid::{BoundaryIndex, GridSet};
use crate::numeric::{golden_max, spectral_derivative};
use crate::stepper::FlowParams;

/// Default tangent smoothing scale, in cells.
pub const DEFAULT_SIGMA_CELLS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Polygon,
    pub outer: bool,
}

impl Contour {
    /// Closed polyline; orientation is read off the signed area.
    pub fn new(points: Polygon) -> Self {
        let outer = signed_area(&points) > 0.0;
        Contour { points, outer }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn length(&self) -> f64 {
        crate::geometry::perimeter(&self.points)
    }

    pub fn reversed(&self) -> Contour {
        let mut p = self.points.clone();
        p.reverse();
        Contour::new(p)
    }

    /// `∮ φ(ν) ds` with `ν` the right-hand normal of each segment.
    pub fn anisotropic_length(&self, phi: &AnisoNorm) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let d = self.points[(i + 1) % n] - self.points[i];
                phi.eval(Vec2::new(d.y, -d.x))
            })
            .sum()
    }

    /// Uniform arclength resampling with `n` points.
    pub fn resampled(&self, n: usize) -> Contour {
        let pts = &self.points;
        let m = pts.len();
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for i in 0..m {
            cum.push(cum[i] + (pts[(i + 1) % m] - pts[i]).norm());
        }
        let total = cum[m];
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let s = total * k as f64 / n as f64;
            while seg + 1 < m && cum[seg + 1] <= s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
            out.push(pts[seg] + (pts[(seg + 1) % m] - pts[seg]) * t);
        }
        Contour { points: out, outer: self.outer }
    }
}

/// Separable Gaussian blur of the indicator, padded with zeros, then marching squares at 1/2.
/// Contours are resampled to spacing close to `Δx`.
pub fn extract_contours(set: &GridSet) -> Result<Vec<Contour>> {
    if set.is_empty() {
        return Err(Error::NoContour);
    }
    let spec = *set.spec();
    let pad = 4usize;
    let (w, h) = (spec.nx + 2 * pad, spec.ny + 2 * pad);
    let mut field = vec![0.0f64; w * h];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            if set.get(i, j) {
                field[(j + pad) * w + i + pad] = 1.0;
            }
        }
    }
    let kernel: Vec<f64> = {
        let k: Vec<f64> = (-3i32..=3).map(|t| (-(t * t) as f64 / 2.0).exp()).collect();
        let s: f64 = k.iter().sum();
        k.into_iter().map(|v| v / s).collect()
    };
    let blur = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        for j in 0..h {
            for i in 0..w {
                let mut acc = 0.0;
                for (t, &kv) in kernel.iter().enumerate() {
                    let o = t as isize - 3;
                    let (p, q) = if horizontal { (i as isize + o, j as isize) } else { (i as isize, j as isize + o) };
                    if p >= 0 && q >= 0 && (p as usize) < w && (q as usize) < h {
                        acc += kv * src[q as usize * w + p as usize];
                    }
                }
                out[j * w + i] = acc;
            }
        }
        out
    };
    let field = blur(&blur(&field, true), false);
    let origin = spec.center(0, 0) - Vec2::new(pad as f64, pad as f64) * spec.dx;
    let loops = marching_squares(&field, w, h, 0.5);
    let mut out = Vec::new();
    for lp in loops {
        let pts: Polygon = lp.into_iter().map(|(x, y)| origin + Vec2::new(x, y) * spec.dx).collect();
        if pts.len() < 3 {
            continue;
        }
        let c = Contour::new(pts);
        let n = ((c.length() / spec.dx).round() as usize).max(8);
        out.push(c.resampled(n));
    }
    if out.is_empty() {
        return Err(Error::NoContour);
    }
    Ok(out)
}

/// Level-set loops of a sampled field, in sample coordinates, with values above `level` on the left.
fn marching_squares(f: &[f64], w: usize, h: usize, level: f64) -> Vec<Vec<(f64, f64)>> {
    // edge keys: horizontal edge (i,j)-(i+1,j) is 2*(j*w+i), vertical (i,j)-(i,j+1) is 2*(j*w+i)+1
    let inside = |i: usize, j: usize| f[j * w + i] > level;
    let point = |key: usize| -> (f64, f64) {
        let base = key / 2;
        let (i, j) = (base % w, base / w);
        let (a, b, di, dj) = if key % 2 == 0 { (f[j * w + i], f[j * w + i + 1], 1.0, 0.0) } else { (f[j * w + i], f[(j + 1) * w + i], 0.0, 1.0) };
        let t = ((level - a) / (b - a)).clamp(0.0, 1.0);
        (i as f64 + di * t, j as f64 + dj * t)
    };
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for j in 0..h - 1 {
        for i in 0..w - 1 {
            // corners counterclockwise and the edge leaving each one
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let edges = [2 * (j * w + i), 2 * (j * w + i + 1) + 1, 2 * ((j + 1) * w + i), 2 * (j * w + i) + 1];
            let mut exits = Vec::new(); // inside -> outside going counterclockwise
            let mut entries = Vec::new();
            for k in 0..4 {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                if a && !b {
                    exits.push(k);
                } else if !a && b {
                    entries.push(k);
                }
            }
            match exits.len() {
                0 => {}
                1 => {
                    next.insert(edges[exits[0]], edges[entries[0]]);
                    order.push(edges[exits[0]]);
                }
                _ => {
                    let center = 0.25 * (f[j * w + i] + f[j * w + i + 1] + f[(j + 1) * w + i + 1] + f[(j + 1) * w + i]);
                    for &k in &exits {
                        let b = if center > level { (k + 1) % 4 } else { (k + 3) % 4 };
                        next.insert(edges[k], edges[b]);
                        order.push(edges[k]);
                    }
                }
            }
        }
    }
    let mut loops = Vec::new();
    let mut seen: HashMap<usize, bool> = HashMap::new();
    for &start in &order {
        if seen.contains_key(&start) {
            continue;
        }
        let mut lp = Vec::new();
        let mut k = start;
        loop {
            seen.insert(k, true);
            lp.push(point(k));
            match next.get(&k) {
                Some(&n) if n != start => k = n,
                _ => break,
            }
        }
        loops.push(lp);
    }
    loops
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub s: Vec<f64>,
    /// Outer-normal angle, unwrapped.
    pub theta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_phi: Vec<f64>,
    /// Sample positions, at segment midpoints of the resampled curve.
    pub points: Vec<Vec2>,
    pub ds: f64,
    /// `φ(ν)` per sample.
    pub phi_nu: Vec<f64>,
    /// `ℋ¹` average of `κ^φ`.
    pub mean: f64,
    /// `φ`-weighted average of `κ^φ`.
    pub phi_mean: f64,
    /// `‖κ^φ − κ̄^φ‖_{L²(ℋ¹)}`.
    pub eps: f64,
    pub sigma: f64,
    pub winding: f64,
}

impl CurvatureProfile {
    /// Nearest sample to `p`.
    pub fn sample_near(&self, p: Vec2) -> usize {
        let mut best = 0;
        for (i, q) in self.points.iter().enumerate() {
            if (*q - p).norm() < (self.points[best] - p).norm() {
                best = i;
            }
        }
        best
    }

    pub fn length(&self) -> f64 {
        self.ds * self.s.len() as f64
    }
}

/// Curvature from Gaussian-smoothed tangent angles.
pub fn curvature_profile(c: &Contour, phi: &AnisoNorm, sigma: f64) -> Result<CurvatureProfile> {
    if c.len() < 32 {
        return Err(Error::InvalidArgument(format!("curvature needs at least 32 samples, got {}", c.len())));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing scale must be nonnegative, got {sigma}")));
    }
    let length = c.length();
    let n = c.len().max(((length / (0.5 * sigma.max(1e-300))).ceil() as usize).min(1 << 16)).max(c.len());
    let r = c.resampled(n);
    let n = r.len();
    let ds = length / n as f64;
    let mut theta = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut prev = f64::NAN;
    for i in 0..n {
        let (a, b) = (r.points[i], r.points[(i + 1) % n]);
        let d = b - a;
        let mut t = d.y.atan2(d.x) - 0.5 * PI;
        if prev.is_finite() {
            while t - prev > PI {
                t -= 2.0 * PI;
            }
            while t - prev < -PI {
                t += 2.0 * PI;
            }
        }
        prev = t;
        theta.push(t);
        points.push((a + b) * 0.5);
    }
    // closing jump gives the winding
    let mut close = theta[0] - theta[n - 1];
    while close > PI {
        close -= 2.0 * PI;
    }
    while close < -PI {
        close += 2.0 * PI;
    }
    let total = theta[n - 1] + close - theta[0];
    let winding = total / (2.0 * PI);
    if (winding.abs() - 1.0).abs() > 1e-6 {
        return Err(Error::Degenerate(format!("contour turns {winding:.3} times; it self-intersects")));
    }
    // smooth the periodic part of θ
    let slope = total / n as f64;
    let periodic: Vec<f64> = theta.iter().enumerate().map(|(i, t)| t - slope * i as f64).collect();
    let smooth = if sigma > 0.0 {
        let sig = sigma / ds;
        let half = (4.0 * sig).ceil() as isize;
        let weights: Vec<f64> = (-half..=half).map(|k| (-(k * k) as f64 / (2.0 * sig * sig)).exp()).collect();
        let wsum: f64 = weights.iter().sum();
        (0..n as isize)
            .map(|i| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(o, w)| {
                        let k = i + o as isize - half;
                        // shift by whole turns so the periodic part stays continuous
                        let kk = k.rem_euclid(n as isize) as usize;
                        w * periodic[kk]
                    })
                    .sum::<f64>()
                    / wsum
            })
            .collect()
    } else {
        periodic
    };
    let theta: Vec<f64> = smooth.iter().enumerate().map(|(i, p)| p + slope * i as f64).collect();
    let kappa: Vec<f64> = (0..n)
        .map(|i| {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            let tp = if ip == 0 { theta[ip] + total } else { theta[ip] };
            let tm = if i == 0 { theta[im] - total } else { theta[im] };
            (tp - tm) / (2.0 * ds)
        })
        .collect();
    let kappa_phi: Vec<f64> = kappa.iter().zip(&theta).map(|(k, &t)| k * phi.stiffness(t)).collect();
    let phi_nu: Vec<f64> = theta.iter().map(|&t| phi.gamma(t)).collect();
    let mean = kappa_phi.iter().sum::<f64>() / n as f64;
    let phi_mean = kappa_phi.iter().zip(&phi_nu).map(|(k, g)| k * g).sum::<f64>() / phi_nu.iter().sum::<f64>();
    let eps = (kappa_phi.iter().map(|k| (k - mean).powi(2)).sum::<f64>() * ds).sqrt();
    Ok(CurvatureProfile {
        s: (0..n).map(|i| (i as f64 + 0.5) * ds).collect(),
        theta,
        kappa,
        kappa_phi,
        points,
        ds,
        phi_nu,
        mean,
        phi_mean,
        eps,
        sigma,
        winding,
    })
}

/// `∮ κ^φ φ(ν) ds`, equal to `±2|W_φ|` for closed simple curves.
pub fn gauss_bonnet(c: &Contour, phi: &AnisoNorm) -> Result<f64> {
    gauss_bonnet_smoothed(c, phi, 0.0)
}

pub fn gauss_bonnet_smoothed(c: &Contour, phi: &AnisoNorm, sigma: f64) -> Result<f64> {
    let p = curvature_profile(c, phi, sigma)?;
    Ok(gauss_bonnet_of(&p))
}

pub fn gauss_bonnet_of(p: &CurvatureProfile) -> f64 {
    p.kappa_phi.iter().zip(&p.phi_nu).map(|(k, g)| k * g).sum::<f64>() * p.ds
}

/// Curvature statistics over all contours of a set, averaging over the whole boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurvature {
    pub mean: f64,
    pub phi_mean: f64,
    pub eps: f64,
    /// `‖κ^φ − κ̃^φ‖_{L²(dP_φ)}`.
    pub eps_phi: f64,
    pub length: f64,
    pub perimeter_phi: f64,
}

pub fn boundary_curvature(profiles: &[CurvatureProfile]) -> BoundaryCurvature {
    let mut len = 0.0;
    let mut int = 0.0;
    let mut per = 0.0;
    let mut int_phi = 0.0;
    for p in profiles {
        len += p.length();
        int += p.kappa_phi.iter().sum::<f64>() * p.ds;
        per += p.phi_nu.iter().sum::<f64>() * p.ds;
        int_phi += p.kappa_phi.iter().zip(&p.phi_nu).map(|(k, g)| k * g).sum::<f64>() * p.ds;
    }
    let mean = int / len;
    let phi_mean = int_phi / per;
    let mut e2 = 0.0;
    let mut e2phi = 0.0;
    for p in profiles {
        for (k, g) in p.kappa_phi.iter().zip(&p.phi_nu) {
            e2 += (k - mean).powi(2) * p.ds;
            e2phi += (k - phi_mean).powi(2) * g * p.ds;
        }
    }
    BoundaryCurvature { mean, phi_mean, eps: e2.sqrt(), eps_phi: e2phi.sqrt(), length: len, perimeter_phi: per }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub center: Vec2,
    /// Radius from the component's own area.
    pub r: f64,
    pub area: f64,
    /// Normal graph over `W_φ(center, r_common)` at uniform normal angles.
    pub f: Vec<f64>,
    pub f_sup: f64,
    /// `max|f| + max|f′|` with `f′` by differences in the normal angle.
    pub f_c1: f64,
    pub star_shaped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffFit {
    pub d: usize,
    pub r: f64,
    pub components: Vec<ComponentFit>,
    pub disjoint: bool,
    /// False when some component is not star-shaped about its centroid.
    pub fittable: bool,
    /// Radius `√(m / (d|W_φ|))` the target area would give.
    pub r_target: f64,
}

impl WulffFit {
    pub fn centers(&self) -> Vec<Vec2> {
        self.components.iter().map(|c| c.center).collect()
    }

    pub fn f_sup(&self) -> f64 {
        self.components.iter().map(|c| c.f_sup).fold(0.0, f64::max)
    }

    /// `(max r_j − min r_j) / mean r_j`.
    pub fn radius_spread(&self) -> f64 {
        let rs: Vec<f64> = self.components.iter().map(|c| c.r).collect();
        if rs.is_empty() {
            return 0.0;
        }
        let mx = rs.iter().cloned().fold(f64::MIN, f64::max);
        let mn = rs.iter().cloned().fold(f64::MAX, f64::min);
        (mx - mn) / (rs.iter().sum::<f64>() / rs.len() as f64)
    }

    /// Whether `x` lies in the fitted union.
    pub fn contains(&self, phi: &AnisoNorm, x: Vec2) -> bool {
        self.components.iter().any(|c| phi.dual(x - c.center) <= self.r)
    }

    pub fn polygons(&self, phi: &AnisoNorm, n: usize) -> Vec<Polygon> {
        self.components
            .iter()
            .map(|c| (0..n).map(|i| c.center + phi.cahn_hoffman(2.0 * PI * i as f64 / n as f64) * self.r).collect())
            .collect()
    }
}

const FIT_ANGLES: usize = 256;

fn star_shaped(pts: &[Vec2], c: Vec2) -> bool {
    let n = pts.len();
    (0..n).all(|i| (pts[i] - c).cross(pts[(i + 1) % n] - c) > 0.0)
}

/// Center minimizing the weighted variance of `φ°(v − x)` over the contour samples.
/// Near `W_φ` the gauge deviation is `f/γ` and `ds ≈ (γ+γ″)dθ`, so the weights
/// `γ²/(γ+γ″) ds` turn the objective into `∫f² dθ` to leading order.
fn fit_center(pts: &[Vec2], phi: &AnisoNorm, start: Vec2, scale: f64) -> Vec2 {
    let n = pts.len();
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let t = pts[(i + 1) % n] - pts[(i + n - 1) % n];
            let theta = t.y.atan2(t.x) - 0.5 * PI;
            let g = phi.gamma(theta);
            0.5 * t.norm() * g * g / phi.stiffness(theta)
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let cost = |x: Vec2| -> f64 {
        let g: Vec<f64> = pts.iter().map(|&p| phi.dual(p - x)).collect();
        let mean = g.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>() / wsum;
        g.iter().zip(&weights).map(|(a, w)| w * (a - mean).powi(2)).sum::<f64>() / wsum
    };
    let mut x = start;
    let mut step = 0.25 * scale;
    for _ in 0..40 {
        let before = x;
        let (bx, _) = golden_max(x.x - step, x.x + step, 1e-9 * scale, |t| -cost(Vec2::new(t, x.y)));
        x.x = bx;
        let (by, _) = golden_max(x.y - step, x.y + step, 1e-9 * scale, |t| -cost(Vec2::new(x.x, t)));
        x.y = by;
        let moved = (x - before).norm();
        if moved < 1e-8 * scale {
            break;
        }
        step = (2.0 * moved).max(1e-3 * scale).min(0.25 * scale);
    }
    x
}

/// Signed offset `t` of the first crossing of the line `q + tν` with the polygon, nearest to `q`.
fn normal_offset(pts: &[Vec2], q: Vec2, nu: Vec2) -> Option<f64> {
    let n = pts.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let e = b - a;
        let denom = nu.cross(e);
        if denom.abs() < 1e-300 {
            continue;
        }
        let w = a - q;
        let t = w.cross(e) / denom;
        let u = w.cross(nu) / denom;
        if (0.0..=1.0).contains(&u) && best.is_none_or(|b| t.abs() < b.abs()) {
            best = Some(t);
        }
    }
    best
}

/// Fits a union of equal Wulff shapes to the outer contours; holes are subtracted from
/// the area of the outer contour enclosing them.
pub fn fit_wulff_union(contours: &[Contour], phi: &AnisoNorm, m: f64) -> Result<WulffFit> {
    let outers: Vec<&Contour> = contours.iter().filter(|c| c.outer).collect();
    if outers.is_empty() {
        return Err(Error::NoContour);
    }
    let w = phi.wulff_area();
    let mut areas: Vec<f64> = outers.iter().map(|c| c.signed_area()).collect();
    for h in contours.iter().filter(|c| !c.outer) {
        let p = h.points[0];
        if let Some(k) = outers.iter().position(|o| crate::geometry::contains_point(&o.points, p)) {
            areas[k] += h.signed_area();
        }
    }
    let d = outers.len();
    let r = (areas.iter().map(|a| a.max(0.0) / w).sum::<f64>() / d as f64).sqrt();
    let mut components = Vec::with_capacity(d);
    let mut fittable = true;
    for (c, &area) in outers.iter().zip(&areas) {
        let start = centroid(&c.points);
        let star = star_shaped(&c.points, start);
        fittable &= star;
        let rj = (area.max(0.0) / w).sqrt();
        let center = if star { fit_center(&c.points, phi, start, rj.max(1e-12)) } else { start };
        let mut f = Vec::with_capacity(FIT_ANGLES);
        for i in 0..FIT_ANGLES {
            let th = 2.0 * PI * i as f64 / FIT_ANGLES as f64;
            let q = center + phi.cahn_hoffman(th) * r;
            f.push(normal_offset(&c.points, q, Vec2::from_angle(th)).unwrap_or(f64::NAN));
        }
        let f_sup = f.iter().map(|v| v.abs()).fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
        let dth = 2.0 * PI / FIT_ANGLES as f64;
        let slope = (0..FIT_ANGLES).map(|i| ((f[(i + 1) % FIT_ANGLES] - f[i]) / dth).abs()).fold(0.0, f64::max);
        components.push(ComponentFit { center, r: rj, area, f, f_sup, f_c1: f_sup + slope, star_shaped: star });
    }
    let mut disjoint = true;
    for i in 0..d {
        for j in i + 1..d {
            if phi.dual(components[j].center - components[i].center) <= 2.0 * r {
                disjoint = false;
            }
        }
    }
    Ok(WulffFit { d, r, components, disjoint, fittable, r_target: (m / (d as f64 * w)).sqrt() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlexandrovReport {
    pub eps: f64,
    pub d: usize,
    pub perimeter: f64,
    pub p_d: f64,
    pub gap: f64,
    pub ratio: f64,
    pub radius_spread: f64,
    /// Relative curvature deviation `ε / (|κ̄^φ|·√ℓ)`.
    pub relative_eps: f64,
    pub far_from_critical: bool,
    pub mean: f64,
    pub phi_mean: f64,
    pub eps_phi: f64,
    pub gauss_bonnet: Vec<f64>,
    pub sigma: f64,
}

/// Relative curvature deviation above which a set is reported as far from critical.
pub const FAR_FROM_CRITICAL: f64 = 0.5;

/// `P_d = 2√(|W_φ| m d)`, the perimeter of `d` disjoint equal Wulff shapes of total area `m`.
pub fn p_d(phi: &AnisoNorm, m: f64, d: usize) -> f64 {
    2.0 * (phi.wulff_area() * m * d as f64).sqrt()
}

pub fn alexandrov_report(e: &GridSet, phi: &AnisoNorm, m: f64) -> Result<AlexandrovReport> {
    let contours = extract_contours(e)?;
    alexandrov_from_contours(&contours, phi, m, DEFAULT_SIGMA_CELLS * e.spec().dx)
}

/// Same report on explicit contours, with perimeter `∮φ(ν)ds` of the polylines.
pub fn alexandrov_from_contours(contours: &[Contour], phi: &AnisoNorm, m: f64, sigma: f64) -> Result<AlexandrovReport> {
    let profiles = contours.iter().map(|c| curvature_profile(c, phi, sigma)).collect::<Result<Vec<_>>>()?;
    let bc = boundary_curvature(&profiles);
    let perimeter: f64 = contours.iter().map(|c| c.anisotropic_length(phi)).sum();
    let (d, p) = (1..=20usize)
        .map(|d| (d, p_d(phi, m, d)))
        .min_by(|a, b| (a.1 - perimeter).abs().total_cmp(&(b.1 - perimeter).abs()))
        .expect("nonempty range");
    let gap = (perimeter - p).abs();
    let ratio = if bc.eps > 0.0 { gap / (bc.eps * bc.eps) } else { f64::INFINITY };
    let relative_eps = bc.eps / (bc.mean.abs() * bc.length.sqrt()).max(1e-300);
    let radius_spread = fit_wulff_union(contours, phi, m).map(|f| f.radius_spread()).unwrap_or(f64::NAN);
    Ok(AlexandrovReport {
        eps: bc.eps,
        d,
        perimeter,
        p_d: p,
        gap,
        ratio,
        radius_spread,
        relative_eps,
        far_from_critical: relative_eps > FAR_FROM_CRITICAL,
        mean: bc.mean,
        phi_mean: bc.phi_mean,
        eps_phi: bc.eps_phi,
        gauss_bonnet: profiles.iter().map(gauss_bonnet_of).collect(),
        sigma,
    })
}

/// Curve `u(θ) = ξ(θ) + f(θ)ν(θ)` for `f` sampled at `θ_i = 2πi/n`.
pub fn normal_graph(f: &[f64], phi: &AnisoNorm, center: Vec2, r: f64) -> Polygon {
    let n = f.len();
    (0..n)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / n as f64;
            center + phi.cahn_hoffman(th) * r + Vec2::from_angle(th) * f[i]
        })
        .collect()
}

fn check_graphical(f: &[f64], phi: &AnisoNorm) -> Result<()> {
    let n = f.len();
    let df = spectral_derivative(f);
    for i in 0..n {
        let th = 2.0 * PI * i as f64 / n as f64;
        let (g, g1, g2) = phi.gamma_derivatives(th);
        // ω′ ∝ u × u′ with u′ = (γ+γ″+f)τ + f′ν
        let omega = (g + f[i]) * (g + g2 + f[i]) - g1 * df[i];
        if omega <= 0.0 || g + f[i] <= 0.0 {
            return Err(Error::SmallnessViolation(format!(
                "normal graph stops winding monotonically at theta = {th:.4}"
            )));
        }
    }
    Ok(())
}

/// `||E_f| − (|W_φ| + ∫f(γ+γ″)dθ + ½∫f²dθ)|` with the area of `E_f` taken from the
/// spectrally differentiated parametrization.
pub fn area_expansion_check(f: &[f64], phi: &AnisoNorm) -> Result<f64> {
    let (area, lin, quad) = area_terms(f, phi)?;
    Ok((area - (phi.wulff_area() + lin + quad)).abs())
}

fn area_terms(f: &[f64], phi: &AnisoNorm) -> Result<(f64, f64, f64)> {
    let n = f.len();
    if n < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 samples, got {n}")));
    }
    check_graphical(f, phi)?;
    let u = normal_graph(f, phi, Vec2::ZERO, 1.0);
    let xs: Vec<f64> = u.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = u.iter().map(|p| p.y).collect();
    let (dx, dy) = (spectral_derivative(&xs), spectral_derivative(&ys));
    let dth = 2.0 * PI / n as f64;
    let area = 0.5 * (0..n).map(|i| xs[i] * dy[i] - ys[i] * dx[i]).sum::<f64>() * dth;
    let lin = (0..n).map(|i| f[i] * phi.stiffness(2.0 * PI * i as f64 / n as f64)).sum::<f64>() * dth;
    let quad = 0.5 * f.iter().map(|v| v * v).sum::<f64>() * dth;
    Ok((area, lin, quad))
}

/// `P_φ(E_f) − P_φ(W_φ) − ∫f(γ+γ″)dθ`, quadratic in `f`.
pub fn perimeter_defect(f: &[f64], phi: &AnisoNorm) -> Result<f64> {
    let n = f.len();
    check_graphical(f, phi)?;
    let u = normal_graph(f, phi, Vec2::ZERO, 1.0);
    let xs: Vec<f64> = u.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = u.iter().map(|p| p.y).collect();
    let (dx, dy) = (spectral_derivative(&xs), spectral_derivative(&ys));
    let dth = 2.0 * PI / n as f64;
    let per = (0..n).map(|i| phi.eval(Vec2::new(dy[i], -dx[i]))).sum::<f64>() * dth;
    let lin = (0..n).map(|i| f[i] * phi.stiffness(2.0 * PI * i as f64 / n as f64)).sum::<f64>() * dth;
    Ok(per - 2.0 * phi.wulff_area() - lin)
}

/// Contour-based quantities recorded by the stepper at its diagnostic stride.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub eps: Option<f64>,
    pub el_residual: Option<f64>,
    pub expu_ratio: Option<f64>,
    pub wulff_radius: f64,
}

pub fn step_diagnostics(next: &GridSet, prev: &GridSet, params: &FlowParams, dissipation: f64) -> Result<StepDiagnostics> {
    let spec = next.spec();
    let wulff_radius = next
        .mask()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(k, _)| params.phi.dual(spec.center_of(k)))
        .fold(0.0, f64::max);
    let sigma = params.diagnostics.sigma_cells * spec.dx;
    let profiles: Vec<CurvatureProfile> = match extract_contours(next) {
        Ok(cs) => cs.iter().filter_map(|c| curvature_profile(c, &params.phi, sigma).ok()).collect(),
        Err(_) => Vec::new(),
    };
    if profiles.is_empty() {
        return Ok(StepDiagnostics { eps: None, el_residual: None, expu_ratio: None, wulff_radius });
    }
    let bc = boundary_curvature(&profiles);
    let el_residual = BoundaryIndex::new(prev).ok().map(|index| {
        let mut acc = 0.0;
        let mut len = 0.0;
        for p in &profiles {
            for (k, &x) in p.kappa_phi.iter().zip(&p.points) {
                let d = index.distance(&params.psi, x, f64::INFINITY);
                let inside = spec.cell_of(x).is_some_and(|(i, j)| prev.get(i, j));
                let sd = if inside { -d } else { d };
                acc += (k + sd / params.h) * p.ds;
                len += p.ds;
            }
        }
        acc / len
    });
    let expu_ratio = (dissipation > 0.0).then(|| bc.eps * bc.eps * params.h * params.h / dissipation);
    Ok(StepDiagnostics { eps: Some(bc.eps), el_residual, expu_ratio, wulff_radius })
}
