//! Planar norms carried as their restriction `γ(θ) = φ(cos θ, sin θ)` to the unit circle.
//!
//! ```
//! use wulff_flow::anisotropy::{AnisoNorm, NormSpec};
//! use wulff_flow::geometry::Vec2;
//!
//! let phi = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
//! assert!((phi.eval(Vec2::new(1.0, 0.0)) - 2.0).abs() < 1e-15);
//! assert!((phi.dual(Vec2::new(1.0, 0.0)) - 0.5).abs() < 1e-9);
//! assert!((phi.wulff_area() - 2.0 * std::f64::consts::PI).abs() < 1e-10);
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Vec2};
use crate::numeric::{periodic_max, periodic_min, periodic_trapezoid, real_fourier};

/// Minimum number of samples accepted for the sampled family.
pub const MIN_SAMPLES: usize = 16;

const SCAN: usize = 2048;
const QUAD_NODES: usize = 4096;
const DUAL_GRID: usize = 256;
const DUAL_TOL: f64 = 1e-10;

/// Serializable description of a norm, as it appears in scenario configs:
/// `{"family": "fourier", "coeffs": [1.0, 0.2], "rotation": 0.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean {
        #[serde(default)]
        rotation: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        rotation: f64,
    },
    /// `γ(θ) = Σ_j coeffs[j]·cos(2jθ)`.
    Fourier {
        coeffs: Vec<f64>,
        #[serde(default)]
        rotation: f64,
    },
    /// γ sampled at `θ_i = 2πi/n`, `n` a power of two.
    Sampled {
        values: Vec<f64>,
        #[serde(default)]
        rotation: f64,
    },
}

impl NormSpec {
    pub fn euclidean() -> Self {
        NormSpec::Euclidean { rotation: 0.0 }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        NormSpec::Ellipse { a, b, rotation: 0.0 }
    }

    pub fn fourier(coeffs: &[f64]) -> Self {
        NormSpec::Fourier { coeffs: coeffs.to_vec(), rotation: 0.0 }
    }

    pub fn sampled(values: Vec<f64>) -> Self {
        NormSpec::Sampled { values, rotation: 0.0 }
    }

    pub fn rotation(&self) -> f64 {
        match self {
            NormSpec::Euclidean { rotation }
            | NormSpec::Ellipse { rotation, .. }
            | NormSpec::Fourier { rotation, .. }
            | NormSpec::Sampled { rotation, .. } => *rotation,
        }
    }

    pub fn rotated(mut self, angle: f64) -> Self {
        match &mut self {
            NormSpec::Euclidean { rotation }
            | NormSpec::Ellipse { rotation, .. }
            | NormSpec::Fourier { rotation, .. }
            | NormSpec::Sampled { rotation, .. } => *rotation = angle,
        }
        self
    }

    /// Parses the compact CLI form: `euclidean`, `ellipse:2,1`, `fourier:1,0.2`,
    /// optionally followed by `@rotation`. JSON objects are accepted as well.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return Ok(serde_json::from_str(text)?);
        }
        let (body, rotation) = match text.split_once('@') {
            Some((b, r)) => {
                let r: f64 = r.trim().parse().map_err(|_| Error::InvalidNorm(format!("bad rotation `{r}`")))?;
                (b, r)
            }
            None => (text, 0.0),
        };
        let (family, args) = body.split_once(':').unwrap_or((body, ""));
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidNorm(format!("bad number `{s}`"))))
                .collect()
        };
        let spec = match family.trim() {
            "euclidean" => NormSpec::euclidean(),
            "ellipse" => {
                let v = nums()?;
                if v.len() != 2 {
                    return Err(Error::InvalidNorm("ellipse takes two semi-axes".into()));
                }
                NormSpec::ellipse(v[0], v[1])
            }
            "fourier" => NormSpec::fourier(&nums()?),
            "sampled" => NormSpec::sampled(nums()?),
            other => return Err(Error::InvalidNorm(format!("unknown family `{other}`"))),
        };
        Ok(spec.rotated(rotation))
    }
}

#[derive(Clone, Debug)]
enum Family {
    Euclidean,
    Ellipse { a2: f64, b2: f64 },
    Fourier { coeffs: Vec<f64> },
    Sampled { a: Vec<f64>, b: Vec<f64> },
}

/// Norm-equivalence and ellipticity constants plus the extremes they come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityData {
    pub l_phi: f64,
    pub lambda_phi: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// min and max of `γ + γ″`.
    pub stiffness_min: f64,
    pub stiffness_max: f64,
    pub stiffness_argmin: f64,
}

/// An even, positive, regular elliptic norm on the plane.
#[derive(Clone, Debug)]
pub struct AnisoNorm {
    spec: NormSpec,
    family: Family,
    rotation: f64,
    data: EllipticityData,
    wulff_area: f64,
}

impl AnisoNorm {
    /// Builds the norm and rejects anything that is not positive and regular elliptic.
    pub fn from_spec(spec: &NormSpec) -> Result<Self> {
        let n = Self::new_unchecked(spec)?;
        n.ellipticity_bounds()?;
        Ok(n)
    }

    /// Builds the norm, checking only evenness and positivity; `ellipticity_bounds`
    /// reports a violation afterwards.
    pub fn new_unchecked(spec: &NormSpec) -> Result<Self> {
        let family = match spec {
            NormSpec::Euclidean { .. } => Family::Euclidean,
            NormSpec::Ellipse { a, b, .. } => {
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidNorm(format!("ellipse semi-axes must be positive, got {a}, {b}")));
                }
                Family::Ellipse { a2: a * a, b2: b * b }
            }
            NormSpec::Fourier { coeffs, .. } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidNorm("fourier coefficients must be finite and non-empty".into()));
                }
                Family::Fourier { coeffs: coeffs.clone() }
            }
            NormSpec::Sampled { values, .. } => {
                let n = values.len();
                if n < MIN_SAMPLES || !n.is_power_of_two() {
                    return Err(Error::Resolution { got: n, min: MIN_SAMPLES });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidNorm("sampled values must be finite".into()));
                }
                let (a, b) = real_fourier(values);
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let odd = a.iter().zip(&b).skip(1).step_by(2).fold(0.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs()));
                if odd > 1e-8 * scale {
                    return Err(Error::InvalidNorm(format!("sampled values are not π-periodic (odd mode {odd:.3e})")));
                }
                Family::Sampled { a, b }
            }
        };
        let mut norm = AnisoNorm {
            spec: spec.clone(),
            family,
            rotation: spec.rotation(),
            data: EllipticityData {
                l_phi: 1.0,
                lambda_phi: 1.0,
                gamma_min: 1.0,
                gamma_max: 1.0,
                stiffness_min: 1.0,
                stiffness_max: 1.0,
                stiffness_argmin: 0.0,
            },
            wulff_area: 0.0,
        };
        let (_, gmin) = periodic_min(SCAN, DUAL_TOL, |t| norm.gamma(t));
        if gmin <= 0.0 {
            return Err(Error::InvalidNorm(format!("norm is not positive: min gamma = {gmin:.6e}")));
        }
        let (_, gmax) = periodic_max(SCAN, DUAL_TOL, |t| norm.gamma(t));
        let stiff = |t: f64| {
            let (g, _, g2) = norm.gamma_derivatives(t);
            g + g2
        };
        let (smin_t, smin) = periodic_min(SCAN, DUAL_TOL, stiff);
        let (_, smax) = periodic_max(SCAN, DUAL_TOL, stiff);
        norm.data = EllipticityData {
            l_phi: gmax.max(1.0 / gmin),
            lambda_phi: if smin > 0.0 { smax.max(1.0 / smin) } else { f64::INFINITY },
            gamma_min: gmin,
            gamma_max: gmax,
            stiffness_min: smin,
            stiffness_max: smax,
            stiffness_argmin: smin_t.rem_euclid(2.0 * PI),
        };
        norm.wulff_area = 0.5
            * periodic_trapezoid(QUAD_NODES, |t| {
                let (g, _, g2) = norm.gamma_derivatives(t);
                g * (g + g2)
            });
        Ok(norm)
    }

    pub fn euclidean() -> Self {
        Self::from_spec(&NormSpec::euclidean()).expect("euclidean norm is valid")
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.family, Family::Euclidean)
    }

    /// γ on the unrotated frame at the unit vector `(c, s)`.
    #[inline]
    fn gamma_unit_frame(&self, c: f64, s: f64) -> f64 {
        match &self.family {
            Family::Euclidean => 1.0,
            Family::Ellipse { a2, b2 } => (a2 * c * c + b2 * s * s).sqrt(),
            Family::Fourier { coeffs } => {
                let (zr, zi) = (c * c - s * s, 2.0 * c * s);
                let (mut pr, mut pi) = (1.0, 0.0);
                let mut acc = coeffs[0];
                for &cj in &coeffs[1..] {
                    let nr = pr * zr - pi * zi;
                    pi = pr * zi + pi * zr;
                    pr = nr;
                    acc += cj * pr;
                }
                acc
            }
            Family::Sampled { a, b } => {
                let (mut pr, mut pi) = (1.0, 0.0);
                let mut acc = a[0];
                for k in 1..a.len() {
                    let nr = pr * c - pi * s;
                    pi = pr * s + pi * c;
                    pr = nr;
                    acc += a[k] * pr + b[k] * pi;
                }
                acc
            }
        }
    }

    /// `φ(v) = |v|·γ(arg v)`.
    #[inline]
    pub fn eval(&self, v: Vec2) -> f64 {
        if let Family::Euclidean = self.family {
            return v.norm();
        }
        let r = v.norm();
        if r == 0.0 {
            return 0.0;
        }
        let u = if self.rotation != 0.0 { v.rotate(-self.rotation) } else { v };
        r * self.gamma_unit_frame(u.x / r, u.y / r)
    }

    #[inline]
    pub fn gamma(&self, theta: f64) -> f64 {
        let (s, c) = (theta - self.rotation).sin_cos();
        self.gamma_unit_frame(c, s)
    }

    /// `(γ, γ′, γ″)` at `θ`; analytic for the closed-form families, spectral for sampled ones.
    pub fn gamma_derivatives(&self, theta: f64) -> (f64, f64, f64) {
        let t = theta - self.rotation;
        match &self.family {
            Family::Euclidean => (1.0, 0.0, 0.0),
            Family::Ellipse { a2, b2 } => {
                let (s, c) = t.sin_cos();
                let q = a2 * c * c + b2 * s * s;
                let g = q.sqrt();
                let dq = 2.0 * (b2 - a2) * s * c;
                let d2q = 2.0 * (b2 - a2) * (c * c - s * s);
                let g1 = dq / (2.0 * g);
                let g2 = d2q / (2.0 * g) - dq * dq / (4.0 * g * q);
                (g, g1, g2)
            }
            Family::Fourier { coeffs } => {
                let mut out = (0.0, 0.0, 0.0);
                for (j, &cj) in coeffs.iter().enumerate() {
                    let k = 2.0 * j as f64;
                    let (s, c) = (k * t).sin_cos();
                    out.0 += cj * c;
                    out.1 -= cj * k * s;
                    out.2 -= cj * k * k * c;
                }
                out
            }
            Family::Sampled { a, b } => {
                let mut out = (a[0], 0.0, 0.0);
                for k in 1..a.len() {
                    let kf = k as f64;
                    let (s, c) = (kf * t).sin_cos();
                    out.0 += a[k] * c + b[k] * s;
                    out.1 += kf * (b[k] * c - a[k] * s);
                    out.2 -= kf * kf * (a[k] * c + b[k] * s);
                }
                out
            }
        }
    }

    /// `γ + γ″` at `θ`, the factor turning curvature into anisotropic curvature.
    pub fn stiffness(&self, theta: f64) -> f64 {
        let (g, _, g2) = self.gamma_derivatives(theta);
        g + g2
    }

    /// Dual norm `φ°(w) = sup{x·w : φ(x) ≤ 1}`.
    pub fn dual(&self, w: Vec2) -> f64 {
        if let Family::Euclidean = self.family {
            return w.norm();
        }
        support_sup(|t| self.gamma(t), w)
    }

    /// Bidual `φ°°`, computed by dualizing the numeric dual; should reproduce `φ`.
    pub fn dual_dual(&self, v: Vec2) -> f64 {
        support_sup(|t| self.dual(Vec2::from_angle(t)), v)
    }

    /// Cahn–Hoffman point `ξ(θ) = γ ν + γ′ τ`, the boundary point of `W_φ` with outer normal `ν = (cos θ, sin θ)`.
    pub fn cahn_hoffman(&self, theta: f64) -> Vec2 {
        let (g, g1, _) = self.gamma_derivatives(theta);
        let nu = Vec2::from_angle(theta);
        nu * g + nu.perp() * g1
    }

    /// `n`-gon inscribed in `W_φ(center, r)` through Cahn–Hoffman points at uniform normal angles.
    pub fn wulff_polygon(&self, center: Vec2, r: f64, n: usize) -> Result<Polygon> {
        if n < 16 {
            return Err(Error::InvalidArgument(format!("wulff polygon needs n >= 16, got {n}")));
        }
        Ok((0..n).map(|i| center + self.cahn_hoffman(2.0 * PI * i as f64 / n as f64) * r).collect())
    }

    /// Boundary of the unit ball `{φ ≤ 1}` sampled at uniform polar angles.
    pub fn unit_ball_polygon(&self, n: usize) -> Polygon {
        (0..n)
            .map(|i| {
                let u = Vec2::from_angle(2.0 * PI * i as f64 / n as f64);
                u * (1.0 / self.eval(u))
            })
            .collect()
    }

    /// `|W_φ| = ½∫γ(γ+γ″)dθ`, cached at construction.
    pub fn wulff_area(&self) -> f64 {
        self.wulff_area
    }

    /// `L_φ` and `Λ_φ`; errors if `min(γ+γ″) ≤ 0`.
    pub fn ellipticity_bounds(&self) -> Result<EllipticityData> {
        if self.data.stiffness_min <= 0.0 {
            return Err(Error::EllipticityViolation {
                min: self.data.stiffness_min,
                theta: self.data.stiffness_argmin,
            });
        }
        Ok(self.data)
    }

    /// Cached bounds without the ellipticity check.
    pub fn data(&self) -> &EllipticityData {
        &self.data
    }

    pub fn l_phi(&self) -> f64 {
        self.data.l_phi
    }

    /// Whether `φ(x) = φ(x − 2(x·ν)ν)` holds to `tol` on sampled unit vectors.
    pub fn check_compatibility(&self, nu: Vec2, tol: f64) -> bool {
        let nu = nu.normalized();
        (0..720).all(|i| {
            let x = Vec2::from_angle(PI * i as f64 / 360.0);
            let y = x - nu * (2.0 * x.dot(nu));
            (self.eval(x) - self.eval(y)).abs() <= tol
        })
    }
}

/// `sup_θ (cos θ, sin θ)·w / gauge(θ)` by grid scan and golden refinement.
fn support_sup(gauge: impl Fn(f64) -> f64, w: Vec2) -> f64 {
    let r = w.norm();
    if r == 0.0 {
        return 0.0;
    }
    let (_, v) = periodic_max(DUAL_GRID, DUAL_TOL, |t| Vec2::from_angle(t).dot(w) / gauge(t));
    v
}

/// `W_φ(center, r) = center + r·W_φ`.
#[derive(Clone, Debug)]
pub struct WulffShape {
    pub norm: AnisoNorm,
    pub center: Vec2,
    pub radius: f64,
}

impl WulffShape {
    pub fn new(norm: AnisoNorm, center: Vec2, radius: f64) -> Self {
        WulffShape { norm, center, radius }
    }

    /// Radius of the Wulff shape of the given area.
    pub fn with_area(norm: AnisoNorm, center: Vec2, area: f64) -> Self {
        let r = (area / norm.wulff_area()).sqrt();
        WulffShape { norm, center, radius: r }
    }

    pub fn area(&self) -> f64 {
        self.radius * self.radius * self.norm.wulff_area()
    }

    /// `P_φ(W_φ(x, r)) = 2 r |W_φ|`.
    pub fn perimeter(&self) -> f64 {
        2.0 * self.radius * self.norm.wulff_area()
    }

    pub fn polygon(&self, n: usize) -> Result<Polygon> {
        self.norm.wulff_polygon(self.center, self.radius, n)
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.norm.dual(x - self.center) <= self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;

    fn fourier02() -> AnisoNorm {
        AnisoNorm::from_spec(&NormSpec::fourier(&[1.0, 0.2])).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(AnisoNorm::euclidean().eval(Vec2::new(3.0, 4.0)), 5.0);
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
        assert_eq!(e.eval(Vec2::new(1.0, 0.0)), 2.0);
        assert!((fourier02().eval(Vec2::new(0.0, 1.0)) - 0.8).abs() < 1e-15);
        assert_eq!(fourier02().eval(Vec2::ZERO), 0.0);
    }

    #[test]
    fn derivative_examples() {
        let (g, g1, g2) = fourier02().gamma_derivatives(0.0);
        assert!((g - 1.2).abs() < 1e-15 && g1.abs() < 1e-15 && (g2 + 0.8).abs() < 1e-15);
        let round = AnisoNorm::from_spec(&NormSpec::ellipse(1.0, 1.0)).unwrap();
        let (g, g1, g2) = round.gamma_derivatives(1.0);
        assert!((g - 1.0).abs() < 1e-15 && g1.abs() < 1e-15 && g2.abs() < 1e-14);
    }

    #[test]
    fn ellipse_derivatives_match_finite_differences() {
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0).rotated(0.4)).unwrap();
        let d = 1e-5;
        for i in 0..20 {
            let t = 0.31 * i as f64;
            let (_, g1, g2) = e.gamma_derivatives(t);
            let fd1 = (e.gamma(t + d) - e.gamma(t - d)) / (2.0 * d);
            let fd2 = (e.gamma(t + d) - 2.0 * e.gamma(t) + e.gamma(t - d)) / (d * d);
            assert!((g1 - fd1).abs() < 1e-8);
            assert!((g2 - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn sampled_matches_fourier_source() {
        let f = fourier02();
        let n = 32;
        let vals: Vec<f64> = (0..n).map(|i| f.gamma(2.0 * PI * i as f64 / n as f64)).collect();
        let s = AnisoNorm::from_spec(&NormSpec::sampled(vals)).unwrap();
        for i in 0..50 {
            let t = 0.123 * i as f64;
            let (a, b, c) = f.gamma_derivatives(t);
            let (x, y, z) = s.gamma_derivatives(t);
            assert!((a - x).abs() < 1e-12 && (b - y).abs() < 1e-12 && (c - z).abs() < 1e-11);
        }
        assert!((s.wulff_area() - f.wulff_area()).abs() < 1e-12);
    }

    #[test]
    fn sampled_resolution_errors() {
        assert!(matches!(AnisoNorm::from_spec(&NormSpec::sampled(vec![1.0; 8])), Err(Error::Resolution { .. })));
        assert!(matches!(AnisoNorm::from_spec(&NormSpec::sampled(vec![1.0; 24])), Err(Error::Resolution { .. })));
    }

    #[test]
    fn dual_examples() {
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
        assert!((e.dual(Vec2::new(1.0, 0.0)) - 0.5).abs() < 1e-12);
        assert!((AnisoNorm::euclidean().dual(Vec2::new(3.0, 4.0)) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn ellipticity_examples() {
        let d = AnisoNorm::euclidean().ellipticity_bounds().unwrap();
        assert_eq!((d.l_phi, d.lambda_phi), (1.0, 1.0));
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
        assert!((e.l_phi() - 2.0).abs() < 1e-12);
        let bad = AnisoNorm::from_spec(&NormSpec::fourier(&[1.0, 0.5]));
        assert!(matches!(bad, Err(Error::EllipticityViolation { .. })));
    }

    #[test]
    fn cahn_hoffman_examples() {
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
        let p = e.cahn_hoffman(0.0);
        assert!((p.x - 2.0).abs() < 1e-15 && p.y.abs() < 1e-15);
        let q = AnisoNorm::euclidean().cahn_hoffman(0.7);
        assert!((q - Vec2::from_angle(0.7)).norm() < 1e-15);
    }

    #[test]
    fn wulff_areas() {
        assert!((AnisoNorm::euclidean().wulff_area() - PI).abs() < 1e-12);
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
        assert!((e.wulff_area() - 2.0 * PI).abs() < 1e-10);
        // the raw 4096-gon is O(n^-2) off (1.2e-6 for the circle); Richardson removes the leading term
        for norm in [AnisoNorm::euclidean(), e, fourier02()] {
            let a1 = signed_area(&norm.wulff_polygon(Vec2::ZERO, 1.0, 4096).unwrap());
            let a2 = signed_area(&norm.wulff_polygon(Vec2::ZERO, 1.0, 8192).unwrap());
            assert!((a1 - norm.wulff_area()).abs() < 1e-5);
            assert!(((4.0 * a2 - a1) / 3.0 - norm.wulff_area()).abs() < 1e-9);
        }
    }

    #[test]
    fn compatibility_examples() {
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0)).unwrap();
        assert!(e.check_compatibility(Vec2::new(1.0, 0.0), 1e-12));
        assert!(AnisoNorm::euclidean().check_compatibility(Vec2::from_angle(0.77), 1e-12));
        let r = AnisoNorm::from_spec(&NormSpec::ellipse(2.0, 1.0).rotated(0.3)).unwrap();
        assert!(!r.check_compatibility(Vec2::new(1.0, 0.0), 1e-6));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(NormSpec::parse("ellipse:2,1").unwrap(), NormSpec::ellipse(2.0, 1.0));
        assert_eq!(NormSpec::parse("fourier:1,0.2@0.5").unwrap(), NormSpec::fourier(&[1.0, 0.2]).rotated(0.5));
        let j: NormSpec = serde_json::from_str(r#"{"family": "fourier", "coeffs": [1.0, 0.2], "rotation": 0.0}"#).unwrap();
        assert_eq!(j, NormSpec::fourier(&[1.0, 0.2]));
        assert!(serde_json::from_str::<NormSpec>(r#"{"family": "euclidean", "bogus": 1}"#).is_err());
    }
}
