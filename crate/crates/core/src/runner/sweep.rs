//! Perturbation-amplitude sweep for the quadratic perimeter-gap exponent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisoNorm;
use crate::contour::{boundary_curvature, curvature_profile, normal_graph, p_d, Contour};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

const SAMPLES: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub amplitude: f64,
    /// `‖κ^φ − κ̄^φ‖_{L²}`.
    pub eps: f64,
    /// `|P_φ(E) − P_1|` with `P_1` taken at the area of `E`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub mode: usize,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log gap` against `log eps`.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Normal graphs `f = ε₀cos(kθ)` over the Wulff shape of area `m`, one row per amplitude.
pub fn alexandrov_sweep(phi: &AnisoNorm, m: f64, amplitudes: &[f64], mode: usize) -> Result<SweepTable> {
    if amplitudes.len() < 2 {
        return Err(Error::InvalidArgument("sweep needs at least two amplitudes".into()));
    }
    let r = (m / phi.wulff_area()).sqrt();
    let mut rows = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        let f: Vec<f64> = (0..SAMPLES).map(|i| a * (mode as f64 * 2.0 * PI * i as f64 / SAMPLES as f64).cos()).collect();
        let c = Contour::new(normal_graph(&f, phi, Vec2::ZERO, r));
        let profile = curvature_profile(&c, phi, 4.0 * c.length() / SAMPLES as f64)?;
        let eps = boundary_curvature(std::slice::from_ref(&profile)).eps;
        let gap = (c.anisotropic_length(phi) - p_d(phi, c.signed_area().abs(), 1)).abs();
        rows.push(SweepRow { amplitude: a, eps, gap });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps.ln(), r.gap.ln())).collect();
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::Degenerate("zero gap or deviation in sweep".into()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    Ok(SweepTable { mode, rows, slope, intercept: my - slope * mx, r2: sxy * sxy / (sxx * syy) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::NormSpec;

    #[test]
    fn quadratic_exponent() {
        for spec in [NormSpec::euclidean(), NormSpec::fourier(&[1.0, 0.1])] {
            let phi = AnisoNorm::from_spec(&spec).unwrap();
            let t = alexandrov_sweep(&phi, 1.0, &[0.02, 0.04, 0.08, 0.16], 3).unwrap();
            assert!((t.slope - 2.0).abs() < 0.15 && t.r2 > 0.98, "{t:?}");
        }
    }
}
