//! Exponential-rate fitting of decay series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 8;
pub const MIN_ACCEPT_R2: f64 = 0.8;

/// `y ≈ C·exp(−t/C₀)` fitted by least squares on `(t, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub series: String,
    pub c: f64,
    /// Infinite when the fitted slope is not negative.
    pub c0: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub accepted: bool,
    /// Set when the series is identically zero on the window, so nothing was fitted.
    pub stationary: bool,
}

impl RateFit {
    pub fn stationary(series: &str, window: (f64, f64)) -> Self {
        RateFit { series: series.into(), c: 0.0, c0: f64::INFINITY, r2: 0.0, window, points: 0, accepted: false, stationary: true }
    }
}

/// Fits the samples with `t` in `window`. Accepted when `C₀ > 0` and `R² ≥ 0.8`.
pub fn fit_exponential_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Window(format!("{} points in [{}, {}], need {MIN_FIT_POINTS}", pts.len(), window.0, window.1)));
    }
    if let Some(&(t, y)) = pts.iter().find(|&&(_, y)| !(y > 0.0)) {
        return Err(Error::Window(format!("nonpositive value {y} at t = {t}")));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut stl, mut sll) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        let (a, b) = (t - tm, y.ln() - lm);
        stt += a * a;
        stl += a * b;
        sll += b * b;
    }
    if stt == 0.0 {
        return Err(Error::Window("all samples share one time".into()));
    }
    let slope = stl / stt;
    let r2 = if sll > 0.0 { (stl * stl / (stt * sll)).min(1.0) } else { 0.0 };
    let c0 = if slope < 0.0 { -1.0 / slope } else { f64::INFINITY };
    Ok(RateFit {
        series: String::new(),
        c: (lm - slope * tm).exp(),
        c0,
        r2,
        window,
        points: pts.len(),
        accepted: c0.is_finite() && r2 >= MIN_ACCEPT_R2,
        stationary: false,
    })
}

/// Window over the post-transient part of a series. It ends at the last sample more
/// than `floor` above the terminal value (lattice pinning leaves a plateau there) and
/// starts after `start_fraction` of the time up to that end, so the plateau length does
/// not move the start.
pub fn auto_window(series: &[(f64, f64)], start_fraction: f64, floor: f64) -> Option<(f64, f64)> {
    let (first, last) = (series.first()?, series.last()?);
    let end = series.iter().rev().find(|p| p.1 - last.1 > floor)?;
    let t0 = first.0 + start_fraction * (end.0 - first.0);
    (end.0 > t0).then_some((t0, end.0))
}
