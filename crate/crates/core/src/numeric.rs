//! Small numerical helpers: golden-section search, periodic quadrature,
//! spectral differentiation and a Lawson–Hanson NNLS solver.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[a, b]` to abscissa tolerance `tol`.
/// Returns `(argmax, max)`.
pub fn golden_max(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let (mut bx, mut bf) = (x, fx);
    for (xx, ff) in [(c, fc), (d, fd)] {
        if ff > bf {
            bx = xx;
            bf = ff;
        }
    }
    (bx, bf)
}

/// Global maximum of a smooth 2π-periodic function: grid scan followed by
/// golden refinement around the best sample.
pub fn periodic_max(samples: usize, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let step = 2.0 * PI / samples as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..samples {
        let t = i as f64 * step;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let (t, v) = golden_max(best.0 - step, best.0 + step, tol, &f);
    if v >= best.1 {
        (t, v)
    } else {
        best
    }
}

pub fn periodic_min(samples: usize, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (t, v) = periodic_max(samples, tol, |x| -f(x));
    (t, -v)
}

/// Trapezoid rule on `[0, 2π)` with `n` nodes; spectrally accurate for smooth periodic integrands.
pub fn periodic_trapezoid(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| f(i as f64 * h)).sum::<f64>() * h
}

/// Derivative of periodic samples on a uniform grid over `[0, 2π)` via FFT.
/// The Nyquist mode is dropped, as usual for odd-order spectral derivatives.
pub fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k < n / 2 {
            k as f64
        } else if k == n / 2 && n % 2 == 0 {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c *= Complex::new(0.0, kk);
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Real Fourier coefficients `(a_k, b_k)`, `k = 0..=n/2`, of samples on `[0, 2π)`, so that
/// `v(θ) = Σ a_k cos kθ + b_k sin kθ` interpolates the samples.
pub fn real_fourier(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    let half = n / 2;
    let mut a = vec![0.0; half + 1];
    let mut b = vec![0.0; half + 1];
    a[0] = buf[0].re / n as f64;
    for k in 1..=half {
        let scale = if 2 * k == n { 1.0 } else { 2.0 } / n as f64;
        a[k] = buf[k].re * scale;
        b[k] = if 2 * k == n { 0.0 } else { -buf[k].im * scale };
    }
    (a, b)
}

/// Nonnegative least squares `min ‖Ax − b‖₂, x ≥ 0` (Lawson–Hanson active set).
/// `a` is row-major with `cols` columns.
pub fn nnls(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> Vec<f64> {
    let at = |r: usize, c: usize| a[r * cols + c];
    let mut x = vec![0.0; cols];
    let mut passive = vec![false; cols];
    let tol = 1e-12;
    let grad = |x: &[f64]| -> Vec<f64> {
        let mut res = b.to_vec();
        for r in 0..rows {
            for c in 0..cols {
                res[r] -= at(r, c) * x[c];
            }
        }
        (0..cols).map(|c| (0..rows).map(|r| at(r, c) * res[r]).sum()).collect()
    };
    for _outer in 0..(3 * cols + 10) {
        let w = grad(&x);
        let cand = (0..cols).filter(|&c| !passive[c]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..cols).filter(|&c| passive[c]).collect();
            let z_p = least_squares_subset(a, rows, cols, b, &idx);
            let mut z = vec![0.0; cols];
            for (k, &c) in idx.iter().enumerate() {
                z[c] = z_p[k];
            }
            if idx.iter().all(|&c| z[c] > tol) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &c in &idx {
                if z[c] <= tol {
                    let d = x[c] - z[c];
                    if d > 0.0 {
                        alpha = alpha.min(x[c] / d);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for c in 0..cols {
                x[c] += alpha * (z[c] - x[c]);
            }
            for &c in &idx {
                if x[c].abs() <= tol {
                    passive[c] = false;
                    x[c] = 0.0;
                }
            }
        }
    }
    x
}

fn least_squares_subset(a: &[f64], rows: usize, cols: usize, b: &[f64], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    // normal equations; the systems here are tiny and well conditioned
    let mut m = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for r in 0..rows {
        for (p, &cp) in idx.iter().enumerate() {
            let ap = a[r * cols + cp];
            rhs[p] += ap * b[r];
            for (q, &cq) in idx.iter().enumerate() {
                m[p * k + q] += ap * a[r * cols + cq];
            }
        }
    }
    solve_dense(&mut m, &mut rhs, k);
    rhs
}

/// Gaussian elimination with partial pivoting, in place; the solution is left in `rhs`.
pub fn solve_dense(m: &mut [f64], rhs: &mut [f64], k: usize) {
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| m[i * k + col].abs().total_cmp(&m[j * k + col].abs())).unwrap();
        if piv != col {
            for c in 0..k {
                m.swap(col * k + c, piv * k + c);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * k + col];
        if d.abs() < 1e-300 {
            continue;
        }
        for r in (col + 1)..k {
            let f = m[r * k + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..k {
                m[r * k + c] -= f * m[col * k + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    for col in (0..k).rev() {
        let mut s = rhs[col];
        for c in (col + 1)..k {
            s -= m[col * k + c] * rhs[c];
        }
        let d = m[col * k + col];
        rhs[col] = if d.abs() < 1e-300 { 0.0 } else { s / d };
    }
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if sxx > 0.0 && syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 0.0 };
    (a, b, r2)
}
