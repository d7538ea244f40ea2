//! Quadrature and finite differences on uniform grids.

use std::ops::{Add, Mul, Sub};

/// Composite Simpson rule over equally spaced samples; an odd number of
/// intervals closes with the 3/8 rule on the last three.
pub fn simpson<T>(samples: &[T], h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let n = samples.len();
    match n {
        0 | 1 => T::default(),
        2 => (samples[0] + samples[1]) * (0.5 * h),
        3 => (samples[0] + samples[1] * 4.0 + samples[2]) * (h / 3.0),
        _ => {
            let intervals = n - 1;
            let even_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            let mut total = T::default();
            if even_end > 0 {
                let mut acc = samples[0] + samples[even_end];
                for (k, &s) in samples.iter().enumerate().take(even_end).skip(1) {
                    acc = acc + s * if k % 2 == 1 { 4.0 } else { 2.0 };
                }
                total = acc * (h / 3.0);
            }
            if even_end != n - 1 {
                let t = &samples[even_end..];
                total = total + (t[0] + t[1] * 3.0 + t[2] * 3.0 + t[3]) * (3.0 * h / 8.0);
            }
            total
        }
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T, F>(f: &F, a: f64, b: f64, tol: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Norm,
    F: Fn(f64) -> T,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, F>(f: &F, a: f64, b: f64, fa: T, fm: T, fb: T, whole: T, tol: f64, depth: u32) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Norm,
    F: Fn(f64) -> T,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.norm_val() <= 15.0 * tol {
        return left + right + delta * (1.0 / 15.0);
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Magnitude used by the adaptive error estimate.
pub trait Norm {
    fn norm_val(&self) -> f64;
}

impl Norm for f64 {
    fn norm_val(&self) -> f64 {
        self.abs()
    }
}

impl Norm for num_complex::Complex64 {
    fn norm_val(&self) -> f64 {
        self.norm()
    }
}

/// Fourth-order derivative of equally spaced samples: centered five-point
/// stencil in the interior, one-sided five-point stencils near the ends.
/// Falls back to lower order when fewer than five samples exist.
pub fn derivative<T>(samples: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = samples.len();
    let f = samples;
    match n {
        0 => vec![],
        1 => vec![f[0] * 0.0],
        2 => {
            let d = (f[1] - f[0]) * (1.0 / h);
            vec![d, d]
        }
        3 | 4 => (0..n)
            .map(|k| {
                if k == 0 {
                    (f[0] * -3.0 + f[1] * 4.0 - f[2]) * (0.5 / h)
                } else if k == n - 1 {
                    (f[k] * 3.0 - f[k - 1] * 4.0 + f[k - 2]) * (0.5 / h)
                } else {
                    (f[k + 1] - f[k - 1]) * (0.5 / h)
                }
            })
            .collect(),
        _ => (0..n)
            .map(|k| {
                let s = 1.0 / (12.0 * h);
                if k >= 2 && k + 2 < n {
                    (f[k - 2] - f[k - 1] * 8.0 + f[k + 1] * 8.0 - f[k + 2]) * s
                } else if k < 2 {
                    let b = k;
                    one_sided(&f[..5], b) * s
                } else {
                    let b = 4 - (n - 1 - k);
                    let w: Vec<T> = f[n - 5..].to_vec();
                    one_sided(&w, b) * s
                }
            })
            .collect(),
    }
}

/// Five-point derivative at position `b` of a five-sample window, times 12h.
fn one_sided<T>(w: &[T], b: usize) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let c: [f64; 5] = match b {
        0 => [-25.0, 48.0, -36.0, 16.0, -3.0],
        1 => [-3.0, -10.0, 18.0, -6.0, 1.0],
        2 => [1.0, -8.0, 0.0, 8.0, -1.0],
        3 => [-1.0, 6.0, -18.0, 10.0, 3.0],
        _ => [3.0, -16.0, 36.0, -48.0, 25.0],
    };
    let mut acc = w[0] * c[0];
    for i in 1..5 {
        acc = acc + w[i] * c[i];
    }
    acc
}
