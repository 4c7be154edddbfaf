//! Quadrature on functions and on uniformly sampled data.

use alloc::vec::Vec;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Running trapezoid integral of samples spaced by `h`; entry `i` integrates
/// over the first `i` intervals.
pub fn cumulative_trapezoid<T>(samples: &[T], h: f64) -> Vec<T>
where
    T: Copy + core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
{
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = T::default();
    for (i, &s) in samples.iter().enumerate() {
        if i > 0 {
            acc = acc + (samples[i - 1] + s) * (0.5 * h);
        }
        out.push(acc);
    }
    out
}

/// Composite Simpson over samples spaced by `h`; an odd number of intervals
/// closes with a trapezoid on the last one.
pub fn simpson_samples<T>(samples: &[T], h: f64) -> T
where
    T: Copy + core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
{
    let n = samples.len();
    if n < 2 {
        return T::default();
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut acc = T::default();
    let mut i = 0;
    while i < even {
        acc = acc + (samples[i] + samples[i + 1] * 4.0 + samples[i + 2]) * (h / 3.0);
        i += 2;
    }
    if even < intervals {
        acc = acc + (samples[n - 2] + samples[n - 1]) * (0.5 * h);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_closed_forms() {
        let v = adaptive_simpson(&mut |x: f64| 1.0 / (1.0 + x * x), -1e3, 1e3, 1e-12);
        assert!((v - 2.0 * 1e3f64.atan()).abs() < 1e-9, "{v}");
        let v = adaptive_simpson(&mut |x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn sampled_rules() {
        let h = 0.01;
        let xs: Vec<f64> = (0..=300).map(|i| (i as f64 * h).exp()).collect();
        let exact = 3f64.exp() - 1.0;
        assert!((simpson_samples(&xs, h) - exact).abs() < 1e-8);
        let cum = cumulative_trapezoid(&xs, h);
        assert_eq!(cum[0], 0.0);
        assert!((cum[300] - exact).abs() < 2e-4);
        let odd: Vec<f64> = xs[..300].to_vec();
        assert!((simpson_samples(&odd, h) - (2.99f64.exp() - 1.0)).abs() < 1e-5);
    }
}
