//! Small least-squares fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub rms_residual: f64,
}

/// Ordinary least squares `y ~ intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::FitFailed("need at least two paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 || !sxx.is_finite() || !sxy.is_finite() {
        return Err(Error::FitFailed("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok(LineFit {
        intercept,
        slope,
        rms_residual: libm::sqrt(ss / n),
    })
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::FitFailed("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|&x| libm::log(x)).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| libm::log(y)).collect();
    Ok(linear_fit(&lx, &ly)?.slope)
}

/// `q(t) ~ c1 + c2 exp(-c3 t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub max_residual: f64,
    pub rms_residual: f64,
}

impl ExpFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.c1 + self.c2 * libm::exp(-self.c3 * t)
    }
}

fn exp_fit_at(ts: &[f64], qs: &[f64], c3: f64) -> Option<ExpFit> {
    let es: Vec<f64> = ts.iter().map(|&t| libm::exp(-c3 * t)).collect();
    let line = linear_fit(&es, qs).ok()?;
    let (mut worst, mut ss) = (0.0f64, 0.0);
    for (e, q) in es.iter().zip(qs) {
        let r = q - line.intercept - line.slope * e;
        worst = worst.max(libm::fabs(r));
        ss += r * r;
    }
    Some(ExpFit {
        c1: line.intercept,
        c2: line.slope,
        c3,
        max_residual: worst,
        rms_residual: libm::sqrt(ss / ts.len() as f64),
    })
}

/// Fits `c1 + c2 e^{-c3 t}`: `c1, c2` by linear least squares at fixed `c3`,
/// `c3` by a logarithmic scan over `[c3_lo, c3_hi]` refined with
/// golden-section search.
pub fn exp_decay_fit(ts: &[f64], qs: &[f64], c3_lo: f64, c3_hi: f64) -> Result<ExpFit> {
    if ts.len() != qs.len() || ts.len() < 3 {
        return Err(Error::FitFailed("need at least three samples".into()));
    }
    if !(c3_lo > 0.0 && c3_hi > c3_lo) {
        return Err(Error::precondition("decay-rate bracket must satisfy 0 < lo < hi"));
    }
    let sse = |lc: f64| exp_fit_at(ts, qs, libm::exp(lc)).map_or(f64::INFINITY, |f| f.rms_residual);
    let (a, b) = (libm::log(c3_lo), libm::log(c3_hi));
    const SCAN: usize = 200;
    let grid: Vec<f64> = (0..=SCAN).map(|i| a + (b - a) * i as f64 / SCAN as f64).collect();
    let best = (0..=SCAN)
        .min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j])))
        .unwrap();
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(SCAN)];
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = sse(x2);
        }
    }
    let lc = if f1 < f2 { x1 } else { x2 };
    let lc = if sse(grid[best]) < sse(lc) { grid[best] } else { lc };
    exp_fit_at(ts, qs, libm::exp(lc)).ok_or_else(|| Error::FitFailed("exponential fit diverged".into()))
}
