//! Sobolev regularity read off the decay of dyadic shells.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{bracket, FourierField};
use crate::fit::linear_fit;

pub const DEFAULT_NOISE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub lo: usize,
    pub hi: usize,
    /// Geometric mean of `<k>` over the shell.
    pub center: f64,
    /// Root-mean-square of `|f_k|` over the shell.
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityFit {
    /// Decay exponent: `rms ~ center^{-sigma_hat}`.
    pub sigma_hat: f64,
    /// Estimated regularity `sigma_hat - 1/2`.
    pub s_hat: f64,
    pub shells: Vec<Shell>,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Dyadic shells `[lo 2^i, lo 2^{i+1})` in `|k|` covering `[lo, hi]`; the last
/// shell is closed at `hi`. A trailing shell holding a single `|k|` is merged
/// into its neighbour.
pub fn dyadic_shells(f: &FourierField, lo: usize, hi: usize) -> Vec<Shell> {
    let mut edges = Vec::new();
    let mut a = lo.max(1);
    while a <= hi {
        let b = (2 * a).min(hi + 1);
        edges.push((a, b - 1));
        a = b;
    }
    if edges.len() > 1 {
        let (l, h) = edges[edges.len() - 1];
        if l == h {
            edges.pop();
            edges.last_mut().unwrap().1 = h;
        }
    }
    edges
        .into_iter()
        .map(|(a, b)| {
            let mut sq = 0.0;
            let mut logc = 0.0;
            for m in a..=b {
                let k = m as i64;
                sq += f.get(k).norm_sqr() + f.get(-k).norm_sqr();
                logc += 2.0 * libm::log(bracket(k));
            }
            let count = 2.0 * (b - a + 1) as f64;
            Shell {
                lo: a,
                hi: b,
                center: libm::exp(logc / count),
                rms: libm::sqrt(sq / count),
            }
        })
        .collect()
}

/// Fits `log rms` against `log center` over the dyadic shells of
/// `lo <= |k| <= hi`, ignoring shells whose rms is below
/// [`DEFAULT_NOISE_FLOOR`].
pub fn fit_regularity(f: &FourierField, lo: usize, hi: usize) -> Result<RegularityFit> {
    fit_regularity_with_floor(f, lo, hi, DEFAULT_NOISE_FLOOR)
}

pub fn fit_regularity_with_floor(
    f: &FourierField,
    lo: usize,
    hi: usize,
    noise_floor: f64,
) -> Result<RegularityFit> {
    if lo == 0 || lo > hi || hi > f.radius() {
        return Err(Error::precondition("fit range must satisfy 1 <= lo <= hi <= N"));
    }
    let shells: Vec<Shell> = dyadic_shells(f, lo, hi)
        .into_iter()
        .filter(|s| s.rms > noise_floor)
        .collect();
    if shells.len() < 3 {
        return Err(Error::InsufficientTail {
            usable: shells.len(),
        });
    }
    let xs: Vec<f64> = shells.iter().map(|s| libm::log(s.center)).collect();
    let ys: Vec<f64> = shells.iter().map(|s| libm::log(s.rms)).collect();
    let line = linear_fit(&xs, &ys)?;
    let sigma_hat = -line.slope;
    Ok(RegularityFit {
        sigma_hat,
        s_hat: sigma_hat - 0.5,
        shells,
        residual: line.rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Complex;

    #[test]
    fn power_law() {
        let f = FourierField::from_fn(512, |k| Complex::new(bracket(k).powi(-2), 0.0));
        let fit = fit_regularity(&f, 16, 512).unwrap();
        assert!((fit.s_hat - 1.5).abs() <= 0.1, "{fit:?}");
    }

    #[test]
    fn single_mode_is_insufficient() {
        let f = FourierField::delta(64, 5, Complex::new(1.0, 0.0));
        assert!(matches!(
            fit_regularity(&f, 1, 64),
            Err(Error::InsufficientTail { usable: 1 })
        ));
    }

    #[test]
    fn shells_cover_range_once() {
        let f = FourierField::zeros(100);
        for (lo, hi) in [(1, 100), (4, 64), (3, 97), (16, 17)] {
            let sh = dyadic_shells(&f, lo, hi);
            assert_eq!(sh.first().unwrap().lo, lo);
            assert_eq!(sh.last().unwrap().hi, hi);
            for w in sh.windows(2) {
                assert_eq!(w[0].hi + 1, w[1].lo);
            }
        }
    }
}
