//! Brute-force checks of the scalar sums behind the multilinear estimates.
//!
//! Two families live here: three elementary summation/integration lemmas,
//! each compared against its claimed majorant, and the reduced weighted
//! `sup_k` sums that control the cubic remainders. "Bounded" is read off as
//! a small log-log slope across a dyadic range of `k`.

use alloc::vec::Vec;

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::field::{bracket_f, phi_beta};
use crate::fit::loglog_slope;
use crate::quadrature::adaptive_simpson;
use crate::resonance::{ResonanceClassifier, WaveBranch};

/// Explicit size of the epsilon losses written as `beta-` or `1-`.
pub const EPS_SHIFT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaValue {
    pub value: f64,
    /// Size of the tail estimate error.
    pub error_bar: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSweep {
    pub xs: Vec<f64>,
    pub values: Vec<LemmaValue>,
    /// Log-log slope of `ratio` against `<x>`.
    pub slope: f64,
}

impl LemmaSweep {
    fn from_values(xs: Vec<f64>, values: Vec<LemmaValue>) -> Result<Self> {
        let brackets: Vec<f64> = xs.iter().map(|&x| bracket_f(x)).collect();
        let ratios: Vec<f64> = values.iter().map(|v| v.ratio).collect();
        let slope = loglog_slope(&brackets, &ratios)?;
        Ok(LemmaSweep { xs, values, slope })
    }

    pub fn max_ratio(&self) -> f64 {
        self.values.iter().map(|v| v.ratio).fold(0.0, f64::max)
    }
}

/// `int_{x0}^inf f` for `f` decaying like `x^{-p}`, `p > 1`, via
/// `x = x0 e^u`.
fn tail_integral(f: &impl Fn(f64) -> f64, x0: f64, p: f64) -> f64 {
    let upper = 45.0 / (p - 1.0);
    let scale = f(x0) * x0;
    let mut g = |u: f64| {
        let x = x0 * libm::exp(u);
        f(x) * x
    };
    adaptive_simpson(&mut g, 0.0, upper, 1e-12 * scale.max(1e-300))
}

#[inline]
fn bracket_pow(x: f64, e: f64) -> f64 {
    #[cfg(any(test, feature = "std"))]
    {
        (1.0 + x.abs()).powf(e)
    }
    #[cfg(not(any(test, feature = "std")))]
    {
        libm::exp(e * libm::log1p(libm::fabs(x)))
    }
}

/// `sum_n <n - k1>^{-beta} <n - k2>^{-gamma}` against
/// `<k1 - k2>^{-gamma} max(phi_beta(k1 - k2), 1)`.
///
/// The sum runs over `|n| <= cutoff`; the remainder is estimated by the
/// integral of the summand and its error bar is the last retained term.
pub fn lemma_sum_a(beta: f64, gamma: f64, k1: i64, k2: i64, cutoff: u64) -> Result<LemmaValue> {
    if !(beta >= gamma && gamma >= 0.0 && beta + gamma > 1.0) {
        return Err(Error::precondition("need beta >= gamma >= 0 and beta + gamma > 1"));
    }
    let reach = k1.unsigned_abs().max(k2.unsigned_abs());
    if cutoff <= 2 * reach {
        return Err(Error::precondition("cutoff must exceed twice max(|k1|, |k2|)"));
    }
    let c = cutoff as i64;
    let term = |n: f64| bracket_pow(n - k1 as f64, -beta) * bracket_pow(n - k2 as f64, -gamma);
    let mut sum = 0.0;
    for n in (-c..=c).rev() {
        sum += term(n as f64);
    }
    let x0 = c as f64 + 0.5;
    let tail = tail_integral(&|x| term(x), x0, beta + gamma) + tail_integral(&|x| term(-x), x0, beta + gamma);
    let error_bar = term(c as f64) + term(-c as f64);
    let d = k1 - k2;
    let bound = bracket_pow(d as f64, -gamma) * phi_beta(beta, d).max(1.0);
    let value = sum + tail;
    Ok(LemmaValue {
        value,
        error_bar,
        bound,
        ratio: value / bound,
    })
}

/// `sum_n <n^2 + c1 n + c2>^{-beta}`, `beta > 1/2`, with an integral tail
/// beyond `|n| > cutoff`. The cutoff is raised past the real roots when
/// needed.
pub fn lemma_sum_c(beta: f64, c1: f64, c2: f64, cutoff: u64) -> Result<f64> {
    if beta <= 0.5 {
        return Err(Error::precondition("need beta > 1/2"));
    }
    let reach = (libm::fabs(c1) + libm::sqrt(libm::fabs(c2))) as u64;
    let c = cutoff.max(2 * reach + 16) as i64;
    let term = |n: f64| bracket_pow(n * n + c1 * n + c2, -beta);
    let mut sum = 0.0;
    for n in -c..=c {
        sum += term(n as f64);
    }
    let x0 = c as f64 + 0.5;
    Ok(sum + tail_integral(&|x| term(x), x0, 2.0 * beta) + tail_integral(&|x| term(-x), x0, 2.0 * beta))
}

/// `int dtau / (<tau + rho1>^beta <tau + rho2>)` against
/// `<rho1 - rho2>^{-beta + EPS_SHIFT}`.
///
/// Quadrature covers `|tau| <= 1e6 <rho1 - rho2>` piecewise between the two
/// kinks with a logarithmic substitution; beyond that the integrand is
/// replaced by `|tau|^{-1-beta}`.
pub fn lemma_int_b(beta: f64, rho1: f64, rho2: f64) -> Result<LemmaValue> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::precondition("need 0 < beta <= 1"));
    }
    let f = |t: f64| bracket_pow(t + rho1, -beta) / bracket_f(t + rho2);
    let d = bracket_f(rho1 - rho2);
    let big = 1e6 * d;
    let (a, c) = {
        let (x, y) = (-rho1, -rho2);
        (x.min(y), x.max(y))
    };
    // integral of f over [p, p + dir * w] with tau = p + dir (e^u - 1)
    let piece = |p: f64, dir: f64, w: f64| -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let mut g = |u: f64| {
            let e = libm::exp(u);
            f(p + dir * (e - 1.0)) * e
        };
        adaptive_simpson(&mut g, 0.0, libm::log1p(w), 1e-13)
    };
    let mid = 0.5 * (a + c);
    let mut value = piece(a, -1.0, a + big) + piece(c, 1.0, big - c);
    value += piece(a, 1.0, mid - a) + piece(c, -1.0, c - mid);
    let tail_left = libm::pow(big - a, -beta) / beta;
    let tail_right = libm::pow(big + c, -beta) / beta;
    value += tail_left + tail_right;
    let bound = libm::pow(d, -beta + EPS_SHIFT);
    Ok(LemmaValue {
        value,
        error_bar: (tail_left + tail_right) * (1.0 + rho1.abs().max(rho2.abs())) / big,
        bound,
        ratio: value / bound,
    })
}

/// `k1 = 2^e`, `k2 = 0` for `e` in `exps`.
pub fn lemma_a_sweep(beta: f64, gamma: f64, max_exp: u32, cutoff: u64) -> Result<LemmaSweep> {
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for e in 0..=max_exp {
        let d = 1i64 << e;
        xs.push(d as f64);
        vals.push(lemma_sum_a(beta, gamma, d, 0, cutoff)?);
    }
    LemmaSweep::from_values(xs, vals)
}

/// `rho1 = 2^e`, `rho2 = 0`.
pub fn lemma_b_sweep(beta: f64, max_exp: u32) -> Result<LemmaSweep> {
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for e in 0..=max_exp {
        let d = libm::ldexp(1.0, e as i32);
        xs.push(d);
        vals.push(lemma_int_b(beta, d, 0.0)?);
    }
    LemmaSweep::from_values(xs, vals)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCSweep {
    /// `(c1, c2, value)` over the grid.
    pub grid: Vec<(f64, f64, f64)>,
    pub sup: f64,
    /// Probe `c2 = -m^2`, `c1 = 0`, for `m = 2^e`.
    pub probe: LemmaSweep,
}

/// Sup over `c1, c2 in {0, +-10^0, ..., +-10^max_decade}` plus the double
/// root probe. The probe's ratio is the value itself.
pub fn lemma_c_sweep(beta: f64, max_decade: u32, probe_max_exp: u32, cutoff: u64) -> Result<LemmaCSweep> {
    let mut axis = alloc::vec![0.0];
    for d in 0..=max_decade {
        let v = libm::pow(10.0, d as f64);
        axis.push(v);
        axis.push(-v);
    }
    let mut grid = Vec::new();
    let mut sup = 0.0f64;
    for &c1 in &axis {
        for &c2 in &axis {
            let v = lemma_sum_c(beta, c1, c2, cutoff)?;
            sup = sup.max(v);
            grid.push((c1, c2, v));
        }
    }
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for e in 0..=probe_max_exp {
        let m = libm::ldexp(1.0, e as i32);
        let v = lemma_sum_c(beta, 0.0, -m * m, cutoff)?;
        xs.push(m);
        vals.push(LemmaValue {
            value: v,
            error_bar: 0.0,
            bound: 1.0,
            ratio: v,
        });
    }
    Ok(LemmaCSweep {
        grid,
        sup,
        probe: LemmaSweep::from_values(xs, vals)?,
    })
}

/// Whether `(s0, s1)` lies in the well-posedness range for this `alpha`.
pub fn is_admissible(resonant: bool, s0: f64, s1: f64) -> bool {
    if resonant {
        s1 >= 0.0 && s1.max(0.5 * s1 + 0.5) <= s0 && s0 <= s1 + 1.0
    } else {
        s1 >= -0.5 && s1.max(0.5 * s1 + 0.25) <= s0 && s0 <= s1 + 1.0
    }
}

/// Largest smoothing gains `(a0, a1)` the estimates allow.
pub fn theory_gains(resonant: bool, s0: f64, s1: f64) -> (f64, f64) {
    if resonant {
        (s1.min(1.0), (2.0 * s0 - s1 - 1.0).min(1.0))
    } else {
        (1.0f64.min(2.0 * s0).min(1.0 + 2.0 * s1), 1.0f64.min(2.0 * s0).min(2.0 * s0 - s1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupSumKind {
    R1,
    R2,
    R3,
    R4,
}

impl SupSumKind {
    pub const ALL: [SupSumKind; 4] = [SupSumKind::R1, SupSumKind::R2, SupSumKind::R3, SupSumKind::R4];

    pub fn name(self) -> &'static str {
        match self {
            SupSumKind::R1 => "R1",
            SupSumKind::R2 => "R2",
            SupSumKind::R3 => "R3",
            SupSumKind::R4 => "R4",
        }
    }

    pub fn is_wave(self) -> bool {
        matches!(self, SupSumKind::R3 | SupSumKind::R4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupSumParams {
    pub s: f64,
    pub s0: f64,
    pub s1: f64,
    pub b: f64,
    pub alpha: ModelParams,
}

impl SupSumParams {
    /// Largest `s` for which the sum is claimed bounded.
    pub fn corner(kind: SupSumKind, s0: f64, s1: f64, b: f64) -> f64 {
        match kind {
            SupSumKind::R1 => s0 + 1.0f64.min(2.0 * s0),
            SupSumKind::R2 => (s0 + 1.0 + 2.0 * s1)
                .min(s0 + 1.0)
                .min(3.0 + 2.0 * s1 - 2.0 * b)
                .min(3.0 + s1 - 2.0 * b),
            SupSumKind::R3 | SupSumKind::R4 => s1 + 1.0f64.min(2.0 * s0).min(2.0 * s0 - s1),
        }
    }

    /// Open interval of admissible `b`.
    pub fn b_range(kind: SupSumKind, s0: f64, s1: f64) -> (f64, f64) {
        if kind.is_wave() {
            (0.5, 0.75 + 0.0f64.min(0.5 * (s0 + s1)))
        } else {
            (0.5, 0.75f64.min(0.5 * (s0 + 1.0)))
        }
    }

    /// True when `(s0, s1)`, `b` and `s` all satisfy the hypotheses.
    pub fn in_range(&self, kind: SupSumKind) -> bool {
        let cls = ResonanceClassifier::new(&self.alpha);
        let (lo, hi) = Self::b_range(kind, self.s0, self.s1);
        is_admissible(cls.is_resonant(), self.s0, self.s1)
            && self.b > lo
            && self.b < hi
            && self.s <= Self::corner(kind, self.s0, self.s1, self.b) + 1e-12
    }
}

struct PowTable {
    offset: i64,
    vals: Vec<f64>,
}

impl PowTable {
    /// `<x>^e` for `|x| <= reach`.
    fn new(e: f64, reach: i64) -> Self {
        let vals = (-reach..=reach).map(|x| bracket_pow(x as f64, e)).collect();
        PowTable { offset: reach, vals }
    }

    #[inline]
    fn get(&self, x: i64) -> f64 {
        self.vals[(x + self.offset) as usize]
    }
}

/// One column of a reduced sup-sum, without the `<k>^{2s}` weight: the inner
/// double sum at fixed `k` over `|.| <= cutoff` in both summation indices.
pub fn supsum_column_unweighted(kind: SupSumKind, p: &SupSumParams, k: i64, cutoff: i64) -> f64 {
    let cls = ResonanceClassifier::new(&p.alpha);
    let resonant = cls.is_resonant();
    let alpha = p.alpha.alpha;
    let e = -(2.0 - 2.0 * p.b);
    let reach = 3 * cutoff + 3 * k.abs() + 2;
    let w0 = PowTable::new(-2.0 * p.s0, reach);
    let w1 = PowTable::new(-2.0 * p.s1, reach);
    let sq = PowTable::new(-2.0, reach);
    let mut total = 0.0;
    match kind {
        SupSumKind::R1 => {
            // n = k1 + k2
            for n in -2 * cutoff..=2 * cutoff {
                if n == 0 || (resonant && cls.schro_is_resonant(k, n, WaveBranch::Plus)) {
                    continue;
                }
                let outer = w0.get(k - n) * sq.get(2 * k - n);
                let lo = (n - cutoff).max(-cutoff);
                let hi = (n + cutoff).min(cutoff);
                let mut acc = 0.0;
                for k1 in lo..=hi {
                    let prod = (n as f64) * ((k - k1) as f64);
                    acc += w0.get(k1) * w0.get(n - k1) * bracket_pow(prod, e);
                }
                total += outer * acc;
            }
        }
        SupSumKind::R2 => {
            let kk = (k * k) as f64;
            for k1 in -cutoff..=cutoff {
                if k1 == 0 || (resonant && cls.schro_is_resonant(k, k1, WaveBranch::Plus)) {
                    continue;
                }
                let outer = libm::pow(bracket_f(k1 as f64), -2.0 - 2.0 * p.s1) * sq.get(2 * k - k1);
                let mut acc = 0.0;
                for n in -cutoff..=cutoff {
                    let k2 = n + k - k1;
                    if k2 == 0 {
                        continue;
                    }
                    let phase = alpha * ((n * n) as f64 - kk) + (k1.abs() + k2.abs()) as f64;
                    acc += w1.get(k2) * w0.get(n) * bracket_pow(phase, e);
                }
                total += outer * acc;
            }
        }
        SupSumKind::R3 | SupSumKind::R4 => {
            let sign = if kind == SupSumKind::R3 { 1.0 } else { -1.0 };
            let aj = k.abs() as f64;
            for n in -cutoff..=cutoff {
                let outer = sq.get(2 * n - k) * w0.get(n);
                let an = alpha * (n * n) as f64;
                let mut acc = 0.0;
                for m in -cutoff..=cutoff {
                    let j1 = k - n - m;
                    if j1 == 0 {
                        continue;
                    }
                    if resonant {
                        let excluded = match kind {
                            SupSumKind::R3 => cls.wave_is_resonant(k, k - n),
                            _ => cls.wave_is_resonant(k, m),
                        };
                        if excluded {
                            continue;
                        }
                    }
                    let phase = an - alpha * (m * m) as f64 + sign * aj - j1.abs() as f64;
                    acc += w1.get(j1) * w0.get(m) * bracket_pow(phase, e);
                }
                total += outer * acc;
            }
        }
    }
    total
}

pub fn supsum_column(kind: SupSumKind, p: &SupSumParams, k: i64, cutoff: i64) -> f64 {
    bracket_pow(k as f64, 2.0 * p.s) * supsum_column_unweighted(kind, p, k, cutoff)
}

/// `k = 0, 1, 2, 4, ..., K`.
pub fn dyadic_grid(k_max: i64) -> Vec<i64> {
    let mut ks = alloc::vec![0];
    let mut k = 1;
    while k <= k_max {
        ks.push(k);
        k *= 2;
    }
    ks
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupSumSweep {
    pub kind: SupSumKind,
    pub s: f64,
    pub ks: Vec<i64>,
    pub values: Vec<f64>,
    pub running_sup: Vec<f64>,
    /// Log-log slope of the column sums against `<k>` over `k >= 1`.
    pub slope: f64,
    /// Whether the parameters satisfy the hypotheses of the estimate.
    pub in_range: bool,
}

impl SupSumSweep {
    /// Assembles a sweep from precomputed unweighted columns at `ks`.
    pub fn from_unweighted(kind: SupSumKind, p: &SupSumParams, ks: Vec<i64>, unweighted: &[f64]) -> Result<Self> {
        let values: Vec<f64> = ks
            .iter()
            .zip(unweighted)
            .map(|(&k, &u)| bracket_pow(k as f64, 2.0 * p.s) * u)
            .collect();
        let mut running_sup = Vec::with_capacity(values.len());
        let mut sup = 0.0f64;
        for &v in &values {
            sup = sup.max(v);
            running_sup.push(sup);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = ks
            .iter()
            .zip(&values)
            .filter(|(k, _)| **k >= 1)
            .map(|(&k, &v)| (bracket_f(k as f64), v))
            .unzip();
        let slope = if xs.len() >= 2 { loglog_slope(&xs, &ys)? } else { 0.0 };
        Ok(SupSumSweep {
            kind,
            s: p.s,
            ks,
            values,
            running_sup,
            slope,
            in_range: p.in_range(kind),
        })
    }

    pub fn sup(&self) -> f64 {
        self.running_sup.last().copied().unwrap_or(0.0)
    }
}

/// Sequential sweep over [`dyadic_grid`] with inner cutoff `8 K`.
pub fn supsum_sweep(kind: SupSumKind, p: &SupSumParams, k_max: i64) -> Result<SupSumSweep> {
    let ks = dyadic_grid(k_max);
    let cols: Vec<f64> = ks
        .iter()
        .map(|&k| supsum_column_unweighted(kind, p, k, 8 * k_max))
        .collect();
    SupSumSweep::from_unweighted(kind, p, ks, &cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, s0: f64, s1: f64, b: f64) -> SupSumParams {
        SupSumParams {
            s,
            s0,
            s1,
            b,
            alpha: ModelParams::rational(3, 4).unwrap(),
        }
    }

    #[test]
    fn lemma_a_at_origin() {
        let v = lemma_sum_a(2.0, 0.0, 0, 0, 1 << 16).unwrap();
        // sum_n (1 + |n|)^{-2} = pi^2 / 3 - 1
        let exact = core::f64::consts::PI * core::f64::consts::PI / 3.0 - 1.0;
        assert!((v.value - exact).abs() < 1e-9, "{v:?}");
        assert_eq!(v.bound, 1.0);
        assert!(v.value <= 1.0 + core::f64::consts::PI * core::f64::consts::PI / 3.0);
    }

    #[test]
    fn lemma_preconditions() {
        assert!(lemma_sum_a(0.4, 0.4, 0, 0, 100).is_err());
        assert!(lemma_sum_a(0.5, 0.7, 0, 0, 100).is_err());
        assert!(lemma_sum_c(0.5, 0.0, 0.0, 100).is_err());
        assert!(lemma_int_b(1.5, 0.0, 0.0).is_err());
        assert!(lemma_int_b(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn lemma_c_at_origin() {
        // direct partial sum to 10^6 plus the analytic tail 2/(10^6)
        let v = lemma_sum_c(1.0, 0.0, 0.0, 1000).unwrap();
        let mut direct = 0.0;
        for n in (-1_000_000i64..=1_000_000).rev() {
            direct += 1.0 / (1.0 + (n * n) as f64);
        }
        direct += 2.0 / 1_000_000.5;
        assert!((v - direct).abs() < 1e-9, "{v} {direct}");
    }

    #[test]
    fn lemma_b_closed_form() {
        // int (1 + |t|)^{-2} dt = 2
        let v = lemma_int_b(1.0, 0.0, 0.0).unwrap();
        assert!((v.value - 2.0).abs() < 1e-9, "{v:?}");
        // shifting both centers leaves the integral unchanged
        // high-precision quadrature reference
        let v = lemma_int_b(0.75, 16.0, 0.0).unwrap();
        assert!((v.value - 1.243_033_836_751_259).abs() < 1e-9, "{v:?}");
        let w = lemma_int_b(0.75, 37.0, 5.0).unwrap();
        let x = lemma_int_b(0.75, 32.0, 0.0).unwrap();
        assert!((w.value - x.value).abs() < 1e-9 * x.value);
    }

    #[test]
    fn admissibility_and_gains() {
        assert!(is_admissible(false, 1.0, 0.0));
        assert!(is_admissible(false, 0.25, -0.5 + 1e-9) || is_admissible(false, 0.0, -0.5));
        assert!(!is_admissible(false, 2.5, 1.0));
        assert!(is_admissible(true, 1.0, 0.5));
        assert!(!is_admissible(true, 0.4, 0.0));
        assert_eq!(theory_gains(false, 1.0, 0.0), (1.0, 1.0));
        assert_eq!(theory_gains(true, 1.0, 0.5), (0.5, 0.5));
        assert_eq!(theory_gains(false, 1.0, 0.5), (1.0, 1.0));
    }

    #[test]
    fn corners() {
        assert_eq!(SupSumParams::corner(SupSumKind::R1, 1.0, 0.0, 0.55), 2.0);
        assert!((SupSumParams::corner(SupSumKind::R2, 1.0, 0.0, 0.55) - 1.9).abs() < 1e-12);
        assert_eq!(SupSumParams::corner(SupSumKind::R3, 1.0, 0.0, 0.55), 1.0);
    }

    #[test]
    fn single_column_and_zero_column_are_finite() {
        for kind in SupSumKind::ALL {
            let p = params(1.0, 1.0, 0.0, 0.55);
            let sw = supsum_sweep(kind, &p, 1).unwrap();
            assert_eq!(sw.ks, [0, 1]);
            assert!(sw.values.iter().all(|v| v.is_finite() && *v > 0.0), "{sw:?}");
        }
    }

    #[test]
    fn columns_are_symmetric_in_k() {
        for kind in SupSumKind::ALL {
            let p = params(1.5, 1.0, 0.0, 0.55);
            for k in [1i64, 3, 6] {
                let a = supsum_column(kind, &p, k, 40);
                let b = supsum_column(kind, &p, -k, 40);
                assert!((a - b).abs() <= 1e-12 * a, "{kind:?} {k}: {a} {b}");
            }
        }
    }

    #[test]
    fn doubling_cutoff_changes_little() {
        for kind in SupSumKind::ALL {
            let p = params(SupSumParams::corner(kind, 1.0, 0.0, 0.55), 1.0, 0.0, 0.55);
            for k in [1i64, 8] {
                let a = supsum_column(kind, &p, k, 64);
                let b = supsum_column(kind, &p, k, 128);
                assert!((b - a).abs() <= 0.01 * b, "{kind:?} k={k}: {a} {b}");
            }
        }
    }
}
