//! Truncated Fourier series on the torus.
//!
//! A [`FourierField`] of radius `N` stores the coefficients `f_k` for
//! `k = -N..=N`, i.e. the function `f(x) = sum_k f_k e^{ikx}`. Norms use the
//! sequence normalization (no factor of `2 pi`) with weight
//! `<k> = 1 + |k|`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);

/// Japanese bracket `<k> = 1 + |k|`.
#[inline]
pub fn bracket(k: i64) -> f64 {
    1.0 + k.unsigned_abs() as f64
}

/// Real-valued version of [`bracket`], `<x> = 1 + |x|`.
#[inline]
pub fn bracket_f(x: f64) -> f64 {
    1.0 + libm::fabs(x)
}

/// Sobolev regularity exponent.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(pub f64);

impl From<f64> for SobolevIndex {
    fn from(s: f64) -> Self {
        SobolevIndex(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    radius: usize,
    coeffs: Vec<Complex>,
    mean_zero: bool,
    real: bool,
}

impl FourierField {
    pub fn zeros(radius: usize) -> Self {
        FourierField {
            radius,
            coeffs: vec![ZERO; 2 * radius + 1],
            mean_zero: false,
            real: false,
        }
    }

    /// Builds a field from `f(k)` evaluated for every retained mode.
    pub fn from_fn(radius: usize, mut f: impl FnMut(i64) -> Complex) -> Self {
        let n = radius as i64;
        FourierField {
            radius,
            coeffs: (-n..=n).map(&mut f).collect(),
            mean_zero: false,
            real: false,
        }
    }

    /// Coefficients ordered from `k = -N` to `k = N`.
    pub fn from_coeffs(coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::precondition("coefficient vector must have odd length 2N+1"));
        }
        Ok(FourierField {
            radius: coeffs.len() / 2,
            coeffs,
            mean_zero: false,
            real: false,
        })
    }

    /// Single mode `amp * e^{ikx}`.
    pub fn delta(radius: usize, k: i64, amp: Complex) -> Self {
        let mut f = Self::zeros(radius);
        f.set(k, amp);
        f
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    fn index(&self, k: i64) -> Option<usize> {
        if k.unsigned_abs() as usize > self.radius {
            None
        } else {
            Some((k + self.radius as i64) as usize)
        }
    }

    /// Coefficient at mode `k`; zero outside the retained range.
    #[inline]
    pub fn get(&self, k: i64) -> Complex {
        self.index(k).map_or(ZERO, |i| self.coeffs[i])
    }

    /// Sets mode `k`. Clears the mean-zero and real flags when they could be
    /// violated.
    pub fn set(&mut self, k: i64, value: Complex) {
        let i = self
            .index(k)
            .unwrap_or_else(|| panic!("mode {k} outside radius {}", self.radius));
        self.coeffs[i] = value;
        if k == 0 && value != ZERO {
            self.mean_zero = false;
        }
        self.real = false;
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex] {
        self.mean_zero = false;
        self.real = false;
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex> {
        self.coeffs
    }

    /// `(k, f_k)` pairs in increasing `k`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex)> + '_ {
        let n = self.radius as i64;
        (-n..=n).zip(self.coeffs.iter().copied())
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean_zero
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Zeroes the `k = 0` coefficient and flags the field as mean-zero.
    pub fn with_mean_zero(mut self) -> Self {
        let c = self.radius;
        self.coeffs[c] = ZERO;
        self.mean_zero = true;
        self
    }

    /// Flags the field as real-valued without touching the data. Use only when
    /// the coefficients are conjugate-symmetric by construction.
    pub fn assume_real(mut self) -> Self {
        self.real = true;
        self
    }

    /// Projects onto real-valued functions, `f_k <- (f_k + conj f_{-k}) / 2`.
    pub fn symmetrize_real(mut self) -> Self {
        let n = self.radius as i64;
        for k in 0..=n {
            let a = self.get(k);
            let b = self.get(-k).conj();
            let m = (a + b) * 0.5;
            let i = self.index(k).unwrap();
            let j = self.index(-k).unwrap();
            self.coeffs[i] = m;
            self.coeffs[j] = m.conj();
        }
        self.real = true;
        self
    }

    /// `max_k |f_k - conj f_{-k}|`; zero for real-valued functions.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.modes()
            .map(|(k, c)| (c - self.get(-k).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `g_k = conj(f_{-k})`, the coefficients of the pointwise conjugate.
    pub fn conj_reflect(&self) -> Self {
        let n = self.radius as i64;
        FourierField {
            radius: self.radius,
            coeffs: (-n..=n).map(|k| self.get(-k).conj()).collect(),
            mean_zero: self.mean_zero,
            real: self.real,
        }
    }

    /// Applies `f(k, f_k)` mode by mode. Flags are dropped.
    pub fn map_modes(&self, mut f: impl FnMut(i64, Complex) -> Complex) -> Self {
        let n = self.radius as i64;
        FourierField {
            radius: self.radius,
            coeffs: (-n..=n).zip(self.coeffs.iter()).map(|(k, &c)| f(k, c)).collect(),
            mean_zero: false,
            real: false,
        }
    }

    pub fn scale(&self, a: Complex) -> Self {
        let mut out = self.map_modes(|_, c| c * a);
        out.mean_zero = self.mean_zero;
        out.real = self.real && a.im == 0.0;
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        check_radius(self, other)?;
        Ok(FourierField {
            radius: self.radius,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            mean_zero: self.mean_zero && other.mean_zero,
            real: self.real && other.real,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// `sum_k |f_k|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same function with a different truncation radius (zero-padded or cut).
    pub fn resized(&self, radius: usize) -> Self {
        let mut out = FourierField::from_fn(radius, |k| self.get(k));
        out.mean_zero = self.mean_zero;
        out.real = self.real;
        out
    }
}

pub(crate) fn check_radius(a: &FourierField, b: &FourierField) -> Result<()> {
    if a.radius != b.radius {
        Err(Error::RadiusMismatch {
            left: a.radius,
            right: b.radius,
        })
    } else {
        Ok(())
    }
}

/// `( sum_k <k>^{2s} |f_k|^2 )^{1/2}`.
pub fn sobolev_norm(f: &FourierField, s: impl Into<SobolevIndex>) -> f64 {
    let s = s.into().0;
    let sum: f64 = f
        .modes()
        .map(|(k, c)| libm::pow(bracket(k), 2.0 * s) * c.norm_sqr())
        .sum();
    libm::sqrt(sum)
}

/// Sobolev norm restricted to `lo <= |k| <= hi`.
pub fn sobolev_norm_band(f: &FourierField, s: f64, lo: usize, hi: usize) -> f64 {
    let sum: f64 = f
        .modes()
        .filter(|(k, _)| {
            let a = k.unsigned_abs() as usize;
            a >= lo && a <= hi
        })
        .map(|(k, c)| libm::pow(bracket(k), 2.0 * s) * c.norm_sqr())
        .sum();
    libm::sqrt(sum)
}

/// `phi_beta(k) = sum_{1 <= |n| <= |k|} |n|^{-beta}`; the `n = 0` term is
/// left out and `phi_beta(0) = 0`.
pub fn phi_beta(beta: f64, k: i64) -> f64 {
    let m = k.unsigned_abs();
    let mut acc = 0.0;
    // small terms first
    for n in (1..=m).rev() {
        acc += libm::pow(n as f64, -beta);
    }
    2.0 * acc
}
