//! Alias-free truncated convolution.
//!
//! Inputs with modes `|k| <= N` are placed on a grid of `L >= 3N + 1`
//! points. Every product of two retained modes that lands in `|k| <= N` is
//! then exact: an aliased image of a product mode `p` (with `|p| <= 2N`)
//! would need `|p - k| >= L > |p| + |k|`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::fft::{Fft, FftProvider, RADIX2};
use crate::field::{check_radius, Complex, FourierField, ZERO};

pub struct Convolver {
    radius: usize,
    fft: Box<dyn Fft>,
    scratch_a: Vec<Complex>,
    scratch_b: Vec<Complex>,
}

impl Convolver {
    pub fn new(radius: usize) -> Self {
        Self::with_provider(radius, &RADIX2)
    }

    pub fn with_provider(radius: usize, provider: &dyn FftProvider) -> Self {
        let len = provider.supported_len(3 * radius + 1);
        let fft = provider.plan(len);
        Convolver {
            radius,
            fft,
            scratch_a: vec![ZERO; len],
            scratch_b: vec![ZERO; len],
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn grid_len(&self) -> usize {
        self.fft.len()
    }

    /// Point values `f(x_m)`, `x_m = 2 pi m / L`.
    pub fn to_grid(&self, coeffs: &[Complex], grid: &mut [Complex]) {
        let n = self.radius as i64;
        let len = grid.len() as i64;
        debug_assert_eq!(coeffs.len(), 2 * self.radius + 1);
        grid.fill(ZERO);
        for (i, &c) in coeffs.iter().enumerate() {
            let k = i as i64 - n;
            grid[k.rem_euclid(len) as usize] = c;
        }
        self.fft.inverse(grid);
    }

    /// Coefficients `|k| <= N` of the grid function; `grid` is overwritten.
    pub fn from_grid(&self, grid: &mut [Complex], out: &mut [Complex]) {
        let n = self.radius as i64;
        let len = grid.len() as i64;
        self.fft.forward(grid);
        let inv = 1.0 / len as f64;
        for (i, o) in out.iter_mut().enumerate() {
            let k = i as i64 - n;
            *o = grid[k.rem_euclid(len) as usize] * inv;
        }
    }

    /// `out_k = sum_{a + b = k} f_a g_b` for `|k| <= N`.
    pub fn convolve_into(&mut self, f: &[Complex], g: &[Complex], out: &mut [Complex]) {
        let mut a = core::mem::take(&mut self.scratch_a);
        let mut b = core::mem::take(&mut self.scratch_b);
        self.to_grid(f, &mut a);
        self.to_grid(g, &mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        self.from_grid(&mut a, out);
        self.scratch_a = a;
        self.scratch_b = b;
    }

    /// `(f_k - f_k conj)` style quadratic `sum_{a + b = k} f_a conj(f_{-b})`,
    /// i.e. the coefficients of `|f|^2`.
    pub fn abs_sq_into(&mut self, f: &[Complex], out: &mut [Complex]) {
        let mut a = core::mem::take(&mut self.scratch_a);
        self.to_grid(f, &mut a);
        for x in a.iter_mut() {
            *x = Complex::new(x.norm_sqr(), 0.0);
        }
        self.from_grid(&mut a, out);
        self.scratch_a = a;
    }

    pub fn convolve(&mut self, f: &FourierField, g: &FourierField) -> Result<FourierField> {
        check_radius(f, g)?;
        if f.radius() != self.radius {
            check_radius(f, &FourierField::zeros(self.radius))?;
        }
        let mut out = FourierField::zeros(self.radius);
        self.convolve_into(f.coeffs(), g.coeffs(), out.coeffs_mut());
        Ok(if f.is_real() && g.is_real() {
            out.assume_real()
        } else {
            out
        })
    }
}

/// One-shot alias-free convolution with the built-in FFT.
pub fn convolve(f: &FourierField, g: &FourierField) -> Result<FourierField> {
    check_radius(f, g)?;
    Convolver::new(f.radius()).convolve(f, g)
}

/// Coefficients of `|f|^2` restricted to `|k| <= N`.
pub fn abs_sq(f: &FourierField) -> FourierField {
    let mut conv = Convolver::new(f.radius());
    let mut out = FourierField::zeros(f.radius());
    conv.abs_sq_into(f.coeffs(), out.coeffs_mut());
    out.assume_real()
}
