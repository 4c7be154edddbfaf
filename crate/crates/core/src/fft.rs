//! Complex FFT backends.
//!
//! The built-in [`Radix2`] transform is a plain iterative power-of-two FFT so
//! the crate stays `no_std`. Faster backends plug in through
//! [`FftProvider`].

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::field::Complex;

/// Unnormalized discrete Fourier transform of a fixed length.
///
/// `forward` computes `X_m = sum_n x_n e^{-2 pi i m n / L}`, `inverse` the same
/// with the opposite sign and no `1/L` factor.
#[allow(clippy::len_without_is_empty)]
pub trait Fft: Send + Sync {
    fn len(&self) -> usize;
    fn forward(&self, buf: &mut [Complex]);
    fn inverse(&self, buf: &mut [Complex]);
}

pub trait FftProvider: Sync {
    fn plan(&self, len: usize) -> Box<dyn Fft>;

    /// Smallest supported transform length `>= min_len`.
    fn supported_len(&self, min_len: usize) -> usize {
        min_len.next_power_of_two()
    }
}

pub struct Radix2 {
    len: usize,
    twiddles: Vec<Complex>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "radix-2 FFT needs a power-of-two length, got {len}");
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|j| {
                let theta = -2.0 * core::f64::consts::PI * j as f64 / len as f64;
                Complex::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Radix2 {
            len,
            twiddles,
            bitrev,
        }
    }

    fn transform(&self, buf: &mut [Complex], inverse: bool) {
        let n = self.len;
        assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for j in 0..half {
                    let mut w = self.twiddles[j * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

impl Fft for Radix2 {
    fn len(&self) -> usize {
        self.len
    }

    fn forward(&self, buf: &mut [Complex]) {
        self.transform(buf, false);
    }

    fn inverse(&self, buf: &mut [Complex]) {
        self.transform(buf, true);
    }
}

pub struct Radix2Provider;

pub static RADIX2: Radix2Provider = Radix2Provider;

impl FftProvider for Radix2Provider {
    fn plan(&self, len: usize) -> Box<dyn Fft> {
        Box::new(Radix2::new(len))
    }
}
