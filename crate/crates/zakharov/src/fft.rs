//! rustfft backend for the core convolutions.

use std::sync::Arc;

use rustfft::FftPlanner;
use zakharov_core::fft::{Fft, FftProvider};
use zakharov_core::field::Complex;

/// Mixed-radix transforms on lengths of the form `2^a 3^b`.
pub struct RustFft;

pub static RUSTFFT: RustFft = RustFft;

struct Plan {
    len: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl Fft for Plan {
    fn len(&self) -> usize {
        self.len
    }

    fn forward(&self, buf: &mut [Complex]) {
        self.forward.process(buf);
    }

    fn inverse(&self, buf: &mut [Complex]) {
        self.inverse.process(buf);
    }
}

impl FftProvider for RustFft {
    fn plan(&self, len: usize) -> Box<dyn Fft> {
        let mut planner = FftPlanner::new();
        Box::new(Plan {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    fn supported_len(&self, min_len: usize) -> usize {
        smooth_len(min_len)
    }
}

/// Smallest `2^a 3^b >= n`.
pub fn smooth_len(n: usize) -> usize {
    let n = n.max(1);
    let mut best = n.next_power_of_two();
    let mut p3 = 1usize;
    while p3 < best {
        let mut m = p3;
        while m < n {
            m *= 2;
        }
        best = best.min(m);
        p3 *= 3;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use zakharov_core::convolution::Convolver;
    use zakharov_core::field::FourierField;
    use zakharov_core::random::{random_sobolev_field, RandomFieldOptions};

    #[test]
    fn smooth_lengths() {
        assert_eq!(smooth_len(1), 1);
        assert_eq!(smooth_len(193), 216);
        assert_eq!(smooth_len(769), 864);
        assert_eq!(smooth_len(1024), 1024);
        assert_eq!(smooth_len(1025), 1152);
    }

    #[test]
    fn matches_radix2_convolution() {
        let o = RandomFieldOptions::default();
        for radius in [8usize, 64, 100] {
            let f = random_sobolev_field(0.5, radius, 1, false, &o);
            let g = random_sobolev_field(1.0, radius, 2, false, &o);
            let a = Convolver::new(radius).convolve(&f, &g).unwrap();
            let mut conv = Convolver::with_provider(radius, &RUSTFFT);
            let b = conv.convolve(&f, &g).unwrap();
            let err = a.sub(&b).unwrap().max_abs() / a.max_abs();
            assert!(err < 1e-13, "radius {radius}: {err:e}");
        }
        let z = FourierField::zeros(4);
        assert_eq!(Convolver::with_provider(4, &RUSTFFT).convolve(&z, &z).unwrap(), z);
    }
}
