//! Seeded random data with a prescribed Sobolev decay.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{bracket, Complex, FourierField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFieldOptions {
    /// Extra decay beyond `s + 1/2`; keeps the data in `H^s` but out of
    /// `H^{s + epsilon}`.
    pub epsilon: f64,
    /// Overall amplitude multiplier.
    pub amplitude: f64,
    /// Conjugate-symmetrize so the field is real-valued.
    pub real: bool,
}

impl Default for RandomFieldOptions {
    fn default() -> Self {
        RandomFieldOptions {
            epsilon: 0.05,
            amplitude: 1.0,
            real: false,
        }
    }
}

/// Uniform sample in `[0, 1)` with 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `f_k = A (1 + |k|)^{-s - 1/2 - epsilon} e^{i theta_k}` with phases drawn
/// from ChaCha8 seeded by `seed`, one per mode in the order `0, 1, -1, 2, -2, ...`
/// so the field at radius `2N` extends the one at radius `N`.
///
/// Real fields keep `|f_k|` and use the phase of `k > 0` mirrored to `-k`;
/// the `k = 0` coefficient then becomes `A cos(theta_0)`.
pub fn random_sobolev_field(
    s: f64,
    radius: usize,
    seed: u64,
    mean_zero: bool,
    opts: &RandomFieldOptions,
) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = radius as i64;
    let mut phases = alloc::vec![0.0; 2 * radius + 1];
    phases[radius] = 2.0 * core::f64::consts::PI * unit(&mut rng);
    for m in 1..=n {
        for k in [m, -m] {
            phases[(k + n) as usize] = 2.0 * core::f64::consts::PI * unit(&mut rng);
        }
    }
    let exponent = -s - 0.5 - opts.epsilon;
    let amp = |k: i64| opts.amplitude * libm::pow(bracket(k), exponent);
    let mut f = if opts.real {
        FourierField::from_fn(radius, |k| {
            let th = phases[(k.abs() + n) as usize];
            let a = amp(k);
            if k == 0 {
                Complex::new(a * libm::cos(th), 0.0)
            } else if k > 0 {
                Complex::from_polar(a, th)
            } else {
                Complex::from_polar(a, -th)
            }
        })
        .assume_real()
    } else {
        FourierField::from_fn(radius, |k| Complex::from_polar(amp(k), phases[(k + n) as usize]))
    };
    if mean_zero {
        f = f.with_mean_zero();
    }
    f
}
