//! Spectral numerics for the one-dimensional Zakharov system on the torus.
//!
//! The crate is `no_std` (it needs `alloc`) and carries the numerical
//! substrate only: Fourier-coefficient fields, alias-free convolution,
//! the `n±` reduction, an integrating-factor time stepper, the
//! differentiation-by-parts normal form with its resonance bookkeeping,
//! smoothing and attractor diagnostics, and brute-force checks of the
//! multiplier sums behind the smoothing estimates.
//!
//! IO, configuration files, the command line and the faster FFT backend
//! live in the `zakharov` companion crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod convolution;
pub mod dissipative;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod field;
pub mod fit;
pub mod normal_form;
pub mod quadrature;
pub mod random;
pub mod reduction;
pub mod regularity;
pub mod resonance;
pub mod smoothing;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use convolution::{convolve, Convolver};
pub use dynamics::{ModelParams, ZakharovState};
pub use error::{Error, Result};
pub use fft::{Fft, FftProvider, RADIX2};
pub use field::{bracket, phi_beta, sobolev_norm, Complex, FourierField, SobolevIndex};
