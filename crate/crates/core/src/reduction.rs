//! Mean-zero gauge and the first-order `n±` formulation.
//!
//! `n_+ = n + i d^{-1} n_t` with `d = (-d_xx)^{1/2}`; `n_-` is never stored
//! since `n_- = conj(n_+)` pointwise.

use crate::dynamics::ZakharovState;
use crate::error::{Error, Result};
use crate::field::{check_radius, Complex, FourierField, ZERO};

/// Raw data `(u_0, n_0, n_1)` of the second-order system.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalTriple {
    pub u0: FourierField,
    pub n0: FourierField,
    pub n1: FourierField,
}

impl PhysicalTriple {
    pub fn new(u0: FourierField, n0: FourierField, n1: FourierField) -> Result<Self> {
        check_radius(&u0, &n0)?;
        check_radius(&u0, &n1)?;
        Ok(PhysicalTriple { u0, n0, n1 })
    }
}

/// Spatial means removed by [`gauge_normalize`]: `A` of `n_0`, `B` of `n_1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaugeRecord {
    pub a: f64,
    pub b: f64,
}

impl GaugeRecord {
    /// Phase `A t + B t^2 / 2` carried by the gauged Schrodinger field.
    pub fn phase(&self, t: f64) -> f64 {
        self.a * t + 0.5 * self.b * t * t
    }
}

/// Removes the means of `n_0`, `n_1`. The gauged solution `(v, m)` relates to
/// the original one by `u = e^{-i(At + Bt^2/2)} v`, `n = m + A + Bt`.
pub fn gauge_normalize(p: &PhysicalTriple) -> (PhysicalTriple, GaugeRecord) {
    let record = GaugeRecord {
        a: p.n0.get(0).re,
        b: p.n1.get(0).re,
    };
    let keep_real = |f: &FourierField| {
        let real = f.is_real();
        let g = f.clone().with_mean_zero();
        if real {
            g.assume_real()
        } else {
            g
        }
    };
    (
        PhysicalTriple {
            u0: p.u0.clone(),
            n0: keep_real(&p.n0),
            n1: keep_real(&p.n1),
        },
        record,
    )
}

/// Inverse of the gauge at time `t` applied to a gauged triple
/// `(u(t), n(t), n_t(t))`.
pub fn ungauge(p: &PhysicalTriple, t: f64, record: &GaugeRecord) -> PhysicalTriple {
    let phase = Complex::from_polar(1.0, -record.phase(t));
    let shift = |f: &FourierField, c: f64| {
        let real = f.is_real();
        let mut g = f.clone();
        g.set(0, f.get(0) + Complex::new(c, 0.0));
        if real {
            g.assume_real()
        } else {
            g
        }
    };
    PhysicalTriple {
        u0: p.u0.scale(phase),
        n0: shift(&p.n0, record.a + record.b * t),
        n1: shift(&p.n1, record.b),
    }
}

/// `(d f)_k = |k| f_k`.
pub fn apply_d(f: &FourierField) -> FourierField {
    let real = f.is_real();
    let g = f.map_modes(|k, c| c * k.unsigned_abs() as f64).with_mean_zero();
    if real {
        g.assume_real()
    } else {
        g
    }
}

/// `(d^{-1} f)_k = f_k / |k|` for `k != 0`, zero at `k = 0`.
pub fn apply_d_inverse(f: &FourierField) -> Result<FourierField> {
    let f0 = f.get(0);
    if f0 != ZERO {
        return Err(Error::NotMeanZero(f0.norm()));
    }
    let real = f.is_real();
    let g = f
        .map_modes(|k, c| if k == 0 { ZERO } else { c / k.unsigned_abs() as f64 })
        .with_mean_zero();
    Ok(if real { g.assume_real() } else { g })
}

/// `n_+ = n_0 + i d^{-1} n_1` at time zero.
pub fn to_plus_minus(p: &PhysicalTriple) -> Result<ZakharovState> {
    let nu = apply_d_inverse(&p.n1)?;
    let n0 = &p.n0;
    if n0.get(0) != ZERO {
        return Err(Error::NotMeanZero(n0.get(0).norm()));
    }
    let i = Complex::new(0.0, 1.0);
    let np = n0.add(&nu.scale(i))?.with_mean_zero();
    ZakharovState::new(p.u0.clone(), np, 0.0)
}

/// Physical density `n = (n_+ + n_-)/2` and `n_t = d(n_+ - n_-)/(2i)`.
pub fn from_plus_minus(state: &ZakharovState) -> PhysicalTriple {
    let np = &state.n_plus;
    let nm = np.conj_reflect();
    let n = np.add(&nm).unwrap().scale(Complex::new(0.5, 0.0)).assume_real();
    let diff = np.sub(&nm).unwrap().scale(Complex::new(0.0, -0.5)).assume_real();
    PhysicalTriple {
        u0: state.u.clone(),
        n0: n.with_mean_zero(),
        n1: apply_d(&diff).with_mean_zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_sobolev_field, RandomFieldOptions};

    fn real_opts() -> RandomFieldOptions {
        RandomFieldOptions {
            real: true,
            ..Default::default()
        }
    }

    fn one() -> Complex {
        Complex::new(1.0, 0.0)
    }

    #[test]
    fn gauge_cases() {
        let u = FourierField::delta(8, 1, one());
        let n0 = random_sobolev_field(0.0, 8, 1, true, &real_opts());
        let n1 = random_sobolev_field(0.0, 8, 2, true, &real_opts());
        let p = PhysicalTriple::new(u.clone(), n0, n1).unwrap();
        let (q, r) = gauge_normalize(&p);
        assert_eq!(r, GaugeRecord { a: 0.0, b: 0.0 });
        assert_eq!(q.n0.coeffs(), p.n0.coeffs());

        let two = FourierField::delta(8, 0, Complex::new(2.0, 0.0)).assume_real();
        let p = PhysicalTriple::new(u, two, FourierField::zeros(8).assume_real()).unwrap();
        let (q, r) = gauge_normalize(&p);
        assert_eq!(r.a, 2.0);
        assert_eq!(r.b, 0.0);
        assert_eq!(q.n0.max_abs(), 0.0);
        let back = ungauge(&q, 0.0, &r);
        assert_eq!(back.n0.get(0).re, 2.0);
    }

    #[test]
    fn d_and_inverse() {
        let f = FourierField::delta(5, -3, Complex::new(0.5, 1.0));
        assert_eq!(apply_d(&f).get(-3), Complex::new(1.5, 3.0));
        let g = random_sobolev_field(0.3, 40, 5, true, &RandomFieldOptions::default());
        let back = apply_d_inverse(&apply_d(&g)).unwrap();
        assert!(back.sub(&g).unwrap().max_abs() <= 1e-15 * g.max_abs());
        let h = apply_d(&apply_d_inverse(&g).unwrap());
        assert!(h.sub(&g).unwrap().max_abs() <= 1e-15 * g.max_abs());
        let bad = FourierField::delta(5, 0, one());
        assert!(matches!(apply_d_inverse(&bad), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn plus_minus_examples() {
        let n0 = random_sobolev_field(0.0, 10, 3, true, &real_opts());
        let p = PhysicalTriple::new(FourierField::zeros(10), n0.clone(), FourierField::zeros(10).assume_real()).unwrap();
        let s = to_plus_minus(&p).unwrap();
        assert_eq!(s.n_plus.coeffs(), n0.coeffs());

        let n1 = FourierField::from_fn(10, |k| if k.abs() == 1 { one() } else { ZERO }).assume_real();
        let p = PhysicalTriple::new(FourierField::zeros(10), FourierField::zeros(10), n1).unwrap();
        let s = to_plus_minus(&p).unwrap();
        let i = Complex::new(0.0, 1.0);
        for (k, c) in s.n_plus.modes() {
            assert_eq!(c, if k.abs() == 1 { i } else { ZERO });
        }
    }

    #[test]
    fn roundtrip_and_wave_energy_identity() {
        for seed in 0..10 {
            let u = random_sobolev_field(1.0, 32, seed, false, &RandomFieldOptions::default());
            let n0 = random_sobolev_field(0.0, 32, seed + 50, true, &real_opts());
            let n1 = random_sobolev_field(-1.0, 32, seed + 90, true, &real_opts());
            let p = PhysicalTriple::new(u, n0, n1).unwrap();
            let s = to_plus_minus(&p).unwrap();
            let q = from_plus_minus(&s);
            for (a, b) in [(&q.n0, &p.n0), (&q.n1, &p.n1)] {
                assert!(a.sub(b).unwrap().max_abs() <= 1e-15 * b.max_abs().max(1.0));
                assert!(a.conjugate_symmetry_defect() <= 1e-13);
            }
            let np2 = s.n_plus.l2_norm_sq();
            let nm2 = s.n_plus.conj_reflect().l2_norm_sq();
            let lhs = 0.25 * (np2 + nm2);
            let rhs = 0.5 * p.n0.l2_norm_sq() + 0.5 * apply_d_inverse(&p.n1).unwrap().l2_norm_sq();
            assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }
    }
}
