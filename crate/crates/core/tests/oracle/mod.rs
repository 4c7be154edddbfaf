//! Direct-sum evaluation of the Fourier-side formulas, written loop by loop
//! with resonances detected in integer arithmetic (`alpha = p/q`).
//!
//! Shared by the core oracle tests and the acceptance target.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: C = C::new(0.0, 1.0);

pub struct Oracle {
    pub p: i64,
    pub q: i64,
    pub n: i64,
}

/// Coefficients indexed `k = -N..=N`.
pub type Coeffs = Vec<C>;

impl Oracle {
    pub fn new(p: i64, q: i64, n: usize) -> Self {
        Oracle { p, q, n: n as i64 }
    }

    fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    fn at(&self, f: &[C], k: i64) -> C {
        if k.abs() > self.n {
            C::new(0.0, 0.0)
        } else {
            f[(k + self.n) as usize]
        }
    }

    fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -self.n..=self.n
    }

    fn build(&self, mut g: impl FnMut(i64) -> C) -> Coeffs {
        self.modes().map(&mut g).collect()
    }

    /// `n_-(j) = conj(n_+(-j))`.
    pub fn n_minus(&self, np: &[C]) -> Coeffs {
        self.build(|j| self.at(np, -j).conj())
    }

    /// `n = (n_+ + n_-)/2`.
    pub fn density(&self, np: &[C]) -> Coeffs {
        let nm = self.n_minus(np);
        self.build(|j| (self.at(np, j) + self.at(&nm, j)) * 0.5)
    }

    /// Truncated `(n u)_k`.
    pub fn product(&self, n: &[C], u: &[C]) -> Coeffs {
        self.build(|k| {
            let mut acc = C::new(0.0, 0.0);
            for k1 in self.modes() {
                acc += self.at(n, k1) * self.at(u, k - k1);
            }
            acc
        })
    }

    /// Truncated `(|u|^2)_j = sum u_{j1} conj(u_{j1 - j})`.
    pub fn modsq(&self, u: &[C]) -> Coeffs {
        self.build(|j| {
            let mut acc = C::new(0.0, 0.0);
            for j1 in self.modes() {
                acc += self.at(u, j1) * self.at(u, j1 - j).conj();
            }
            acc
        })
    }

    /// `q D^sigma(k, k1) = p (k^2 - (k - k1)^2) - sigma q |k1|`.
    fn schro_den_q(&self, k: i64, k1: i64, sigma: i64) -> i64 {
        let k2 = k - k1;
        self.p * (k * k - k2 * k2) - sigma * self.q * k1.abs()
    }

    /// `q D(j, j1) = q |j| - p j1^2 + p (j - j1)^2`.
    fn wave_den_q(&self, j: i64, j1: i64) -> i64 {
        let j2 = j - j1;
        self.q * j.abs() - self.p * j1 * j1 + self.p * j2 * j2
    }

    pub fn rhs(&self, u: &[C], np: &[C]) -> (Coeffs, Coeffs) {
        self.rhs_damped(u, np, 0.0, None)
    }

    pub fn rhs_damped(&self, u: &[C], np: &[C], gamma: f64, f: Option<&[C]>) -> (Coeffs, Coeffs) {
        let a = self.alpha();
        let nu = self.product(&self.density(np), u);
        let w = self.modsq(u);
        let du = self.build(|k| {
            let mut d = -I * (a * (k * k) as f64) * self.at(u, k) - gamma * self.at(u, k) - I * self.at(&nu, k);
            if let Some(f) = f {
                d -= I * self.at(f, k);
            }
            d
        });
        let dn = self.build(|j| {
            if j == 0 {
                return C::new(0.0, 0.0);
            }
            let m = j.abs() as f64;
            -I * m * self.at(np, j) - gamma * self.at(np, j) - I * m * self.at(&w, j)
        });
        (du, dn)
    }

    /// `(1/2) sum_sigma c_sigma sum_{k1 != 0, D != 0} a^sigma_{k1} b_{k-k1} / D^sigma`.
    fn schro_sum(&self, a: [&[C]; 2], coef: [f64; 2], b: &[C]) -> Coeffs {
        self.build(|k| {
            let mut acc = C::new(0.0, 0.0);
            for (s, sigma) in [1i64, -1].into_iter().enumerate() {
                for k1 in self.modes() {
                    if k1 == 0 || (k - k1).abs() > self.n {
                        continue;
                    }
                    let dq = self.schro_den_q(k, k1, sigma);
                    if dq == 0 {
                        continue;
                    }
                    let d = dq as f64 / self.q as f64;
                    acc += coef[s] * self.at(a[s], k1) * self.at(b, k - k1) / d;
                }
            }
            acc * 0.5
        })
    }

    fn schro_resonant(&self, a: [&[C]; 2], b: &[C]) -> Coeffs {
        self.build(|k| {
            let mut acc = C::new(0.0, 0.0);
            for (s, sigma) in [1i64, -1].into_iter().enumerate() {
                for k1 in self.modes() {
                    if k1 != 0 && (k - k1).abs() <= self.n && self.schro_den_q(k, k1, sigma) == 0 {
                        acc += self.at(a[s], k1) * self.at(b, k - k1);
                    }
                }
            }
            acc * 0.5
        })
    }

    /// `|j| sum_{j1, D != 0} a_{j1} conj(b_{-(j - j1)}) / D(j, j1)`.
    fn wave_sum(&self, a: &[C], b: &[C]) -> Coeffs {
        self.build(|j| {
            if j == 0 {
                return C::new(0.0, 0.0);
            }
            let mut acc = C::new(0.0, 0.0);
            for j1 in self.modes() {
                let j2 = j - j1;
                if j2.abs() > self.n {
                    continue;
                }
                let dq = self.wave_den_q(j, j1);
                if dq == 0 {
                    continue;
                }
                let d = dq as f64 / self.q as f64;
                acc += self.at(a, j1) * self.at(b, -j2).conj() / d;
            }
            acc * j.abs() as f64
        })
    }

    pub fn b1(&self, u: &[C], np: &[C]) -> Coeffs {
        let nm = self.n_minus(np);
        self.schro_sum([np, &nm], [1.0, 1.0], u)
    }

    pub fn b2(&self, u: &[C]) -> Coeffs {
        self.wave_sum(u, u)
    }

    pub fn r1(&self, u: &[C]) -> Coeffs {
        let w = self.modsq(u);
        let dw = self.build(|p| self.at(&w, p) * p.abs() as f64);
        self.schro_sum([&dw, &dw], [1.0, -1.0], u)
    }

    pub fn r2(&self, u: &[C], np: &[C]) -> Coeffs {
        let nm = self.n_minus(np);
        let nu = self.product(&self.density(np), u);
        self.schro_sum([np, &nm], [1.0, 1.0], &nu)
    }

    pub fn r3(&self, u: &[C], np: &[C]) -> Coeffs {
        let nu = self.product(&self.density(np), u);
        self.wave_sum(&nu, u)
    }

    pub fn r4(&self, u: &[C], np: &[C]) -> Coeffs {
        let nu = self.product(&self.density(np), u);
        self.wave_sum(u, &nu).into_iter().map(|c| -c).collect()
    }

    pub fn rho1(&self, u: &[C], np: &[C]) -> Coeffs {
        let nm = self.n_minus(np);
        self.schro_resonant([np, &nm], u)
    }

    /// `|j| sum_{D = 0} u_{j1} conj(u_{-(j - j1)})`.
    pub fn rho2(&self, u: &[C]) -> Coeffs {
        self.build(|j| {
            let mut acc = C::new(0.0, 0.0);
            for j1 in self.modes() {
                let j2 = j - j1;
                if j != 0 && j2.abs() <= self.n && self.wave_den_q(j, j1) == 0 {
                    acc += self.at(u, j1) * self.at(u, -j2).conj();
                }
            }
            acc * j.abs() as f64
        })
    }

    /// I.i.d. coefficients uniform in the unit square scaled by `amp`.
    pub fn random(&self, seed: u64, amp: f64, mean_zero: bool) -> Coeffs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        self.build(|k| {
            let c = C::new(unit(), unit()) * amp;
            if mean_zero && k == 0 {
                C::new(0.0, 0.0)
            } else {
                c
            }
        })
    }
}

/// State `(u, n, n_t)` of the second-order system
/// `i u_t + alpha u_xx = n u`, `n_tt - n_xx = (|u|^2)_xx`, mean modes included.
#[derive(Clone)]
pub struct Ungauged {
    pub u: Coeffs,
    pub n: Coeffs,
    pub m: Coeffs,
}

impl Oracle {
    fn ungauged_rate(&self, y: &Ungauged) -> Ungauged {
        let nu = self.product(&y.n, &y.u);
        let w = self.modsq(&y.u);
        Ungauged {
            u: nu.iter().map(|c| -I * c).collect(),
            n: vec![C::new(0.0, 0.0); y.n.len()],
            m: self.build(|k| -((k * k) as f64) * self.at(&w, k)),
        }
    }

    /// Exact linear flow over time `h`.
    fn ungauged_linear(&self, y: &Ungauged, h: f64) -> Ungauged {
        let a = self.alpha();
        let mut out = y.clone();
        for (i, k) in self.modes().enumerate() {
            out.u[i] = y.u[i] * C::from_polar(1.0, -a * (k * k) as f64 * h);
            let w = k.abs() as f64;
            if k == 0 {
                out.n[i] = y.n[i] + y.m[i] * h;
            } else {
                let (s, c) = (w * h).sin_cos();
                out.n[i] = y.n[i] * c + y.m[i] * (s / w);
                out.m[i] = -y.n[i] * (w * s) + y.m[i] * c;
            }
        }
        out
    }

    /// Lawson fourth-order Runge-Kutta with `steps` equal steps.
    pub fn solve_ungauged(&self, y0: &Ungauged, t_end: f64, steps: usize) -> Ungauged {
        let h = t_end / steps as f64;
        let axpy = |a: &Ungauged, s: f64, b: &Ungauged| Ungauged {
            u: a.u.iter().zip(&b.u).map(|(x, y)| x + y * s).collect(),
            n: a.n.iter().zip(&b.n).map(|(x, y)| x + y * s).collect(),
            m: a.m.iter().zip(&b.m).map(|(x, y)| x + y * s).collect(),
        };
        let mut y = y0.clone();
        for _ in 0..steps {
            let k1 = self.ungauged_rate(&y);
            let yh = self.ungauged_linear(&y, h / 2.0);
            let k1h = self.ungauged_linear(&k1, h / 2.0);
            let k2 = self.ungauged_rate(&axpy(&yh, h / 2.0, &k1h));
            let k3 = self.ungauged_rate(&axpy(&yh, h / 2.0, &k2));
            let k3h = self.ungauged_linear(&k3, h / 2.0);
            let k4 = self.ungauged_rate(&axpy(&self.ungauged_linear(&y, h), h, &k3h));
            let mut acc = self.ungauged_linear(&k1, h);
            acc = axpy(&acc, 2.0, &self.ungauged_linear(&k2, h / 2.0));
            acc = axpy(&acc, 2.0, &self.ungauged_linear(&k3, h / 2.0));
            acc = axpy(&acc, 1.0, &k4);
            y = axpy(&self.ungauged_linear(&y, h), h / 6.0, &acc);
        }
        y
    }
}

/// `max |a - b| / max |b|`.
pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
