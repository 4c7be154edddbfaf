//! Differentiation by parts for the truncated system.
//!
//! In interaction-picture form the quadratic terms carry phases whose
//! nonresonant part can be integrated by parts in time. For the Schrodinger
//! component this gives
//!
//! ```text
//! i d_t[e^{i alpha k^2 t}(u_k + B1_k)] = e^{i alpha k^2 t}(rho1 + R1 + R2)_k
//! ```
//!
//! and for `n_+`
//!
//! ```text
//! i d_t[e^{i|j|t}(n_j + B2_j)] = e^{i|j|t}(rho2 + R3 + R4)_j
//! ```
//!
//! Since `n = (n_+ + n_-)/2`, every Schrodinger-side term is the average of an
//! `n_+` and an `n_-` contribution; the `n_-` one uses the phase
//! `alpha k^2 - alpha k2^2 + |k1|` (see [`WaveBranch`]).
//!
//! All sums range over the retained modes, and the cubic terms use the same
//! truncated products `P(n u)`, `P(|u|^2)` as the time stepper, so the
//! identities hold exactly for the truncated system.

use alloc::vec;
use alloc::vec::Vec;

use crate::convolution::Convolver;
use crate::dynamics::{self, ModelParams, Trajectory, ZakharovState};
use crate::error::{Error, Result};
use crate::field::{check_radius, Complex, FourierField, ZERO};
use crate::quadrature::simpson_samples;
use crate::resonance::{ResonanceClassifier, WaveBranch};

const I: Complex = Complex::new(0.0, 1.0);

/// Which conjugate index to use in the resonant wave term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rho2Variant {
    /// `|j| u_{j1} conj(u_{-j2})` over resonant `(j1, j2)`, i.e. the resonant
    /// part of the wave sum itself.
    #[default]
    Substituted,
    /// `|j| u_{j1} conj(u_{j2})`, the displayed closed form with the sign of
    /// the conjugated index as printed.
    AsPrinted,
}

/// Normal-form operators for one dispersion coefficient and truncation
/// radius, with tabulated inverse denominators (zero on resonances).
pub struct NormalForm {
    params: ModelParams,
    cls: ResonanceClassifier,
    radius: usize,
    schro_inv: [Vec<f64>; 2],
    wave_inv: Vec<f64>,
    conv: Convolver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormTerms {
    pub b1: FourierField,
    pub b2: FourierField,
    pub rho1: FourierField,
    pub rho2: FourierField,
    pub r1: FourierField,
    pub r2: FourierField,
    pub r3: FourierField,
    pub r4: FourierField,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityOptions {
    /// Drop `rho1`, `rho2` from the right-hand sides.
    pub without_rho: bool,
    pub rho2_variant: Rho2Variant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual {
    /// `max_{|k| <= N/2}` of the Schrodinger-side residual.
    pub residual_u: f64,
    /// `max_{|j| <= N/2}` of the wave-side residual.
    pub residual_n: f64,
    /// Size of the individual terms entering the identity, for scaling.
    pub input_scale: f64,
    pub excluded_tuples: usize,
}

impl IdentityResidual {
    pub fn max(&self) -> f64 {
        self.residual_u.max(self.residual_n)
    }
}

impl NormalForm {
    pub fn new(params: &ModelParams, radius: usize) -> Self {
        let cls = ResonanceClassifier::new(params);
        let n = radius as i64;
        let m = 2 * radius + 1;
        let mut schro_inv = [vec![0.0; m * m], vec![0.0; m * m]];
        let mut wave_inv = vec![0.0; m * m];
        for k in -n..=n {
            for k1 in -n..=n {
                let idx = ((k + n) as usize) * m + (k1 + n) as usize;
                if k1 != 0 {
                    schro_inv[0][idx] = cls.schro_inverse(k, k1, WaveBranch::Plus);
                    schro_inv[1][idx] = cls.schro_inverse(k, k1, WaveBranch::Minus);
                }
                if k != 0 {
                    wave_inv[idx] = cls.wave_inverse(k, k1);
                }
            }
        }
        NormalForm {
            params: *params,
            cls,
            radius,
            schro_inv,
            wave_inv,
            conv: Convolver::new(radius),
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn classifier(&self) -> &ResonanceClassifier {
        &self.cls
    }

    fn check(&self, f: &FourierField) -> Result<()> {
        check_radius(f, &FourierField::zeros(self.radius))
    }

    /// `sum*_{k1 != 0} a_{k1} b_{k - k1} / D^sigma(k, k1)`.
    pub fn schro_bilinear(&self, a: &FourierField, b: &FourierField, branch: WaveBranch) -> FourierField {
        let n = self.radius as i64;
        let m = 2 * self.radius + 1;
        let table = &self.schro_inv[(branch == WaveBranch::Minus) as usize];
        let (ac, bc) = (a.coeffs(), b.coeffs());
        FourierField::from_fn(self.radius, |k| {
            let lo = (k - n).max(-n);
            let hi = (k + n).min(n);
            let row = &table[((k + n) as usize) * m..][..m];
            let mut acc = ZERO;
            for k1 in lo..=hi {
                let w = row[(k1 + n) as usize];
                if w != 0.0 {
                    acc += ac[(k1 + n) as usize] * bc[(k - k1 + n) as usize] * w;
                }
            }
            acc
        })
    }

    /// `|j| sum*_{j1} a_{j1} conj(b_{-(j - j1)}) / D(j, j1)`, zero at `j = 0`.
    pub fn wave_bilinear(&self, a: &FourierField, b: &FourierField) -> FourierField {
        let n = self.radius as i64;
        let m = 2 * self.radius + 1;
        let (ac, bc) = (a.coeffs(), b.coeffs());
        FourierField::from_fn(self.radius, |j| {
            if j == 0 {
                return ZERO;
            }
            let lo = (j - n).max(-n);
            let hi = (j + n).min(n);
            let row = &self.wave_inv[((j + n) as usize) * m..][..m];
            let mut acc = ZERO;
            for j1 in lo..=hi {
                let w = row[(j1 + n) as usize];
                if w != 0.0 {
                    acc += ac[(j1 + n) as usize] * bc[(j1 - j + n) as usize].conj() * w;
                }
            }
            acc * j.unsigned_abs() as f64
        })
        .with_mean_zero()
    }

    fn branch_field(n_plus: &FourierField, branch: WaveBranch) -> FourierField {
        match branch {
            WaveBranch::Plus => n_plus.clone(),
            WaveBranch::Minus => n_plus.conj_reflect(),
        }
    }

    fn average(a: FourierField, b: FourierField) -> FourierField {
        a.add(&b).unwrap().scale(Complex::new(0.5, 0.0))
    }

    /// `B1 = (B1^+(n_+, u) + B1^-(n_-, u)) / 2`.
    pub fn b1(&self, n_plus: &FourierField, u: &FourierField) -> Result<FourierField> {
        self.check(n_plus)?;
        self.check(u)?;
        let p = self.schro_bilinear(n_plus, u, WaveBranch::Plus);
        let m = self.schro_bilinear(&n_plus.conj_reflect(), u, WaveBranch::Minus);
        Ok(Self::average(p, m))
    }

    /// `B2(u)_j = |j| sum* u_{j1} conj(u_{-j2}) / (|j| - alpha j1^2 + alpha j2^2)`.
    pub fn b2(&self, u: &FourierField) -> Result<FourierField> {
        self.check(u)?;
        Ok(self.wave_bilinear(u, u))
    }

    /// Resonant Schrodinger interactions,
    /// `(1/2) sum_sigma sum_{res} n^sigma_{k1} u_{k - k1}`.
    pub fn rho1(&self, n_plus: &FourierField, u: &FourierField) -> Result<FourierField> {
        if !self.cls.is_resonant() {
            return Err(Error::NonResonantMode);
        }
        self.check(n_plus)?;
        self.check(u)?;
        let n = self.radius as i64;
        let mut out = FourierField::zeros(self.radius);
        for branch in WaveBranch::BOTH {
            let ns = Self::branch_field(n_plus, branch);
            let part = FourierField::from_fn(self.radius, |k| {
                let mut acc = ZERO;
                for k1 in (k - n).max(-n)..=(k + n).min(n) {
                    if k1 != 0 && self.cls.schro_is_resonant(k, k1, branch) {
                        acc += ns.get(k1) * u.get(k - k1);
                    }
                }
                acc * 0.5
            });
            out = out.add(&part)?;
        }
        Ok(out)
    }

    /// Resonant wave interactions.
    pub fn rho2(&self, u: &FourierField, variant: Rho2Variant) -> Result<FourierField> {
        if !self.cls.is_resonant() {
            return Err(Error::NonResonantMode);
        }
        self.check(u)?;
        let n = self.radius as i64;
        Ok(FourierField::from_fn(self.radius, |j| {
            if j == 0 {
                return ZERO;
            }
            let mut acc = ZERO;
            for j1 in (j - n).max(-n)..=(j + n).min(n) {
                if self.cls.wave_is_resonant(j, j1) {
                    let j2 = j - j1;
                    acc += match variant {
                        Rho2Variant::Substituted => u.get(j1) * u.get(-j2).conj(),
                        Rho2Variant::AsPrinted => u.get(j1) * u.get(j2).conj(),
                    };
                }
            }
            acc * j.unsigned_abs() as f64
        })
        .with_mean_zero())
    }

    fn products(&mut self, n_plus: &FourierField, u: &FourierField) -> (FourierField, FourierField) {
        let n = ZakharovState {
            u: u.clone(),
            n_plus: n_plus.clone(),
            t: 0.0,
        }
        .density();
        let nu = self.conv.convolve(&n, u).unwrap();
        let mut w = FourierField::zeros(self.radius);
        self.conv.abs_sq_into(u.coeffs(), w.coeffs_mut());
        (nu, w)
    }

    /// `R1 = (1/2) sum_sigma sum* sigma |p| w_p u_{k - p} / D^sigma(k, p)`,
    /// `w = P|u|^2`.
    pub fn r1(&mut self, u: &FourierField) -> Result<FourierField> {
        self.check(u)?;
        let (_, w) = self.products(&FourierField::zeros(self.radius), u);
        let dw = w.map_modes(|p, c| c * p.unsigned_abs() as f64);
        let p = self.schro_bilinear(&dw, u, WaveBranch::Plus);
        let m = self.schro_bilinear(&dw, u, WaveBranch::Minus);
        Ok(Self::average(p, m.scale(Complex::new(-1.0, 0.0))))
    }

    /// `R2 = (1/2) sum_sigma sum* n^sigma_{k1} (P(n u))_{k - k1} / D^sigma(k, k1)`.
    pub fn r2(&mut self, u: &FourierField, n_plus: &FourierField) -> Result<FourierField> {
        self.check(u)?;
        self.check(n_plus)?;
        let (nu, _) = self.products(n_plus, u);
        let p = self.schro_bilinear(n_plus, &nu, WaveBranch::Plus);
        let m = self.schro_bilinear(&n_plus.conj_reflect(), &nu, WaveBranch::Minus);
        Ok(Self::average(p, m))
    }

    /// `R3_j = |j| sum* (P(n u))_{j1} conj(u_{-j2}) / D(j, j1)`.
    pub fn r3(&mut self, u: &FourierField, n_plus: &FourierField) -> Result<FourierField> {
        self.check(u)?;
        self.check(n_plus)?;
        let (nu, _) = self.products(n_plus, u);
        Ok(self.wave_bilinear(&nu, u))
    }

    /// `R4_j = -|j| sum* u_{j1} conj((P(n u))_{-j2}) / D(j, j1)`.
    pub fn r4(&mut self, u: &FourierField, n_plus: &FourierField) -> Result<FourierField> {
        self.check(u)?;
        self.check(n_plus)?;
        let (nu, _) = self.products(n_plus, u);
        Ok(self.wave_bilinear(u, &nu).scale(Complex::new(-1.0, 0.0)))
    }

    /// Every term at one state; resonant terms are zero when `1/alpha` is not
    /// an integer.
    pub fn terms(&mut self, state: &ZakharovState, variant: Rho2Variant) -> Result<NormalFormTerms> {
        let (u, np) = (&state.u, &state.n_plus);
        let (rho1, rho2) = if self.cls.is_resonant() {
            (self.rho1(np, u)?, self.rho2(u, variant)?)
        } else {
            (FourierField::zeros(self.radius), FourierField::zeros(self.radius))
        };
        Ok(NormalFormTerms {
            b1: self.b1(np, u)?,
            b2: self.b2(u)?,
            rho1,
            rho2,
            r1: self.r1(u)?,
            r2: self.r2(u, np)?,
            r3: self.r3(u, np)?,
            r4: self.r4(u, np)?,
        })
    }

    /// Number of retained index tuples dropped from the starred sums: both
    /// Schrodinger branches plus the wave sum.
    pub fn excluded_tuples_count(&self) -> usize {
        let n = self.radius as i64;
        let m = 2 * self.radius + 1;
        let mut count = 0;
        for k in -n..=n {
            for k1 in (k - n).max(-n)..=(k + n).min(n) {
                let idx = ((k + n) as usize) * m + (k1 + n) as usize;
                if k1 != 0 {
                    count += (self.schro_inv[0][idx] == 0.0) as usize;
                    count += (self.schro_inv[1][idx] == 0.0) as usize;
                }
                if k != 0 {
                    count += (self.wave_inv[idx] == 0.0) as usize;
                }
            }
        }
        count
    }

    /// Evaluates both sides of the two identities at `state`, with time
    /// derivatives taken from the conservative right-hand side.
    pub fn identity_residual(&mut self, state: &ZakharovState, opts: &IdentityOptions) -> Result<IdentityResidual> {
        self.check(&state.u)?;
        let alpha = self.params.alpha;
        let (du, dn) = dynamics::rhs(state, &self.params);
        let (u, np) = (&state.u, &state.n_plus);
        let iu = du.scale(I);
        let idn = [dn.scale(I), dn.conj_reflect().scale(I)];
        let ns = [np.clone(), np.conj_reflect()];
        let t = self.terms(state, opts.rho2_variant)?;

        let mut bdot = FourierField::zeros(self.radius);
        let mut b1_parts = FourierField::zeros(self.radius);
        for (s, branch) in WaveBranch::BOTH.into_iter().enumerate() {
            let a = self.schro_bilinear(&idn[s], u, branch);
            let b = self.schro_bilinear(&ns[s], &iu, branch);
            bdot = bdot.add(&a.add(&b)?)?;
            b1_parts = b1_parts.add(&self.schro_bilinear(&ns[s], u, branch))?;
        }
        let half = Complex::new(0.5, 0.0);
        let bdot = bdot.scale(half);
        let b1 = b1_parts.scale(half);
        let rho_on = if opts.without_rho { 0.0 } else { 1.0 };

        let half_n = (self.radius / 2) as i64;
        let mut res_u = 0.0f64;
        let mut res_n = 0.0f64;
        let mut scale = 0.0f64;
        let wdot = self
            .wave_bilinear(&iu, u)
            .sub(&self.wave_bilinear(u, &iu))?;
        for k in -half_n..=half_n {
            let k2 = (k * k) as f64;
            let lhs_u = iu.get(k) - u.get(k) * (alpha * k2) + bdot.get(k) - b1.get(k) * (alpha * k2);
            let rhs_u = t.rho1.get(k) * rho_on + t.r1.get(k) + t.r2.get(k);
            res_u = res_u.max((lhs_u - rhs_u).norm());
            let aj = k.unsigned_abs() as f64;
            let lhs_n = idn[0].get(k) - np.get(k) * aj + wdot.get(k) - t.b2.get(k) * aj;
            let rhs_n = t.rho2.get(k) * rho_on + t.r3.get(k) + t.r4.get(k);
            res_n = res_n.max((lhs_n - rhs_n).norm());
            for c in [
                iu.get(k),
                u.get(k) * (alpha * k2),
                bdot.get(k),
                b1.get(k) * (alpha * k2),
                t.rho1.get(k),
                t.r1.get(k),
                t.r2.get(k),
                idn[0].get(k),
                np.get(k) * aj,
                wdot.get(k),
                t.b2.get(k) * aj,
                t.rho2.get(k),
                t.r3.get(k),
                t.r4.get(k),
            ] {
                scale = scale.max(c.norm());
            }
        }
        Ok(IdentityResidual {
            residual_u: res_u,
            residual_n: res_n,
            input_scale: scale,
            excluded_tuples: self.excluded_tuples_count(),
        })
    }

    /// Rebuilds the final sample of `traj` from its initial state through the
    /// integrated normal form
    ///
    /// ```text
    /// u(t) = e^{-i alpha k^2 t}(u(0) + B1(0)) - B1(t)
    ///        - i int_0^t e^{-i alpha k^2 (t - s)} (rho1 + R1 + R2)(s) ds
    /// ```
    ///
    /// and its wave analogue, using composite Simpson over the stored samples.
    pub fn duhamel_reconstruct(&mut self, traj: &Trajectory, variant: Rho2Variant) -> Result<ZakharovState> {
        let first = traj.initial();
        let last = traj.last();
        let h = traj.stride();
        let t0 = first.t;
        let tf = last.t;
        let alpha = self.params.alpha;
        let m = 2 * self.radius + 1;
        let n = self.radius as i64;
        let mut gu: Vec<Vec<Complex>> = vec![Vec::with_capacity(traj.samples.len()); m];
        let mut gn: Vec<Vec<Complex>> = vec![Vec::with_capacity(traj.samples.len()); m];
        for s in &traj.samples {
            let t = self.terms(s, variant)?;
            let tau = s.t - t0;
            for (i, k) in (-n..=n).enumerate() {
                let fu = t.rho1.get(k) + t.r1.get(k) + t.r2.get(k);
                let fnn = t.rho2.get(k) + t.r3.get(k) + t.r4.get(k);
                gu[i].push(fu * Complex::from_polar(1.0, alpha * (k * k) as f64 * tau));
                gn[i].push(fnn * Complex::from_polar(1.0, k.unsigned_abs() as f64 * tau));
            }
        }
        let b1_0 = self.b1(&first.n_plus, &first.u)?;
        let b1_t = self.b1(&last.n_plus, &last.u)?;
        let b2_0 = self.b2(&first.u)?;
        let b2_t = self.b2(&last.u)?;
        let span = tf - t0;
        let u = FourierField::from_fn(self.radius, |k| {
            let i = (k + n) as usize;
            let ph = Complex::from_polar(1.0, -alpha * (k * k) as f64 * span);
            ph * (first.u.get(k) + b1_0.get(k)) - b1_t.get(k) - I * ph * simpson_samples(&gu[i], h)
        });
        let np = FourierField::from_fn(self.radius, |k| {
            if k == 0 {
                return ZERO;
            }
            let i = (k + n) as usize;
            let ph = Complex::from_polar(1.0, -(k.unsigned_abs() as f64) * span);
            ph * (first.n_plus.get(k) + b2_0.get(k)) - b2_t.get(k) - I * ph * simpson_samples(&gn[i], h)
        });
        ZakharovState::new(u, np, tf)
    }
}

/// `B1(n_+, u)` for the given dispersion.
pub fn b1(n_plus: &FourierField, u: &FourierField, params: &ModelParams) -> Result<FourierField> {
    NormalForm::new(params, u.radius()).b1(n_plus, u)
}

pub fn b2(u: &FourierField, params: &ModelParams) -> Result<FourierField> {
    NormalForm::new(params, u.radius()).b2(u)
}

/// Largest interior residual of the two identities (resonant terms included).
pub fn dbp_identity_residual(state: &ZakharovState, params: &ModelParams) -> Result<f64> {
    NormalForm::new(params, state.radius())
        .identity_residual(state, &IdentityOptions::default())
        .map(|r| r.max())
}

/// Sup over a random ensemble of the ratios in the a priori bounds
/// `|B1|_{H^{1+s0+min(s1,0)}}`, `|B2|_{H^{min(2s0,1+s0)}}`,
/// `|rho1|_{H^{s0+s1}}`, `|rho2|_{H^{2s0-1}}` against the data norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriConstants {
    pub b1: f64,
    pub b2: f64,
    /// `None` unless `1/alpha` is an integer.
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
}

pub fn apriori_constants(
    params: &ModelParams,
    s0: f64,
    s1: f64,
    radius: usize,
    samples: usize,
    seed: u64,
) -> Result<AprioriConstants> {
    use crate::field::sobolev_norm;
    use crate::random::{random_sobolev_field, RandomFieldOptions};
    let nf = NormalForm::new(params, radius);
    let resonant = nf.cls.is_resonant();
    let opts = RandomFieldOptions::default();
    let mut c = AprioriConstants {
        b1: 0.0,
        b2: 0.0,
        rho1: resonant.then_some(0.0),
        rho2: resonant.then_some(0.0),
    };
    for i in 0..samples as u64 {
        let u = random_sobolev_field(s0, radius, seed.wrapping_add(2 * i), false, &opts);
        let np = random_sobolev_field(s1, radius, seed.wrapping_add(2 * i + 1), true, &opts);
        let nu = sobolev_norm(&u, s0);
        let nn = sobolev_norm(&np, s1);
        c.b1 = c.b1.max(sobolev_norm(&nf.b1(&np, &u)?, 1.0 + s0 + s1.min(0.0)) / (nn * nu));
        c.b2 = c.b2.max(sobolev_norm(&nf.b2(&u)?, (2.0 * s0).min(1.0 + s0)) / (nu * nu));
        if resonant {
            let r1 = sobolev_norm(&nf.rho1(&np, &u)?, s0 + s1) / (nn * nu);
            let r2 = sobolev_norm(&nf.rho2(&u, Rho2Variant::Substituted)?, 2.0 * s0 - 1.0) / (nu * nu);
            c.rho1 = c.rho1.map(|x| x.max(r1));
            c.rho2 = c.rho2.map(|x| x.max(r2));
        }
    }
    Ok(c)
}
