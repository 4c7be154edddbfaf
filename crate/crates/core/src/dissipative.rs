//! Damped and forced evolution.
//!
//! Both components are damped at rate `gamma` and the Schrodinger equation
//! carries a time-independent forcing `f`:
//!
//! ```text
//! du/dt  = -i alpha k^2 u - gamma u - i P(n u) - i f
//! dn+/dt = -i|j| n+ - gamma n+ - i|j| P|u|^2
//! ```
//!
//! The diagnostics here fit the absorbing-ball decay of
//! `Q = |u|_{H^1} + 2|n+|_{L^2}` and split a trajectory into its damped
//! free part, an optional resonant Duhamel term, and a remainder `N_t` that
//! is expected to be smoother than the data.

use alloc::vec::Vec;

use crate::dynamics::{damped_linear_flow, Model, ModelParams, Trajectory, ZakharovState};
use crate::error::{Error, Result};
use crate::field::{check_radius, sobolev_norm, sobolev_norm_band, Complex, FourierField};
use crate::fit::{exp_decay_fit, ExpFit};
use crate::normal_form::NormalForm;
use crate::resonance::ResonanceClassifier;

/// Largest sample stride allowed for the resonant Duhamel quadrature, in
/// units of `1/gamma`.
pub const RESONANT_STRIDE_FACTOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DampedParams {
    pub params: ModelParams,
    pub gamma: f64,
    pub forcing: FourierField,
}

impl DampedParams {
    pub fn new(params: ModelParams, gamma: f64, forcing: FourierField) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::precondition("damping rate must be positive"));
        }
        if !sobolev_norm(&forcing, 1.0).is_finite() {
            return Err(Error::precondition("forcing must have finite H^1 norm"));
        }
        Ok(DampedParams {
            params,
            gamma,
            forcing,
        })
    }

    pub fn model(&self) -> Model {
        Model {
            params: self.params,
            gamma: self.gamma,
            forcing: Some(self.forcing.clone()),
            coupling: 1.0,
        }
    }

    pub fn with_forcing_scale(&self, c: f64) -> Self {
        DampedParams {
            forcing: self.forcing.scale(Complex::new(c, 0.0)),
            ..self.clone()
        }
    }
}

/// Real forcing `c (cos x + ... + cos(k_max x))` scaled to the given `H^1`
/// norm.
pub fn low_mode_forcing(radius: usize, k_max: usize, h1_norm: f64) -> FourierField {
    let k_max = k_max.min(radius) as i64;
    let f = FourierField::from_fn(radius, |k| {
        if k != 0 && k.abs() <= k_max {
            Complex::new(0.5, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let norm = sobolev_norm(&f, 1.0);
    if norm == 0.0 {
        return f;
    }
    f.scale(Complex::new(h1_norm / norm, 0.0)).assume_real()
}

pub fn rhs_damped(state: &ZakharovState, dp: &DampedParams) -> Result<(FourierField, FourierField)> {
    check_radius(&state.u, &dp.forcing)?;
    dp.model().rhs(state)
}

/// `|u|_{H^1} + 2 |n+|_{L^2}`, which equals `|u|_{H^1} + |n+| + |n-|`.
pub fn q_norm(state: &ZakharovState) -> f64 {
    sobolev_norm(&state.u, 1.0) + 2.0 * sobolev_norm(&state.n_plus, 0.0)
}

pub fn q_series(traj: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    traj.samples.iter().map(|s| (s.t, q_norm(s))).unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingMember {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    /// `None` when the fit did not converge; such members are flagged and left
    /// out of the ensemble statistics.
    pub fit: Option<ExpFit>,
}

impl AbsorbingMember {
    /// Largest fit residual as a fraction of `Q(0)`.
    pub fn relative_residual(&self) -> Option<f64> {
        self.fit.map(|f| f.max_residual / self.q[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingReport {
    pub gamma: f64,
    pub members: Vec<AbsorbingMember>,
    pub c1_mean: f64,
    /// `(max - min) / mean` of the fitted `C1` across converged members.
    pub c1_spread: f64,
    pub c2_mean: f64,
    pub c3_mean: f64,
    /// Whether every converged `C3` lies in `[gamma/2, 2 gamma]`.
    pub c3_in_bracket: bool,
    pub flagged: usize,
}

/// Fits `Q(t) ~ C1 + C2 e^{-C3 t}` for each trajectory.
pub fn absorbing_fit(trajs: &[Trajectory], gamma: f64) -> Result<AbsorbingReport> {
    if trajs.is_empty() {
        return Err(Error::precondition("empty ensemble"));
    }
    let members: Vec<AbsorbingMember> = trajs
        .iter()
        .map(|tr| {
            let (times, q) = q_series(tr);
            let fit = exp_decay_fit(&times, &q, 1e-3 * gamma, 1e2 * gamma).ok();
            AbsorbingMember { times, q, fit }
        })
        .collect();
    let fits: Vec<ExpFit> = members.iter().filter_map(|m| m.fit).collect();
    if fits.is_empty() {
        return Err(Error::FitFailed("no ensemble member converged".into()));
    }
    let n = fits.len() as f64;
    let c1_mean = fits.iter().map(|f| f.c1).sum::<f64>() / n;
    let c1_max = fits.iter().map(|f| f.c1).fold(f64::NEG_INFINITY, f64::max);
    let c1_min = fits.iter().map(|f| f.c1).fold(f64::INFINITY, f64::min);
    Ok(AbsorbingReport {
        gamma,
        flagged: members.len() - fits.len(),
        c1_mean,
        c1_spread: if c1_mean.abs() > 0.0 {
            (c1_max - c1_min) / c1_mean.abs()
        } else {
            0.0
        },
        c2_mean: fits.iter().map(|f| f.c2).sum::<f64>() / n,
        c3_mean: fits.iter().map(|f| f.c3).sum::<f64>() / n,
        c3_in_bracket: fits.iter().all(|f| f.c3 >= 0.5 * gamma && f.c3 <= 2.0 * gamma),
        members,
    })
}

/// Time after which `q` stays at or below `level`, if it does.
pub fn entry_time(times: &[f64], q: &[f64], level: f64) -> Option<f64> {
    let last_above = q.iter().rposition(|&v| v > level);
    match last_above {
        None => times.first().copied(),
        Some(i) if i + 1 < q.len() => Some(times[i + 1]),
        Some(_) => None,
    }
}

/// Split of one trajectory `state(t) = linear(t) + resonant(t) + smooth(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothDecomposition {
    pub times: Vec<f64>,
    /// Damped free evolution of the initial data.
    pub linear: Vec<ZakharovState>,
    /// Resonant Duhamel term of the Schrodinger component, present iff
    /// `1/alpha` is an integer.
    pub resonant: Option<Vec<FourierField>>,
    /// `N_t` for both components.
    pub smooth: Vec<ZakharovState>,
    /// Max over samples and modes of `|linear + resonant + smooth - state|`.
    pub reassembly_error: f64,
}

/// Computes `N_t` along `traj`.
///
/// For integer `1/alpha` the resonant part of the Duhamel integral,
/// `-i int_0^t e^{(-i alpha k^2 - gamma)(t - s)} rho1(s) ds`, is removed as
/// well; it is accumulated by the trapezoid rule over the stored samples,
/// whose stride must not exceed `0.01 / gamma`.
pub fn smooth_part(traj: &Trajectory, dp: &DampedParams) -> Result<SmoothDecomposition> {
    let init = traj.initial();
    let radius = init.radius();
    let alpha = dp.params.alpha;
    let gamma = dp.gamma;
    let resonant = ResonanceClassifier::new(&dp.params).is_resonant();
    let h = traj.stride();
    if resonant && traj.samples.len() > 1 && h > RESONANT_STRIDE_FACTOR / gamma * (1.0 + 1e-9) {
        return Err(Error::SparseResonantSamples {
            stride: h,
            max_stride: RESONANT_STRIDE_FACTOR / gamma,
        });
    }
    let times = traj.times();
    let linear: Vec<ZakharovState> = traj
        .samples
        .iter()
        .map(|s| damped_linear_flow(init, alpha, gamma, s.t - init.t))
        .collect();
    let res = if resonant {
        let nf = NormalForm::new(&dp.params, radius);
        let minus_i = Complex::new(0.0, -1.0);
        let step = FourierField::from_fn(radius, |k| {
            let z = Complex::new(-gamma * h, -alpha * (k * k) as f64 * h);
            Complex::from_polar(libm::exp(z.re), z.im)
        });
        let mut acc = FourierField::zeros(radius);
        let mut prev = nf.rho1(&init.n_plus, &init.u)?.scale(minus_i);
        let mut out = Vec::with_capacity(traj.samples.len());
        out.push(acc.clone());
        for s in &traj.samples[1..] {
            let g = nf.rho1(&s.n_plus, &s.u)?.scale(minus_i);
            // I(t + h) = E I(t) + h/2 (E g(t) + g(t + h))
            acc = FourierField::from_fn(radius, |k| {
                let e = step.get(k);
                e * acc.get(k) + (e * prev.get(k) + g.get(k)) * (0.5 * h)
            });
            out.push(acc.clone());
            prev = g;
        }
        Some(out)
    } else {
        None
    };
    let mut smooth = Vec::with_capacity(traj.samples.len());
    let mut err = 0.0f64;
    for (i, s) in traj.samples.iter().enumerate() {
        let mut u = s.u.sub(&linear[i].u)?;
        if let Some(r) = &res {
            u = u.sub(&r[i])?;
        }
        let n = s.n_plus.sub(&linear[i].n_plus)?;
        let mut back = linear[i].u.add(&u)?;
        if let Some(r) = &res {
            back = back.add(&r[i])?;
        }
        err = err.max(back.sub(&s.u)?.max_abs());
        err = err.max(linear[i].n_plus.add(&n)?.sub(&s.n_plus)?.max_abs());
        smooth.push(ZakharovState {
            u,
            n_plus: n,
            t: s.t,
        });
    }
    Ok(SmoothDecomposition {
        times,
        linear,
        resonant: res,
        smooth,
        reassembly_error: err,
    })
}

/// `|N_u|_{H^{1+a}} + 2 |N_n|_{H^a}`.
pub fn smooth_norm(state: &ZakharovState, a: f64) -> f64 {
    sobolev_norm(&state.u, 1.0 + a) + 2.0 * sobolev_norm(&state.n_plus, a)
}

/// `sqrt(|du|_{H^1}^2 + 2 |dn+|_{L^2}^2)`.
pub fn energy_distance(a: &ZakharovState, b: &ZakharovState) -> Result<f64> {
    let du = a.u.sub(&b.u)?;
    let dn = a.n_plus.sub(&b.n_plus)?;
    let d2 = sobolev_norm(&du, 1.0).powi(2) + 2.0 * sobolev_norm(&dn, 0.0).powi(2);
    Ok(libm::sqrt(d2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusEstimate {
    pub a: f64,
    /// Sup over the window of [`smooth_norm`], one entry per member.
    pub member_sup: Vec<f64>,
    /// Largest member sup.
    pub r_hat: f64,
    /// `max / min` of the member sups.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorReport {
    pub window: (f64, f64),
    pub radii: Vec<RadiusEstimate>,
    /// Largest pairwise [`energy_distance`] between final states.
    pub diameter: f64,
    /// Largest relative deviation of free-part band norms from `e^{-gamma t}`.
    pub linear_decay_error: f64,
}

impl AttractorReport {
    pub fn r_hat(&self, a: f64) -> Option<f64> {
        self.radii.iter().find(|r| r.a == a).map(|r| r.r_hat)
    }
}

/// Attractor proxies from an ensemble of decompositions over a common
/// sample grid.
pub fn attractor_probe(
    trajs: &[Trajectory],
    decomps: &[SmoothDecomposition],
    a_list: &[f64],
    window: (f64, f64),
    gamma: f64,
) -> Result<AttractorReport> {
    if trajs.is_empty() || trajs.len() != decomps.len() {
        return Err(Error::precondition("need one decomposition per trajectory"));
    }
    let mut radii = Vec::new();
    for &a in a_list {
        let member_sup: Vec<f64> = decomps
            .iter()
            .map(|d| {
                d.smooth
                    .iter()
                    .filter(|s| s.t >= window.0 - 1e-9 && s.t <= window.1 + 1e-9)
                    .map(|s| smooth_norm(s, a))
                    .fold(0.0, f64::max)
            })
            .collect();
        let hi = member_sup.iter().copied().fold(0.0, f64::max);
        let lo = member_sup.iter().copied().fold(f64::INFINITY, f64::min);
        radii.push(RadiusEstimate {
            a,
            r_hat: hi,
            spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            member_sup,
        });
    }
    let mut diameter = 0.0f64;
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            diameter = diameter.max(energy_distance(trajs[i].last(), trajs[j].last())?);
        }
    }
    let mut linear_decay_error = 0.0f64;
    for d in decomps {
        let init = &d.linear[0];
        let radius = init.radius();
        for lin in &d.linear {
            let expect = libm::exp(-gamma * (lin.t - init.t));
            let mut lo = 1usize;
            while lo <= radius {
                let hi = (2 * lo - 1).min(radius);
                for (f0, f) in [(&init.u, &lin.u), (&init.n_plus, &lin.n_plus)] {
                    let b0 = sobolev_norm_band(f0, 0.0, lo, hi);
                    if b0 > 0.0 {
                        let rel = (sobolev_norm_band(f, 0.0, lo, hi) / b0 - expect) / expect;
                        linear_decay_error = linear_decay_error.max(rel.abs());
                    }
                }
                lo *= 2;
            }
        }
    }
    Ok(AttractorReport {
        window,
        radii,
        diameter,
        linear_decay_error,
    })
}
