//! Fourier-space evolution of the reduced system
//!
//! ```text
//! i u_t + alpha u_xx = n u + f - i gamma u,      n = (n_+ + n_-)/2
//! (i d_t - d) n_+   = d |u|^2 - i gamma n_+
//! ```
//!
//! with `gamma = 0`, `f = 0` for the conservative system. Time stepping is
//! classical RK4 on the interaction-picture variables with the diagonal linear
//! part applied exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use num_rational::Ratio;

use crate::convolution::Convolver;
use crate::error::{Error, Result};
use crate::fft::{FftProvider, RADIX2};
use crate::field::{check_radius, Complex, FourierField, ZERO};

const I: Complex = Complex::new(0.0, 1.0);

/// Dispersion coefficient, optionally with its exact rational value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub alpha_rational: Option<Ratio<i64>>,
}

impl ModelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::precondition("alpha must be positive and finite"));
        }
        Ok(ModelParams {
            alpha,
            alpha_rational: None,
        })
    }

    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if p <= 0 || q <= 0 {
            return Err(Error::precondition("alpha = p/q needs p, q > 0"));
        }
        let r = Ratio::new(p, q);
        Ok(ModelParams {
            alpha: *r.numer() as f64 / *r.denom() as f64,
            alpha_rational: Some(r),
        })
    }

    /// Accepts `"p/q"`, an integer, or a decimal literal. Only the first two
    /// keep an exact rational.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::precondition(alloc::format!("cannot parse alpha from {text:?}"));
        if let Some((p, q)) = text.split_once('/') {
            let p = i64::from_str(p.trim()).map_err(|_| bad())?;
            let q = i64::from_str(q.trim()).map_err(|_| bad())?;
            return Self::rational(p, q);
        }
        if let Ok(p) = i64::from_str(text) {
            return Self::rational(p, 1);
        }
        Self::new(f64::from_str(text).map_err(|_| bad())?)
    }

    /// `(p, q)` in lowest terms when the rational value is known.
    pub fn pq(&self) -> Option<(i64, i64)> {
        self.alpha_rational.map(|r| (*r.numer(), *r.denom()))
    }
}

impl core::fmt::Display for ModelParams {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.pq() {
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.alpha),
        }
    }
}

/// `(u, n_+)` at time `t`; `n_-` is the conjugate reflection of `n_+`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZakharovState {
    pub u: FourierField,
    pub n_plus: FourierField,
    pub t: f64,
}

impl ZakharovState {
    pub fn new(u: FourierField, n_plus: FourierField, t: f64) -> Result<Self> {
        check_radius(&u, &n_plus)?;
        let c = n_plus.get(0);
        if c != ZERO {
            return Err(Error::NotMeanZero(c.norm()));
        }
        Ok(ZakharovState {
            u,
            n_plus: n_plus.with_mean_zero(),
            t,
        })
    }

    pub fn zeros(radius: usize) -> Self {
        ZakharovState {
            u: FourierField::zeros(radius),
            n_plus: FourierField::zeros(radius).with_mean_zero(),
            t: 0.0,
        }
    }

    pub fn radius(&self) -> usize {
        self.u.radius()
    }

    pub fn n_minus(&self) -> FourierField {
        self.n_plus.conj_reflect()
    }

    /// Physical density `n = (n_+ + n_-)/2`.
    pub fn density(&self) -> FourierField {
        let n = self.radius() as i64;
        FourierField::from_fn(self.radius(), |k| {
            if k.abs() > n {
                ZERO
            } else {
                (self.n_plus.get(k) + self.n_plus.get(-k).conj()) * 0.5
            }
        })
        .with_mean_zero()
        .assume_real()
    }

    fn pack(&self) -> Vec<Complex> {
        let mut y = Vec::with_capacity(2 * self.u.len());
        y.extend_from_slice(self.u.coeffs());
        y.extend_from_slice(self.n_plus.coeffs());
        y
    }

    fn unpack(y: &[Complex], t: f64) -> Self {
        let m = y.len() / 2;
        ZakharovState {
            u: FourierField::from_coeffs(y[..m].to_vec()).unwrap(),
            n_plus: FourierField::from_coeffs(y[m..].to_vec()).unwrap().with_mean_zero(),
            t,
        }
    }
}

/// Full model: dispersion, damping rate, Schrodinger forcing and a switch that
/// scales the nonlinearity (1 for the physical system, 0 for the linear one).
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub gamma: f64,
    pub forcing: Option<FourierField>,
    pub coupling: f64,
}

impl Model {
    pub fn conservative(params: ModelParams) -> Self {
        Model {
            params,
            gamma: 0.0,
            forcing: None,
            coupling: 1.0,
        }
    }

    pub fn linear(params: ModelParams) -> Self {
        Model {
            coupling: 0.0,
            ..Model::conservative(params)
        }
    }

    pub fn damped(params: ModelParams, gamma: f64, forcing: Option<FourierField>) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::precondition("damping rate must be nonnegative"));
        }
        Ok(Model {
            params,
            gamma,
            forcing,
            coupling: 1.0,
        })
    }

    pub fn rhs(&self, state: &ZakharovState) -> Result<(FourierField, FourierField)> {
        let mut ev = Evaluator::new(self, state.radius(), &RADIX2)?;
        let y = state.pack();
        let mut dy = vec![ZERO; y.len()];
        ev.full_rhs(&y, &mut dy);
        let out = ZakharovState::unpack(&dy, state.t);
        Ok((out.u, out.n_plus))
    }
}

/// Time derivative `(du/dt, dn_+/dt)` of the conservative system.
pub fn rhs(state: &ZakharovState, params: &ModelParams) -> (FourierField, FourierField) {
    Model::conservative(*params).rhs(state).unwrap()
}

/// `e^{i alpha t d_xx} u0`, i.e. `u_k -> e^{-i alpha k^2 t} u_k`.
pub fn linear_flow_schrodinger(u0: &FourierField, t: f64, alpha: f64) -> FourierField {
    u0.map_modes(|k, c| c * Complex::from_polar(1.0, -alpha * (k * k) as f64 * t))
}

/// `e^{-itd} n0`, i.e. `n_j -> e^{-i|j|t} n_j`.
pub fn linear_flow_wave_plus(n0: &FourierField, t: f64) -> FourierField {
    let out = n0.map_modes(|k, c| c * Complex::from_polar(1.0, -(k.unsigned_abs() as f64) * t));
    if n0.get(0) == ZERO {
        out.with_mean_zero()
    } else {
        out
    }
}

/// Free damped evolution of both components over time `t`.
pub fn damped_linear_flow(state: &ZakharovState, alpha: f64, gamma: f64, t: f64) -> ZakharovState {
    let decay = Complex::new(libm::exp(-gamma * t), 0.0);
    ZakharovState {
        u: linear_flow_schrodinger(&state.u, t, alpha).scale(decay),
        n_plus: linear_flow_wave_plus(&state.n_plus, t).scale(decay),
        t: state.t + t,
    }
}

/// Precomputed linear symbols and FFT workspace for one model and radius.
pub struct Evaluator {
    radius: usize,
    coupling: f64,
    forcing: Option<Vec<Complex>>,
    conv: Convolver,
    lin: Vec<Complex>,
    grid_u: Vec<Complex>,
    grid_n: Vec<Complex>,
    prod: Vec<Complex>,
}

impl Evaluator {
    pub fn new(model: &Model, radius: usize, fft: &dyn FftProvider) -> Result<Self> {
        let forcing = match &model.forcing {
            Some(f) => {
                check_radius(f, &FourierField::zeros(radius))?;
                Some(f.coeffs().to_vec())
            }
            None => None,
        };
        let n = radius as i64;
        let alpha = model.params.alpha;
        let g = model.gamma;
        let mut lin = Vec::with_capacity(2 * (2 * radius + 1));
        lin.extend((-n..=n).map(|k| Complex::new(-g, -alpha * (k * k) as f64)));
        lin.extend((-n..=n).map(|k| Complex::new(-g, -(k.unsigned_abs() as f64))));
        let conv = Convolver::with_provider(radius, fft);
        let len = conv.grid_len();
        Ok(Evaluator {
            radius,
            coupling: model.coupling,
            forcing,
            conv,
            lin,
            grid_u: vec![ZERO; len],
            grid_n: vec![ZERO; len],
            prod: vec![ZERO; 2 * radius + 1],
        })
    }

    /// Diagonal linear symbol for the packed `(u, n_+)` vector.
    pub fn linear_symbol(&self) -> &[Complex] {
        &self.lin
    }

    /// Nonlinear and forcing part of the right-hand side.
    pub fn nonlinear(&mut self, y: &[Complex], out: &mut [Complex]) {
        let m = 2 * self.radius + 1;
        let (u, np) = y.split_at(m);
        let (du, dn) = out.split_at_mut(m);
        if self.coupling == 0.0 {
            du.fill(ZERO);
            dn.fill(ZERO);
        } else {
            self.conv.to_grid(u, &mut self.grid_u);
            self.conv.to_grid(np, &mut self.grid_n);
            // n(x) = Re n_+(x); reuse grid_n for n u and grid_u for |u|^2
            for (gu, gn) in self.grid_u.iter_mut().zip(self.grid_n.iter_mut()) {
                let nx = gn.re;
                *gn = *gu * nx;
                *gu = Complex::new(gu.norm_sqr(), 0.0);
            }
            self.conv.from_grid(&mut self.grid_n, &mut self.prod);
            let c = self.coupling;
            for (d, p) in du.iter_mut().zip(&self.prod) {
                *d = -I * c * p;
            }
            self.conv.from_grid(&mut self.grid_u, &mut self.prod);
            let n = self.radius as i64;
            for ((j, d), w) in (-n..=n).zip(dn.iter_mut()).zip(&self.prod) {
                *d = if j == 0 {
                    ZERO
                } else {
                    -I * (c * j.unsigned_abs() as f64) * w
                };
            }
        }
        if let Some(f) = &self.forcing {
            for (d, fk) in du.iter_mut().zip(f) {
                *d -= I * fk;
            }
        }
    }

    pub fn full_rhs(&mut self, y: &[Complex], out: &mut [Complex]) {
        self.nonlinear(y, out);
        for ((o, l), v) in out.iter_mut().zip(&self.lin).zip(y) {
            *o += l * v;
        }
    }
}

/// Integrating-factor RK4 stepper with fixed step `h`.
pub struct Stepper {
    ev: Evaluator,
    h: f64,
    e_half: Vec<Complex>,
    e_full: Vec<Complex>,
    k: [Vec<Complex>; 4],
    tmp: Vec<Complex>,
}

impl Stepper {
    pub fn new(model: &Model, radius: usize, h: f64, fft: &dyn FftProvider) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::precondition("time step must be positive"));
        }
        let ev = Evaluator::new(model, radius, fft)?;
        let e = |s: f64| -> Vec<Complex> { ev.lin.iter().map(|l| exp_c(*l * s)).collect() };
        let e_half = e(0.5 * h);
        let e_full = e(h);
        let m = ev.lin.len();
        Ok(Stepper {
            ev,
            h,
            e_half,
            e_full,
            k: [vec![ZERO; m], vec![ZERO; m], vec![ZERO; m], vec![ZERO; m]],
            tmp: vec![ZERO; m],
        })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn step(&mut self, y: &mut [Complex]) {
        let h = self.h;
        let [k1, k2, k3, k4] = &mut self.k;
        self.ev.nonlinear(y, k1);
        for i in 0..y.len() {
            self.tmp[i] = self.e_half[i] * (y[i] + k1[i] * (0.5 * h));
        }
        self.ev.nonlinear(&self.tmp, k2);
        for i in 0..y.len() {
            self.tmp[i] = self.e_half[i] * y[i] + k2[i] * (0.5 * h);
        }
        self.ev.nonlinear(&self.tmp, k3);
        for i in 0..y.len() {
            self.tmp[i] = self.e_full[i] * y[i] + self.e_half[i] * k3[i] * h;
        }
        self.ev.nonlinear(&self.tmp, k4);
        for i in 0..y.len() {
            y[i] = self.e_full[i] * y[i]
                + (self.e_full[i] * k1[i] + self.e_half[i] * (k2[i] + k3[i]) * 2.0 + k4[i])
                    * (h / 6.0);
        }
    }
}

fn exp_c(z: Complex) -> Complex {
    Complex::from_polar(libm::exp(z.re), z.im)
}

#[derive(Clone, Copy)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Spacing of stored samples; `None` stores every step.
    pub sample_stride: Option<f64>,
    pub blowup_threshold: f64,
    pub fft: &'static dyn FftProvider,
}

impl IntegrateOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        IntegrateOptions {
            dt,
            t_end,
            sample_stride: None,
            blowup_threshold: 1e8,
            fft: &RADIX2,
        }
    }

    pub fn with_stride(mut self, stride: f64) -> Self {
        self.sample_stride = Some(stride);
        self
    }

    pub fn with_fft(mut self, fft: &'static dyn FftProvider) -> Self {
        self.fft = fft;
        self
    }
}

impl core::fmt::Debug for IntegrateOptions {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("IntegrateOptions")
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("sample_stride", &self.sample_stride)
            .field("blowup_threshold", &self.blowup_threshold)
            .finish()
    }
}

/// Step plan: the step is shrunk so samples fall exactly on multiples of the
/// stride and the run ends exactly at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub steps_per_sample: usize,
    pub samples: usize,
}

pub fn plan_steps(t0: f64, opts: &IntegrateOptions) -> Result<StepPlan> {
    let span = opts.t_end - t0;
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::precondition("dt must be positive"));
    }
    if !(span > 0.0) {
        return Err(Error::precondition("t_end must exceed the initial time"));
    }
    let stride = opts.sample_stride.unwrap_or(opts.dt).min(span);
    let samples_f = span / stride;
    let samples = libm::round(samples_f) as usize;
    if samples == 0 || libm::fabs(samples_f - samples as f64) > 1e-9 * samples_f.max(1.0) {
        return Err(Error::precondition(alloc::format!(
            "sample stride {stride} does not divide the time span {span}"
        )));
    }
    let stride = span / samples as f64;
    let steps_per_sample = libm::ceil(stride / opts.dt * (1.0 - 1e-12)) as usize;
    let steps_per_sample = steps_per_sample.max(1);
    Ok(StepPlan {
        dt: stride / steps_per_sample as f64,
        steps_per_sample,
        samples,
    })
}

/// Sampled solution, initial state first.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<ZakharovState>,
    pub dt: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &ZakharovState {
        &self.samples[0]
    }

    pub fn last(&self) -> &ZakharovState {
        self.samples.last().unwrap()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Sample nearest to time `t`.
    pub fn at(&self, t: f64) -> &ZakharovState {
        self.samples
            .iter()
            .min_by(|a, b| libm::fabs(a.t - t).total_cmp(&libm::fabs(b.t - t)))
            .unwrap()
    }

    /// Sample spacing (uniform by construction).
    pub fn stride(&self) -> f64 {
        if self.samples.len() < 2 {
            0.0
        } else {
            self.samples[1].t - self.samples[0].t
        }
    }
}

/// Advances `state` to `opts.t_end`, storing samples on the stride grid.
pub fn integrate(state: &ZakharovState, model: &Model, opts: &IntegrateOptions) -> Result<Trajectory> {
    let plan = plan_steps(state.t, opts)?;
    let mut stepper = Stepper::new(model, state.radius(), plan.dt, opts.fft)?;
    let mut y = state.pack();
    let t0 = state.t;
    let mut samples = Vec::with_capacity(plan.samples + 1);
    samples.push(state.clone());
    let mut step = 0usize;
    let mut last_good = t0;
    for s in 1..=plan.samples {
        for _ in 0..plan.steps_per_sample {
            stepper.step(&mut y);
            step += 1;
            let worst = y.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if !(worst <= opts.blowup_threshold) {
                return Err(Error::BlowUp {
                    last_good_time: last_good,
                });
            }
            last_good = t0 + step as f64 * plan.dt;
        }
        let t = if s == plan.samples {
            opts.t_end
        } else {
            t0 + (s * plan.steps_per_sample) as f64 * plan.dt
        };
        samples.push(ZakharovState::unpack(&y, t));
    }
    Ok(Trajectory {
        samples,
        dt: plan.dt,
    })
}

/// `sum_k |u_k|^2`.
pub fn mass(state: &ZakharovState) -> f64 {
    state.u.l2_norm_sq()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    /// `alpha sum k^2 |u_k|^2`.
    pub dispersive: f64,
    /// `(|n_+|^2 + |n_-|^2) / 4`.
    pub wave: f64,
    /// `sum_j n_j (|u|^2)_{-j}`, real part.
    pub coupling: f64,
    /// Imaginary part of the coupling sum; roundoff only.
    pub coupling_imag: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.dispersive + self.wave + self.coupling
    }
}

pub fn energy_parts(state: &ZakharovState, params: &ModelParams) -> EnergyParts {
    let dispersive = params.alpha
        * state
            .u
            .modes()
            .map(|(k, c)| (k * k) as f64 * c.norm_sqr())
            .sum::<f64>();
    let wave = 0.25 * (state.n_plus.l2_norm_sq() + state.n_minus().l2_norm_sq());
    let w = crate::convolution::abs_sq(&state.u);
    let n = state.density();
    let c: Complex = n.modes().map(|(j, nj)| nj * w.get(-j)).sum();
    EnergyParts {
        dispersive,
        wave,
        coupling: c.re,
        coupling_imag: c.im,
    }
}

pub fn energy(state: &ZakharovState, params: &ModelParams) -> f64 {
    energy_parts(state, params).total()
}
