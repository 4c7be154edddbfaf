//! Nonlinear smoothing diagnostics.
//!
//! The residue of a trajectory is what is left after removing the free
//! evolution of the data. Its regularity, read off dyadic-shell decay, is
//! compared with the regularity of the solution itself.

use alloc::vec::Vec;

use crate::bounds::theory_gains;
use crate::dynamics::{linear_flow_schrodinger, linear_flow_wave_plus, ModelParams, Trajectory, ZakharovState};
use crate::error::{Error, Result};
use crate::field::{sobolev_norm, FourierField};
use crate::fit::linear_fit;
use crate::random::{random_sobolev_field, RandomFieldOptions};
use crate::regularity::fit_regularity;
use crate::resonance::ResonanceClassifier;

#[derive(Debug, Clone, PartialEq)]
pub struct Residue {
    pub t: f64,
    pub u: FourierField,
    pub n_plus: FourierField,
}

/// `u(t) - e^{i alpha t d_xx} u0` and `n+(t) - e^{-itd} n+(0)` at every sample.
pub fn nonlinear_residue(traj: &Trajectory, params: &ModelParams) -> Vec<Residue> {
    let first = traj.initial();
    traj.samples
        .iter()
        .map(|s| {
            let dt = s.t - first.t;
            Residue {
                t: s.t,
                u: s.u.sub(&linear_flow_schrodinger(&first.u, dt, params.alpha)).unwrap(),
                n_plus: s.n_plus.sub(&linear_flow_wave_plus(&first.n_plus, dt)).unwrap(),
            }
        })
        .collect()
}

/// Random data for the smoothing experiments: `u` in `H^{s0}` from seed
/// `2 seed`, real mean-zero `n+` in `H^{s1}` from seed `2 seed + 1`.
pub fn smoothing_initial_state(s0: f64, s1: f64, radius: usize, seed: u64) -> ZakharovState {
    let opts = RandomFieldOptions::default();
    let u = random_sobolev_field(s0, radius, 2 * seed, false, &opts);
    let n_opts = RandomFieldOptions { real: true, ..opts };
    let n = random_sobolev_field(s1, radius, 2 * seed + 1, true, &n_opts);
    ZakharovState::new(u, n, 0.0).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingOptions {
    /// Shell range `[lo, hi]` in `|k|` used by the regularity fits.
    pub band: (usize, usize),
    /// Time at which the gains are quoted.
    pub reference_time: f64,
    /// Earliest time used in the residue growth fit.
    pub growth_fit_start: f64,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        SmoothingOptions {
            band: (4, 32),
            reference_time: 1.0,
            growth_fit_start: 1.0,
        }
    }
}

/// Fitted regularities of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSnapshot {
    pub t: f64,
    pub reg_u: f64,
    pub reg_residue_u: f64,
    pub reg_n: f64,
    pub reg_residue_n: f64,
    /// `|u(t)|_{H^{s0}}`.
    pub norm_u: f64,
    /// `|residue_u(t)|_{H^{s0 + a0}}` with the theoretical `a0`.
    pub residue_norm: f64,
}

impl SmoothingSnapshot {
    pub fn gain_u(&self) -> f64 {
        self.reg_residue_u - self.reg_u
    }

    pub fn gain_n(&self) -> f64 {
        self.reg_residue_n - self.reg_n
    }
}

/// Per-sample fits for one trajectory. The `t = 0` sample, where the residue
/// vanishes, is skipped.
pub fn member_series(
    traj: &Trajectory,
    params: &ModelParams,
    s0: f64,
    s1: f64,
    opts: &SmoothingOptions,
) -> Result<Vec<SmoothingSnapshot>> {
    let (lo, hi) = opts.band;
    let a0 = gains_for(params, s0, s1).0;
    let t0 = traj.initial().t;
    nonlinear_residue(traj, params)
        .into_iter()
        .zip(&traj.samples)
        .filter(|(r, _)| r.t > t0)
        .map(|(r, s)| {
            Ok(SmoothingSnapshot {
                t: r.t,
                reg_u: fit_regularity(&s.u, lo, hi)?.s_hat,
                reg_residue_u: fit_regularity(&r.u, lo, hi)?.s_hat,
                reg_n: fit_regularity(&s.n_plus, lo, hi)?.s_hat,
                reg_residue_n: fit_regularity(&r.n_plus, lo, hi)?.s_hat,
                norm_u: sobolev_norm(&s.u, s0),
                residue_norm: sobolev_norm(&r.u, s0 + a0),
            })
        })
        .collect()
}

/// Theoretical gain ceilings `(a0, a1)` for the model's resonance class.
pub fn gains_for(params: &ModelParams, s0: f64, s1: f64) -> (f64, f64) {
    theory_gains(ResonanceClassifier::new(params).is_resonant(), s0, s1)
}

/// Ensemble averages at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingRow {
    pub t: f64,
    pub reg_u: f64,
    pub reg_residue_u: f64,
    pub reg_n: f64,
    pub reg_residue_n: f64,
    pub gain_u: f64,
    pub gain_n: f64,
    /// Smallest member gain of `u`.
    pub min_gain_u: f64,
    pub norm_u: f64,
    pub residue_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub alpha: f64,
    pub resonant: bool,
    pub s0: f64,
    pub s1: f64,
    pub members: usize,
    pub rows: Vec<SmoothingRow>,
    /// Measured gains `(a0_hat, a1_hat)` at the reference time.
    pub measured_gains: (f64, f64),
    /// Theoretical ceilings `(a0, a1)`.
    pub theory_gains: (f64, f64),
    /// Slope of `log |residue_u|_{H^{s0+a0}}` against `log(1 + t)`; `None`
    /// when fewer than two samples lie past the fit start.
    pub beta_hat: Option<f64>,
}

impl SmoothingReport {
    /// Row at the sample nearest `t`.
    pub fn row_at(&self, t: f64) -> &SmoothingRow {
        self.rows
            .iter()
            .min_by(|a, b| libm::fabs(a.t - t).total_cmp(&libm::fabs(b.t - t)))
            .unwrap()
    }
}

/// Averages member series sampled on a common time grid.
pub fn smoothing_report(
    params: &ModelParams,
    s0: f64,
    s1: f64,
    series: &[Vec<SmoothingSnapshot>],
    opts: &SmoothingOptions,
) -> Result<SmoothingReport> {
    let first = series
        .first()
        .ok_or_else(|| Error::precondition("empty ensemble"))?;
    if first.is_empty() || series.iter().any(|s| s.len() != first.len()) {
        return Err(Error::precondition("members must share a non-empty sample grid"));
    }
    let m = series.len() as f64;
    let mean = |i: usize, f: fn(&SmoothingSnapshot) -> f64| series.iter().map(|s| f(&s[i])).sum::<f64>() / m;
    let rows: Vec<SmoothingRow> = (0..first.len())
        .map(|i| SmoothingRow {
            t: first[i].t,
            reg_u: mean(i, |s| s.reg_u),
            reg_residue_u: mean(i, |s| s.reg_residue_u),
            reg_n: mean(i, |s| s.reg_n),
            reg_residue_n: mean(i, |s| s.reg_residue_n),
            gain_u: mean(i, |s| s.gain_u()),
            gain_n: mean(i, |s| s.gain_n()),
            min_gain_u: series.iter().map(|s| s[i].gain_u()).fold(f64::INFINITY, f64::min),
            norm_u: mean(i, |s| s.norm_u),
            residue_norm: mean(i, |s| s.residue_norm),
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.t >= opts.growth_fit_start && r.residue_norm > 0.0)
        .map(|r| (libm::log(1.0 + r.t), libm::log(r.residue_norm)))
        .unzip();
    let beta_hat = if xs.len() >= 2 {
        Some(linear_fit(&xs, &ys)?.slope)
    } else {
        None
    };
    let mut report = SmoothingReport {
        alpha: params.alpha,
        resonant: ResonanceClassifier::new(params).is_resonant(),
        s0,
        s1,
        members: series.len(),
        rows,
        measured_gains: (0.0, 0.0),
        theory_gains: gains_for(params, s0, s1),
        beta_hat,
    };
    let r = report.row_at(opts.reference_time);
    report.measured_gains = (r.gain_u, r.gain_n);
    Ok(report)
}

/// Wave-part gains of a resonant run and a nonresonant run side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainContrast {
    pub resonant_a1: f64,
    pub nonresonant_a1: f64,
    /// Theoretical `a1` ceiling of the resonant run.
    pub resonant_ceiling: f64,
    pub nonresonant_ceiling: f64,
}

pub fn gain_contrast(resonant: &SmoothingReport, nonresonant: &SmoothingReport) -> Result<GainContrast> {
    if !resonant.resonant || nonresonant.resonant {
        return Err(Error::precondition("contrast needs one resonant and one nonresonant report"));
    }
    Ok(GainContrast {
        resonant_a1: resonant.measured_gains.1,
        nonresonant_a1: nonresonant.measured_gains.1,
        resonant_ceiling: resonant.theory_gains.1,
        nonresonant_ceiling: nonresonant.theory_gains.1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub s_list: Vec<f64>,
    pub times: Vec<f64>,
    /// `norms[i][j] = |u(t_j)|_{H^{s_i}} + |n+(t_j)|_{H^{s_i - 1}}`.
    pub norms: Vec<Vec<f64>>,
    /// Slope of `log norm` against `log(1 + t)`.
    pub c2_hat: Vec<f64>,
    /// Slope of `log norm` against `t`.
    pub exp_rate: Vec<f64>,
}

impl GrowthReport {
    pub fn sub_exponential(&self, threshold: f64) -> bool {
        self.exp_rate.iter().all(|r| *r <= threshold)
    }
}

/// Tracks `|u|_{H^s} + |n+|_{H^{s-1}}` for each `s` in `s_list`.
pub fn growth_track(traj: &Trajectory, s_list: &[f64]) -> Result<GrowthReport> {
    if s_list.iter().any(|s| !s.is_finite()) {
        return Err(Error::precondition("Sobolev indices must be finite"));
    }
    if traj.samples.len() < 2 {
        return Err(Error::precondition("growth fit needs at least two samples"));
    }
    let times = traj.times();
    let t0 = times[0];
    let norms: Vec<Vec<f64>> = s_list
        .iter()
        .map(|&s| {
            traj.samples
                .iter()
                .map(|st| sobolev_norm(&st.u, s) + sobolev_norm(&st.n_plus, s - 1.0))
                .collect()
        })
        .collect();
    let log_t: Vec<f64> = times.iter().map(|t| libm::log(1.0 + t - t0)).collect();
    let lin_t: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let mut c2_hat = Vec::with_capacity(s_list.len());
    let mut exp_rate = Vec::with_capacity(s_list.len());
    for row in &norms {
        if row.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::FitFailed("growth fit needs positive norms".into()));
        }
        let ly: Vec<f64> = row.iter().map(|v| libm::log(*v)).collect();
        c2_hat.push(linear_fit(&log_t, &ly)?.slope);
        exp_rate.push(linear_fit(&lin_t, &ly)?.slope);
    }
    Ok(GrowthReport {
        s_list: s_list.to_vec(),
        times,
        norms,
        c2_hat,
        exp_rate,
    })
}
