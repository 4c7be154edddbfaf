//! Ensemble runners shared by the subcommands and the acceptance suite.
//!
//! Members run in parallel on the rayon pool and are collected in seed
//! order, so results do not depend on the thread count.

use rayon::prelude::*;
use zakharov_core::bounds::{
    dyadic_grid, lemma_a_sweep, lemma_b_sweep, lemma_c_sweep, supsum_column_unweighted, LemmaCSweep, LemmaSweep,
    SupSumKind, SupSumParams, SupSumSweep,
};
use zakharov_core::dissipative::{
    absorbing_fit, attractor_probe, smooth_part, AbsorbingReport, AttractorReport, DampedParams, SmoothDecomposition,
};
use zakharov_core::dynamics::{integrate, IntegrateOptions, Model, ModelParams, Trajectory, ZakharovState};
use zakharov_core::normal_form::{IdentityOptions, IdentityResidual, NormalForm, Rho2Variant};
use zakharov_core::random::{random_sobolev_field, RandomFieldOptions};
use zakharov_core::smoothing::{
    member_series, smoothing_initial_state, smoothing_report, SmoothingOptions, SmoothingReport, SmoothingSnapshot,
};

use crate::error::Result;
use crate::fft::RUSTFFT;

/// Runs `f` for every seed in parallel and returns the results in seed
/// order; the first error (in seed order) wins.
pub fn ensemble<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    seeds.par_iter().map(|&s| f(s)).collect::<Vec<_>>().into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_end: f64,
    pub stride: f64,
}

impl TimeGrid {
    pub fn options(&self) -> IntegrateOptions {
        IntegrateOptions::new(self.dt, self.t_end)
            .with_stride(self.stride)
            .with_fft(&RUSTFFT)
    }
}

pub fn run(state: &ZakharovState, model: &Model, grid: &TimeGrid) -> Result<Trajectory> {
    Ok(integrate(state, model, &grid.options())?)
}

/// Random `u` in `H^{s_u}` and real mean-zero `n+` in `H^{s_n}`, both scaled
/// to the given amplitude, from seeds `2 seed` and `2 seed + 1`.
pub fn random_state(s_u: f64, s_n: f64, radius: usize, seed: u64, amplitude: f64) -> ZakharovState {
    let o = RandomFieldOptions {
        amplitude,
        ..Default::default()
    };
    let on = RandomFieldOptions { real: true, ..o };
    let u = random_sobolev_field(s_u, radius, 2 * seed, false, &o);
    let n = random_sobolev_field(s_n, radius, 2 * seed + 1, true, &on);
    ZakharovState::new(u, n, 0.0).expect("generated fields share a radius")
}

pub struct SmoothingRun {
    pub report: SmoothingReport,
    pub series: Vec<Vec<SmoothingSnapshot>>,
}

pub fn smoothing_run(
    params: &ModelParams,
    s0: f64,
    s1: f64,
    radius: usize,
    grid: &TimeGrid,
    seeds: &[u64],
    opts: &SmoothingOptions,
) -> Result<SmoothingRun> {
    let model = Model::conservative(*params);
    let series = ensemble(seeds, |seed| {
        let traj = run(&smoothing_initial_state(s0, s1, radius, seed), &model, grid)?;
        Ok(member_series(&traj, params, s0, s1, opts)?)
    })?;
    let report = smoothing_report(params, s0, s1, &series, opts)?;
    Ok(SmoothingRun { report, series })
}

/// Identity residual for `u` in `H^{s0}`, `n+` in `H^{s1}` drawn from `seed`.
#[allow(clippy::too_many_arguments)]
pub fn identity_check(
    params: &ModelParams,
    radius: usize,
    seed: u64,
    s0: f64,
    s1: f64,
    amplitude: f64,
    with_rho: bool,
    variant: Rho2Variant,
) -> Result<IdentityResidual> {
    let state = random_state(s0, s1, radius, seed, amplitude);
    let opts = IdentityOptions {
        without_rho: !with_rho,
        rho2_variant: variant,
    };
    Ok(NormalForm::new(params, radius).identity_residual(&state, &opts)?)
}

pub struct DissipativeRun {
    pub trajectories: Vec<Trajectory>,
    pub decompositions: Vec<SmoothDecomposition>,
    pub absorbing: AbsorbingReport,
    pub attractor: AttractorReport,
}

/// Damped runs from `H^1 x L^2` data, followed by the absorbing-ball fit and
/// the smooth-part attractor probe.
pub fn dissipative_run(
    dp: &DampedParams,
    initial: &[ZakharovState],
    grid: &TimeGrid,
    a_list: &[f64],
    window: (f64, f64),
) -> Result<DissipativeRun> {
    let model = dp.model();
    let idx: Vec<u64> = (0..initial.len() as u64).collect();
    let trajectories = ensemble(&idx, |i| run(&initial[i as usize], &model, grid))?;
    let decomps = ensemble(&idx, |i| Ok(smooth_part(&trajectories[i as usize], dp)?))?;
    let absorbing = absorbing_fit(&trajectories, dp.gamma)?;
    let attractor = attractor_probe(&trajectories, &decomps, a_list, window, dp.gamma)?;
    Ok(DissipativeRun {
        trajectories,
        decompositions: decomps,
        absorbing,
        attractor,
    })
}

/// Sup-sum sweep over [`dyadic_grid`] with inner cutoff `8 K`, columns in
/// parallel. Returns the unweighted columns too, for reweighting.
pub fn supsum_sweep_par(kind: SupSumKind, p: &SupSumParams, k_max: i64) -> Result<(SupSumSweep, Vec<f64>)> {
    let ks = dyadic_grid(k_max);
    let cols: Vec<f64> = ks
        .par_iter()
        .map(|&k| supsum_column_unweighted(kind, p, k, 8 * k_max))
        .collect();
    let sweep = SupSumSweep::from_unweighted(kind, p, ks, &cols)?;
    Ok((sweep, cols))
}

/// Corner sweep and the sharpness probe at `s + 1`, which reuses the corner
/// columns.
pub fn supsum_pair(kind: SupSumKind, s0: f64, s1: f64, b: f64, alpha: ModelParams, k_max: i64) -> Result<(SupSumSweep, SupSumSweep)> {
    let p = SupSumParams {
        s: SupSumParams::corner(kind, s0, s1, b),
        s0,
        s1,
        b,
        alpha,
    };
    let (corner, cols) = supsum_sweep_par(kind, &p, k_max)?;
    let sharp = SupSumParams { s: p.s + 1.0, ..p };
    let probe = SupSumSweep::from_unweighted(kind, &sharp, corner.ks.clone(), &cols)?;
    Ok((corner, probe))
}

pub const LEMMA_A_BETA: f64 = 0.6;
pub const LEMMA_A_GAMMA: f64 = 0.6;
pub const LEMMA_A_MAX_EXP: u32 = 10;
pub const LEMMA_A_CUTOFF: u64 = 1 << 22;
pub const LEMMA_B_BETA: f64 = 0.75;
pub const LEMMA_B_MAX_EXP: u32 = 20;
pub const LEMMA_C_BETA: f64 = 0.6;
pub const LEMMA_C_MAX_DECADE: u32 = 6;
/// Probe `m` runs to `2^10 > 1000`.
pub const LEMMA_C_PROBE_MAX_EXP: u32 = 10;
pub const LEMMA_C_CUTOFF: u64 = 1 << 16;

pub fn lemma_a() -> Result<LemmaSweep> {
    Ok(lemma_a_sweep(LEMMA_A_BETA, LEMMA_A_GAMMA, LEMMA_A_MAX_EXP, LEMMA_A_CUTOFF)?)
}

pub fn lemma_b() -> Result<LemmaSweep> {
    Ok(lemma_b_sweep(LEMMA_B_BETA, LEMMA_B_MAX_EXP)?)
}

pub fn lemma_c() -> Result<LemmaCSweep> {
    Ok(lemma_c_sweep(LEMMA_C_BETA, LEMMA_C_MAX_DECADE, LEMMA_C_PROBE_MAX_EXP, LEMMA_C_CUTOFF)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_keeps_seed_order() {
        let out = ensemble(&[5, 1, 3], |s| Ok(s * 10)).unwrap();
        assert_eq!(out, [50, 10, 30]);
        let err = ensemble(&[1, 2, 3], |s| {
            if s >= 2 {
                Err(crate::error::Error::validation(format!("seed {s}")))
            } else {
                Ok(s)
            }
        });
        assert!(err.unwrap_err().to_string().ends_with("seed 2"));
    }

    #[test]
    fn small_supsum_pair_matches_sequential() {
        let alpha = ModelParams::rational(3, 4).unwrap();
        let (corner, probe) = supsum_pair(SupSumKind::R3, 1.0, 0.0, 0.55, alpha, 8).unwrap();
        let p = SupSumParams {
            s: corner.s,
            s0: 1.0,
            s1: 0.0,
            b: 0.55,
            alpha,
        };
        let seq = zakharov_core::bounds::supsum_sweep(SupSumKind::R3, &p, 8).unwrap();
        assert_eq!(corner, seq);
        assert_eq!(probe.s, corner.s + 1.0);
        assert!(probe.slope > corner.slope + 1.5);
    }
}
