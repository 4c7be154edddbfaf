//! Subcommand bodies. Each takes a validated config, writes its artifacts
//! into the run directory and returns an optional report for stdout.

use serde_json::{json, Map, Value};
use zakharov_core::bounds::{LemmaSweep, SupSumKind, SupSumSweep};
use zakharov_core::dissipative::{q_norm, smooth_norm, DampedParams};
use zakharov_core::dynamics::{energy, integrate, mass, IntegrateOptions, Model, ModelParams, ZakharovState};
use zakharov_core::field::{Complex, FourierField};
use zakharov_core::random::{random_sobolev_field, RandomFieldOptions};
use zakharov_core::reduction::{from_plus_minus, gauge_normalize, to_plus_minus, ungauge, PhysicalTriple};
use zakharov_core::resonance::ResonanceClassifier;
use zakharov_core::smoothing::SmoothingOptions;

use crate::config::{Command, DataKind, ExperimentConfig, ForcingSpec};
use crate::error::{Error, Result};
use crate::experiments::{self, TimeGrid};
use crate::fft::RUSTFFT;
use crate::formats::{self, slope_so_far, to_json};
use crate::rundir::RunDir;

pub fn execute(cmd: Command, cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    match cmd {
        Command::Simulate => simulate(cfg, run),
        Command::NormalformCheck => normalform_check(cfg, run),
        Command::Smoothing => smoothing(cfg, run),
        Command::Attractor => attractor(cfg, run),
        Command::Bounds => bounds(cfg, run),
        Command::Gauge => gauge(cfg, run),
    }
}

fn rel_drift(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let x0 = xs[0];
    let worst = xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    if x0 == 0.0 {
        worst
    } else {
        worst / x0.abs()
    }
}

fn time_grid(cfg: &ExperimentConfig, default_stride: f64) -> Result<TimeGrid> {
    let t_end = cfg.t_end()?;
    Ok(TimeGrid {
        dt: cfg.dt_or_default()?,
        t_end,
        stride: cfg.sample_stride.unwrap_or(default_stride.min(t_end)),
    })
}

fn initial_state(cfg: &ExperimentConfig, radius: usize, seed: u64, s_u: f64, s_n: f64, amplitude: f64) -> ZakharovState {
    match cfg.data.unwrap_or_default() {
        DataKind::Zero => ZakharovState::zeros(radius),
        DataKind::Random => experiments::random_state(s_u, s_n, radius, seed, amplitude),
    }
}

fn simulate(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    let params = cfg.params()?;
    let radius = cfg.radius()?;
    let t_end = cfg.t_end()?;
    let grid = time_grid(cfg, t_end / 20.0)?;
    let model = match (cfg.gamma, &cfg.forcing) {
        (Some(g), forcing) => {
            let f = forcing.clone().unwrap_or_default().field(radius)?;
            Model::damped(params, g, Some(f))?
        }
        (None, Some(_)) => return Err(Error::validation("forcing needs gamma")),
        (None, None) => Model::conservative(params),
    };
    let s_list = cfg.s_list.clone().unwrap_or_else(|| vec![0.0, 1.0]);
    let (s0, s1, amp) = (cfg.s0.unwrap_or(1.0), cfg.s1.unwrap_or(0.0), cfg.amplitude.unwrap_or(1.0));
    let seeds = cfg.seed_list();
    let trajs = experiments::ensemble(&seeds, |seed| {
        experiments::run(&initial_state(cfg, radius, seed, s0, s1, amp), &model, &grid)
    })?;
    let mut members = Vec::new();
    for (seed, traj) in seeds.iter().zip(&trajs) {
        run.write_with(&format!("trajectory_seed{seed}.csv"), |w| formats::write_trajectory(w, traj))?;
        run.write_with(&format!("diagnostics_seed{seed}.csv"), |w| {
            formats::write_diagnostics(w, traj, &params, &s_list)
        })?;
        members.push(json!({
            "seed": seed,
            "samples": traj.samples.len(),
            "dt": traj.dt,
            "mass_drift": rel_drift(traj.samples.iter().map(mass)),
            "energy_drift": rel_drift(traj.samples.iter().map(|s| energy(s, &params))),
        }));
    }
    let summary = json!({ "alpha": params.alpha, "N": radius, "t_end": t_end, "members": members });
    run.write("summary.json", to_json(&summary)?.as_bytes())?;
    Ok(None)
}

fn normalform_check(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    let params = cfg.params()?;
    let radius = cfg.radius()?;
    let seed = cfg.seed_list()[0];
    let with_rho = cfg.with_rho.unwrap_or(true);
    let (s0, s1, amp) = (cfg.s0.unwrap_or(1.0), cfg.s1.unwrap_or(0.0), cfg.amplitude.unwrap_or(1.0));
    let res = experiments::identity_check(&params, radius, seed, s0, s1, amp, with_rho, cfg.rho2()?)?;
    let report = json!({
        "residual_u": res.residual_u,
        "residual_n": res.residual_n,
        "excluded_tuples_count": res.excluded_tuples,
        "input_scale": res.input_scale,
        "alpha": params.alpha,
        "resonant": ResonanceClassifier::new(&params).is_resonant(),
        "N": radius,
        "seed": seed,
        "with_rho": with_rho,
    });
    let text = to_json(&report)?;
    run.write("normalform.json", text.as_bytes())?;
    Ok(Some(text))
}

pub const SERIES_COLUMNS: [&str; 7] = [
    "t",
    "norm_s",
    "residue_norm",
    "fitted_reg_u",
    "fitted_reg_res",
    "fitted_reg_n",
    "fitted_reg_res_n",
];

fn smoothing(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    let params = cfg.params()?;
    let radius = cfg.radius()?;
    let grid = time_grid(cfg, 0.5)?;
    let (s0, s1) = (cfg.s0.unwrap_or(1.0), cfg.s1.unwrap_or(0.0));
    let band = cfg.fit_band.unwrap_or((4, 32));
    if band.1 > radius {
        return Err(Error::validation(format!("fit_band upper end {} exceeds N = {radius}", band.1)));
    }
    let opts = SmoothingOptions {
        band,
        reference_time: cfg.reference_time.unwrap_or(1.0),
        ..Default::default()
    };
    let seeds = cfg.seed_list();
    let out = experiments::smoothing_run(&params, s0, s1, radius, &grid, &seeds, &opts)?;
    let rows: Vec<Vec<f64>> = out
        .report
        .rows
        .iter()
        .map(|r| vec![r.t, r.norm_u, r.residue_norm, r.reg_u, r.reg_residue_u, r.reg_n, r.reg_residue_n])
        .collect();
    run.write_with("series.csv", |w| formats::write_table(w, &SERIES_COLUMNS, &rows))?;
    for (seed, series) in seeds.iter().zip(&out.series) {
        let rows: Vec<Vec<f64>> = series
            .iter()
            .map(|s| vec![s.t, s.norm_u, s.residue_norm, s.reg_u, s.reg_residue_u, s.reg_n, s.reg_residue_n])
            .collect();
        run.write_with(&format!("series_seed{seed}.csv"), |w| formats::write_table(w, &SERIES_COLUMNS, &rows))?;
    }
    let rep = &out.report;
    let report = json!({
        "alpha": rep.alpha,
        "resonant": rep.resonant,
        "s0": rep.s0,
        "s1": rep.s1,
        "N": radius,
        "seeds": seeds,
        "fit_band": band,
        "reference_time": opts.reference_time,
        "measured_gains": { "a0_hat": rep.measured_gains.0, "a1_hat": rep.measured_gains.1 },
        "theory_gains": { "a0": rep.theory_gains.0, "a1": rep.theory_gains.1 },
        "beta_hat": rep.beta_hat,
        "rows": rep.rows.iter().map(|r| json!({
            "t": r.t,
            "gain_u": r.gain_u,
            "gain_n": r.gain_n,
            "min_gain_u": r.min_gain_u,
        })).collect::<Vec<_>>(),
    });
    let text = to_json(&report)?;
    run.write("report.json", text.as_bytes())?;
    Ok(Some(text))
}

fn label(a: f64) -> String {
    format!("{a}")
}

fn attractor(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    let params = cfg.params()?;
    let radius = cfg.radius()?;
    let gamma = cfg.gamma.ok_or_else(|| Error::validation("missing required key: gamma"))?;
    let forcing = cfg
        .forcing
        .clone()
        .unwrap_or(ForcingSpec {
            h1_norm: Some(1.0),
            k_max: Some(3),
            ..Default::default()
        })
        .field(radius)?;
    let dp = DampedParams::new(params, gamma, forcing)?;
    let resonant = ResonanceClassifier::new(&params).is_resonant();
    let default_stride = if resonant {
        0.5f64.min(zakharov_core::dissipative::RESONANT_STRIDE_FACTOR / gamma)
    } else {
        0.5
    };
    let grid = time_grid(cfg, default_stride)?;
    let window = cfg.window.unwrap_or((5.0, 50.0f64.min(grid.t_end)));
    if !(window.0 >= 0.0 && window.0 <= window.1 && window.1 <= grid.t_end) {
        return Err(Error::validation("window must satisfy 0 <= start <= end <= t_end"));
    }
    let a_list = cfg.a_list.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let amp = cfg.amplitude.unwrap_or(0.5);
    let seeds = cfg.seed_list();
    let initial: Vec<ZakharovState> = seeds
        .iter()
        .map(|&s| initial_state(cfg, radius, s, 1.0, 0.0, amp))
        .collect();
    let out = experiments::dissipative_run(&dp, &initial, &grid, &a_list, window)?;
    for (i, seed) in seeds.iter().enumerate() {
        let traj = &out.trajectories[i];
        let dec = &out.decompositions[i];
        let fit = out.absorbing.members[i].fit;
        let mut cols = vec!["t".to_owned(), "Q".to_owned(), "Q_fit".to_owned()];
        cols.extend(a_list.iter().map(|a| format!("smooth_a{}", label(*a))));
        let rows: Vec<Vec<f64>> = traj
            .samples
            .iter()
            .zip(&dec.smooth)
            .map(|(s, n)| {
                let mut row = vec![s.t, q_norm(s), fit.map_or(f64::NAN, |f| f.eval(s.t))];
                row.extend(a_list.iter().map(|&a| smooth_norm(n, a)));
                row
            })
            .collect();
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        run.write_with(&format!("trajectory_seed{seed}.csv"), |w| formats::write_table(w, &cols, &rows))?;
    }
    let ab = &out.absorbing;
    let at = &out.attractor;
    let mut r_hat = Map::new();
    let mut spread = Map::new();
    for r in &at.radii {
        r_hat.insert(label(r.a), json!(r.r_hat));
        spread.insert(label(r.a), json!(r.spread));
    }
    let members: Vec<Value> = seeds
        .iter()
        .zip(&ab.members)
        .map(|(seed, m)| {
            json!({
                "seed": seed,
                "C1": m.fit.map(|f| f.c1),
                "C2": m.fit.map(|f| f.c2),
                "C3": m.fit.map(|f| f.c3),
                "rms_residual_rel": m.fit.map(|f| f.rms_residual / m.q[0]),
                "max_residual_rel": m.relative_residual(),
            })
        })
        .collect();
    let reassembly = out
        .decompositions
        .iter()
        .map(|d| d.reassembly_error)
        .fold(0.0, f64::max);
    let summary = json!({
        "alpha": params.alpha,
        "gamma": gamma,
        "N": radius,
        "C1": ab.c1_mean,
        "C2": ab.c2_mean,
        "C3": ab.c3_mean,
        "C1_spread": ab.c1_spread,
        "C3_in_bracket": ab.c3_in_bracket,
        "flagged": ab.flagged,
        "R_hat": r_hat,
        "R_hat_spread": spread,
        "window": window,
        "diameters": { "final": at.diameter },
        "linear_decay_error": at.linear_decay_error,
        "reassembly_error": reassembly,
        "members": members,
    });
    let text = to_json(&summary)?;
    run.write("summary.json", text.as_bytes())?;
    Ok(Some(text))
}

pub const SWEEP_NAMES: [&str; 4] = ["lemma_a", "lemma_b", "lemma_c", "supsum"];

fn lemma_rows(sw: &LemmaSweep) -> Vec<Vec<f64>> {
    let ratios: Vec<f64> = sw.values.iter().map(|v| v.ratio).collect();
    let slopes = slope_so_far(&sw.xs, &ratios);
    sw.xs
        .iter()
        .zip(&sw.values)
        .zip(slopes)
        .map(|((x, v), sl)| vec![*x, v.value, sl, v.bound, v.ratio, v.error_bar])
        .collect()
}

fn supsum_rows(sw: &SupSumSweep) -> Vec<Vec<f64>> {
    let ks: Vec<f64> = sw.ks.iter().map(|&k| k as f64).collect();
    let slopes = slope_so_far(&ks, &sw.values);
    ks.iter()
        .zip(&sw.values)
        .zip(slopes)
        .zip(&sw.running_sup)
        .map(|(((k, v), sl), sup)| vec![*k, *v, sl, *sup])
        .collect()
}

fn verdict(name: &str, slope: f64, threshold: f64, at_most: bool) -> Value {
    let pass = if at_most { slope <= threshold } else { slope >= threshold };
    json!({
        "sweep": name,
        "slope": slope,
        "threshold": threshold,
        "rule": if at_most { "slope <= threshold" } else { "slope >= threshold" },
        "pass": pass,
    })
}

fn bounds(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    let k_max = cfg.k_max.ok_or_else(|| Error::validation("missing required key: K"))?;
    if k_max < 1 {
        return Err(Error::validation("K must be positive"));
    }
    let tol = cfg.tolerances();
    let sweeps = cfg
        .sweeps
        .clone()
        .unwrap_or_else(|| SWEEP_NAMES.iter().map(|s| s.to_string()).collect());
    let unknown: Vec<&str> = sweeps
        .iter()
        .map(String::as_str)
        .filter(|s| !SWEEP_NAMES.contains(s))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::validation(format!("unknown sweeps: {}", unknown.join(", "))));
    }
    let lemma_cols = ["k", "sum", "slope_so_far", "bound", "ratio", "error_bar"];
    let supsum_cols = ["k", "sum", "slope_so_far", "running_sup"];
    let mut verdicts = Vec::new();
    for name in &sweeps {
        match name.as_str() {
            "lemma_a" | "lemma_b" => {
                let sw = if name == "lemma_a" { experiments::lemma_a()? } else { experiments::lemma_b()? };
                run.write_with(&format!("{name}.csv"), |w| formats::write_table(w, &lemma_cols, &lemma_rows(&sw)))?;
                verdicts.push(verdict(name, sw.slope, tol.lemma_slope, true));
            }
            "lemma_c" => {
                let sw = experiments::lemma_c()?;
                run.write_with("lemma_c_probe.csv", |w| {
                    formats::write_table(w, &lemma_cols, &lemma_rows(&sw.probe))
                })?;
                let grid: Vec<Vec<f64>> = sw.grid.iter().map(|&(c1, c2, v)| vec![c1, c2, v]).collect();
                run.write_with("lemma_c_grid.csv", |w| formats::write_table(w, &["c1", "c2", "sum"], &grid))?;
                let mut v = verdict("lemma_c", sw.probe.slope, tol.lemma_slope, true);
                v["grid_sup"] = json!(sw.sup);
                verdicts.push(v);
            }
            _ => {
                let alpha = match &cfg.alpha {
                    Some(a) => a.params()?,
                    None => ModelParams::rational(3, 4)?,
                };
                let (s0, s1, b) = (cfg.s0.unwrap_or(1.0), cfg.s1.unwrap_or(0.0), cfg.b.unwrap_or(0.55));
                for kind in SupSumKind::ALL {
                    let (corner, probe) = experiments::supsum_pair(kind, s0, s1, b, alpha, k_max)?;
                    let tag = kind.name();
                    run.write_with(&format!("supsum_{tag}.csv"), |w| {
                        formats::write_table(w, &supsum_cols, &supsum_rows(&corner))
                    })?;
                    run.write_with(&format!("sharpness_{tag}.csv"), |w| {
                        formats::write_table(w, &supsum_cols, &supsum_rows(&probe))
                    })?;
                    let mut v = verdict(&format!("supsum_{tag}"), corner.slope, tol.supsum_slope, true);
                    v["s"] = json!(corner.s);
                    v["in_range"] = json!(corner.in_range);
                    verdicts.push(v);
                    let mut v = verdict(&format!("sharpness_{tag}"), probe.slope, tol.sharpness_slope, false);
                    v["s"] = json!(probe.s);
                    verdicts.push(v);
                }
            }
        }
    }
    let text = to_json(&json!({ "K": k_max, "verdicts": verdicts }))?;
    run.write("verdicts.json", text.as_bytes())?;
    Ok(Some(text))
}

fn gauge(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Option<String>> {
    let params = cfg.params()?;
    let radius = cfg.radius()?;
    let t_end = cfg.t_end()?;
    let seed = cfg.seed_list()[0];
    let amp = cfg.amplitude.unwrap_or(0.5);
    let (a, b) = (cfg.n0_mean.unwrap_or(0.0), cfg.n1_mean.unwrap_or(0.0));
    let o = RandomFieldOptions {
        amplitude: amp,
        ..Default::default()
    };
    let real = RandomFieldOptions { real: true, ..o };
    let with_mean = |f: FourierField, m: f64| {
        let mut f = f;
        f.set(0, Complex::new(m, 0.0));
        f.assume_real()
    };
    let triple = PhysicalTriple::new(
        random_sobolev_field(1.0, radius, 3 * seed, false, &o),
        with_mean(random_sobolev_field(0.0, radius, 3 * seed + 1, true, &real), a),
        with_mean(random_sobolev_field(-1.0, radius, 3 * seed + 2, true, &real), b),
    )?;
    let (gauged, record) = gauge_normalize(&triple);
    let state = to_plus_minus(&gauged)?;
    let opts = IntegrateOptions::new(cfg.dt_or_default()?, t_end)
        .with_stride(t_end)
        .with_fft(&RUSTFFT);
    let traj = integrate(&state, &Model::conservative(params), &opts)?;
    let phys = ungauge(&from_plus_minus(traj.last()), t_end, &record);
    for (name, f) in [
        ("initial_u.csv", &triple.u0),
        ("initial_n.csv", &triple.n0),
        ("initial_nt.csv", &triple.n1),
        ("final_u.csv", &phys.u0),
        ("final_n.csv", &phys.n0),
        ("final_nt.csv", &phys.n1),
    ] {
        run.write_with(name, |w| formats::write_field(w, f))?;
    }
    let text = to_json(&json!({ "A": record.a, "B": record.b, "t_end": t_end, "phase": record.phase(t_end) }))?;
    run.write("gauge.json", text.as_bytes())?;
    Ok(Some(text))
}
