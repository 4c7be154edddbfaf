use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use zakharov::formats::{read_field, read_table, read_trajectory};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zakharov"))
}

fn zakharov(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn run_dirs(out: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn zero_data_gives_zero_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "zero.toml",
        "alpha = \"3/4\"\nN = 16\nt_end = 0.5\nsample_stride = 0.25\ndata = \"zero\"\nseeds = [0, 1]\noutput_dir = \"out\"\n",
    );
    let o = zakharov(tmp.path(), &["simulate", "--config", "zero.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dirs = run_dirs(&tmp.path().join("out"));
    assert_eq!(dirs.len(), 1);
    for seed in [0, 1] {
        let f = std::fs::File::open(dirs[0].join(format!("trajectory_seed{seed}.csv"))).unwrap();
        let traj = read_trajectory(f).unwrap();
        assert_eq!(traj.samples.len(), 3);
        assert!(traj.samples.iter().all(|s| s.u.max_abs() == 0.0 && s.n_plus.max_abs() == 0.0));
        let (cols, rows) = read_table(std::fs::File::open(dirs[0].join(format!("diagnostics_seed{seed}.csv"))).unwrap()).unwrap();
        assert_eq!(cols, ["t", "mass", "energy", "u_H0", "u_H1", "np_H0", "np_H1"]);
        assert!(rows.iter().all(|r| r[1..].iter().all(|v| *v == 0.0)));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dirs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["versions"]["format"], 1);
    assert!(manifest["versions"]["zakharov_core"].is_string());
    let names: Vec<&str> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"trajectory_seed1.csv") && names.contains(&"summary.json"));
}

#[test]
fn missing_n_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "alpha = 1\nt_end = 1.0\n");
    let o = zakharov(tmp.path(), &["simulate", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing required keys: N"), "{}", stderr(&o));
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn unknown_keys_are_listed() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "alpha = 1\nN = 16\nt_end = 1.0\nbogus = 1\nzeta = 2\n");
    let o = zakharov(tmp.path(), &["smoothing", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("bogus") && e.contains("zeta"), "{e}");
}

#[test]
fn bad_alpha_and_threads_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zakharov(tmp.path(), &["normalform-check", "--alpha", "-3/4", "--N", "16"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = bin()
        .current_dir(tmp.path())
        .env("ZAKHAROV_THREADS", "zero")
        .args(["normalform-check", "--alpha", "3/4", "--N", "16"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ZAKHAROV_THREADS"));
}

#[test]
fn blow_up_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zakharov(
        tmp.path(),
        &["simulate", "--alpha", "1", "--N", "16", "--t-end", "5", "--dt", "0.5", "--set", "amplitude=1e4"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("blow-up"));
    let runs = tmp.path().join("runs");
    assert!(!runs.exists() || std::fs::read_dir(&runs).unwrap().count() == 0);
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn identical_invocations_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--alpha", "3/4", "--N", "16", "--t-end", "0.5", "--set", "sample_stride=0.1", "--set",
        "seeds=[3, 4]",
    ];
    for threads in ["1", "2"] {
        let o = bin().current_dir(tmp.path()).env("ZAKHAROV_THREADS", threads).args(args).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let dirs = run_dirs(&tmp.path().join("runs"));
    assert_eq!(dirs.len(), 2);
    let (a, b) = (csv_bytes(&dirs[0]), csv_bytes(&dirs[1]));
    assert_eq!(a.len(), 4);
    assert_eq!(a, b);
}

#[test]
fn snapshot_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zakharov(
        tmp.path(),
        &["smoothing", "--alpha", "3/4", "--N", "32", "--t-end", "1", "--set", "fit_band=[2, 16]", "--seed", "7"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = run_dirs(&tmp.path().join("runs"));
    assert_eq!(first.len(), 1);
    let snap = first[0].join("config.toml");
    let o = zakharov(tmp.path(), &["smoothing", "--config", snap.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dirs = run_dirs(&tmp.path().join("runs"));
    assert_eq!(dirs.len(), 2);
    assert_eq!(csv_bytes(&dirs[0]), csv_bytes(&dirs[1]));
    assert_eq!(
        std::fs::read(dirs[0].join("report.json")).unwrap(),
        std::fs::read(dirs[1].join("report.json")).unwrap()
    );
    let (cols, rows) = read_table(std::fs::File::open(dirs[0].join("series.csv")).unwrap()).unwrap();
    assert_eq!(&cols[..5], ["t", "norm_s", "residue_norm", "fitted_reg_u", "fitted_reg_res"]);
    assert_eq!(rows.len(), 2);
}

#[test]
fn normalform_check_reports_json() {
    let tmp = tempfile::tempdir().unwrap();
    let with = zakharov(tmp.path(), &["normalform-check", "--alpha", "1", "--N", "16", "--seed", "2"]);
    assert_eq!(with.status.code(), Some(0), "{}", stderr(&with));
    let with: serde_json::Value = serde_json::from_slice(&with.stdout).unwrap();
    let without = zakharov(tmp.path(), &["normalform-check", "--alpha", "1", "--N", "16", "--seed", "2", "--without-rho"]);
    let without: serde_json::Value = serde_json::from_slice(&without.stdout).unwrap();
    for k in ["residual_u", "residual_n", "excluded_tuples_count"] {
        assert!(with.get(k).is_some(), "{with}");
    }
    assert!(with["excluded_tuples_count"].as_u64().unwrap() > 0);
    let r = |v: &serde_json::Value| v["residual_u"].as_f64().unwrap().max(v["residual_n"].as_f64().unwrap());
    assert!(r(&with) < 1e-10 * with["input_scale"].as_f64().unwrap(), "{with}");
    assert!(r(&without) > 1e3 * r(&with));
    let nr = zakharov(tmp.path(), &["normalform-check", "--alpha", "3/4", "--N", "16"]);
    let nr: serde_json::Value = serde_json::from_slice(&nr.stdout).unwrap();
    assert_eq!(nr["excluded_tuples_count"], 0);
}

#[test]
fn gauge_writes_means_and_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zakharov(
        tmp.path(),
        &["gauge", "--alpha", "1", "--N", "16", "--t-end", "0.5", "--set", "n0_mean=0.7", "--set", "n1_mean=-0.4"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let g: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(g["A"], 0.7);
    assert_eq!(g["B"], -0.4);
    let dir = &run_dirs(&tmp.path().join("runs"))[0];
    let n = read_field(std::fs::File::open(dir.join("final_n.csv")).unwrap()).unwrap();
    assert!((n.get(0).re - (0.7 - 0.4 * 0.5)).abs() < 1e-12);
    let nt = read_field(std::fs::File::open(dir.join("final_nt.csv")).unwrap()).unwrap();
    assert!((nt.get(0).re + 0.4).abs() < 1e-12);
}

#[test]
fn attractor_without_forcing_decays() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "a.toml",
        "alpha = \"3/4\"\nN = 16\ngamma = 0.5\nt_end = 20.0\nsample_stride = 0.5\nseeds = [0, 1]\nwindow = [5.0, 20.0]\n[forcing]\nmodes = []\n",
    );
    let o = zakharov(tmp.path(), &["attractor", "--config", "a.toml"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s["diameters"]["final"].as_f64().unwrap() < 1e-3, "{s}");
    for a in ["0.25", "0.5", "0.75"] {
        assert!(s["R_hat"][a].is_number());
    }
    let dir = &run_dirs(&tmp.path().join("runs"))[0];
    let (cols, rows) = read_table(std::fs::File::open(dir.join("trajectory_seed1.csv")).unwrap()).unwrap();
    assert_eq!(cols, ["t", "Q", "Q_fit", "smooth_a0.25", "smooth_a0.5", "smooth_a0.75"]);
    assert_eq!(rows.len(), 41);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] + 1e-10));
}

#[test]
fn bounds_writes_sweeps_and_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = zakharov(tmp.path(), &["bounds", "--set", "K=16", "--set", "sweeps=[\"supsum\", \"lemma_b\"]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 9);
    let dir = &run_dirs(&tmp.path().join("runs"))[0];
    let (cols, rows) = read_table(std::fs::File::open(dir.join("supsum_R1.csv")).unwrap()).unwrap();
    assert_eq!(&cols[..3], ["k", "sum", "slope_so_far"]);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [0.0, 1.0, 2.0, 4.0, 8.0, 16.0]);
    assert!(rows[1][2].is_nan() && rows[2][2].is_finite());
    let o = zakharov(tmp.path(), &["bounds", "--set", "K=16", "--set", "sweeps=[\"nope\"]"]);
    assert_eq!(o.status.code(), Some(2));
}
