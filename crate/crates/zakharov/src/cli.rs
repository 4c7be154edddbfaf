//! Command-line entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, Command};
use crate::error::{Error, Result, EXIT_OK, EXIT_VALIDATION};
use crate::rundir::RunDir;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "ZAKHAROV_THREADS";

#[derive(Debug, Parser)]
#[command(name = "zakharov", version, about = "Spectral experiments for the periodic Zakharov system")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Integrate an ensemble and write trajectories and diagnostics.
    Simulate(Common),
    /// Check the normal-form identity on random data.
    NormalformCheck(NormalformArgs),
    /// Fit smoothing gains of the nonlinear residue.
    Smoothing(Common),
    /// Absorbing-ball fit and smooth-part attractor probe for the damped system.
    Attractor(Common),
    /// Summation lemma and sup-sum sweeps.
    Bounds(Common),
    /// Evolve data with nonzero means through the gauge.
    Gauge(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set t_end=2.0` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Dispersion coefficient, a number or `p/q`.
    #[arg(long)]
    alpha: Option<String>,
    /// Truncation radius.
    #[arg(long = "N", value_name = "N")]
    n: Option<i64>,
    #[arg(long)]
    seed: Option<i64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormalformArgs {
    #[command(flatten)]
    common: Common,
    /// Include the resonant terms (default).
    #[arg(long, conflicts_with = "without_rho")]
    with_rho: bool,
    /// Drop the resonant terms.
    #[arg(long)]
    without_rho: bool,
}

impl Sub {
    fn split(&self) -> (Command, &Common) {
        match self {
            Sub::Simulate(c) => (Command::Simulate, c),
            Sub::NormalformCheck(a) => (Command::NormalformCheck, &a.common),
            Sub::Smoothing(c) => (Command::Smoothing, c),
            Sub::Attractor(c) => (Command::Attractor, c),
            Sub::Bounds(c) => (Command::Bounds, c),
            Sub::Gauge(c) => (Command::Gauge, c),
        }
    }
}

/// Config file overlaid with `--set` assignments and then the named flags.
fn merged_table(sub: &Sub) -> Result<toml::Table> {
    let (_, c) = sub.split();
    let mut table = match &c.config {
        Some(path) => config::load_table(path)?,
        None => toml::Table::new(),
    };
    for a in &c.set {
        let (k, v) = config::parse_assignment(a)?;
        table.insert(k, v);
    }
    use toml::Value;
    if let Some(a) = &c.alpha {
        table.insert("alpha".into(), Value::String(a.clone()));
    }
    if let Some(n) = c.n {
        table.insert("N".into(), Value::Integer(n));
    }
    if let Some(s) = c.seed {
        table.insert("seeds".into(), Value::Array(vec![Value::Integer(s)]));
    }
    if let Some(dt) = c.dt {
        table.insert("dt".into(), Value::Float(dt));
    }
    if let Some(t) = c.t_end {
        table.insert("t_end".into(), Value::Float(t));
    }
    if let Some(d) = &c.output_dir {
        table.insert("output_dir".into(), Value::String(d.to_string_lossy().into_owned()));
    }
    if let Sub::NormalformCheck(a) = sub {
        if a.with_rho || a.without_rho {
            table.insert("with_rho".into(), Value::Boolean(a.with_rho));
        }
    }
    Ok(table)
}

/// Sizes the global rayon pool from [`THREADS_ENV`] if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::validation(format!("{THREADS_ENV} must be a positive integer (got `{raw}`)")))?;
    // A pool that is already built (e.g. by an earlier call) is left as is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(sub: &Sub, argv: &[String]) -> Result<(PathBuf, Option<String>)> {
    configure_threads()?;
    let (cmd, _) = sub.split();
    let table = merged_table(sub)?;
    let cfg = config::validate(cmd, &table)?;
    let mut run = RunDir::create(&cfg.output_dir(), cmd)?;
    let report = crate::commands::execute(cmd, &cfg, &mut run)?;
    let dir = run.finish(&table, argv)?;
    Ok((dir, report))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Reports go to stdout, the run directory and errors to
/// stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &argv) {
        Ok((dir, report)) => {
            if let Some(r) = report {
                print!("{r}");
            }
            eprintln!("run directory: {}", dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_for(args: &[&str]) -> toml::Table {
        let cli = Cli::try_parse_from(args).unwrap();
        merged_table(&cli.command).unwrap()
    }

    #[test]
    fn flags_override_sets() {
        let t = table_for(&["zakharov", "simulate", "--set", "N=8", "--N", "16", "--alpha", "3/4", "--seed", "4"]);
        assert_eq!(t["N"], toml::Value::Integer(16));
        assert_eq!(t["alpha"], toml::Value::String("3/4".into()));
        assert_eq!(t["seeds"], toml::Value::Array(vec![toml::Value::Integer(4)]));
    }

    #[test]
    fn rho_flags() {
        let t = table_for(&["zakharov", "normalform-check", "--without-rho"]);
        assert_eq!(t["with_rho"], toml::Value::Boolean(false));
        let t = table_for(&["zakharov", "normalform-check"]);
        assert!(!t.contains_key("with_rho"));
        assert!(Cli::try_parse_from(["zakharov", "normalform-check", "--with-rho", "--without-rho"]).is_err());
    }

    #[test]
    fn bad_subcommand_is_a_validation_error() {
        assert_eq!(run(["zakharov", "frobnicate"]), EXIT_VALIDATION);
        assert_eq!(run(["zakharov", "--help"]), EXIT_OK);
    }
}
