//! CSV and JSON artifacts.
//!
//! Reals are written with 17 significant digits so every file round-trips
//! bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use zakharov_core::dynamics::{energy, mass, ModelParams, Trajectory, ZakharovState};
use zakharov_core::field::{sobolev_norm, Complex, FourierField};
use zakharov_core::fit::loglog_slope;

use crate::error::{Error, Result};

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::validation(format!("bad {what} value `{s}`")))
}

fn parse_int(s: &str, what: &str) -> Result<i64> {
    s.trim()
        .parse()
        .map_err(|_| Error::validation(format!("bad {what} value `{s}`")))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn check_header<R: Read>(rd: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let got: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if got != want {
        return Err(Error::validation(format!("expected columns {want:?}, found {got:?}")));
    }
    Ok(())
}

/// Columns `k, re, im`, one row per mode from `-N` to `N`.
pub fn write_field<W: Write>(w: W, f: &FourierField) -> Result<()> {
    let mut w = writer(w);
    w.write_record(["k", "re", "im"])?;
    for (k, c) in f.modes() {
        w.write_record([k.to_string(), fmt_real(c.re), fmt_real(c.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(r: R) -> Result<FourierField> {
    let mut rd = reader(r);
    check_header(&mut rd, &["k", "re", "im"])?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push((
            parse_int(&rec[0], "k")?,
            Complex::new(parse_real(&rec[1], "re")?, parse_real(&rec[2], "im")?),
        ));
    }
    field_from_rows(rows)
}

fn field_from_rows(rows: Vec<(i64, Complex)>) -> Result<FourierField> {
    let n = (rows.len() as i64 - 1) / 2;
    if rows.is_empty() || rows.len().is_multiple_of(2) {
        return Err(Error::validation("a field needs 2N+1 rows"));
    }
    for (i, (k, _)) in rows.iter().enumerate() {
        if *k != i as i64 - n {
            return Err(Error::validation(format!("row {i} has k = {k}, expected {}", i as i64 - n)));
        }
    }
    Ok(FourierField::from_coeffs(rows.into_iter().map(|(_, c)| c).collect())?)
}

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "k", "re_u", "im_u", "re_np", "im_np"];

/// Columns `t, k, re_u, im_u, re_np, im_np`; one block of `2N+1` rows per
/// sample.
pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut w = writer(w);
    w.write_record(TRAJECTORY_COLUMNS)?;
    for s in &traj.samples {
        let t = fmt_real(s.t);
        for ((k, u), (_, n)) in s.u.modes().zip(s.n_plus.modes()) {
            w.write_record([t.clone(), k.to_string(), fmt_real(u.re), fmt_real(u.im), fmt_real(n.re), fmt_real(n.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the samples back; the step size is not stored and comes back as 0.
pub fn read_trajectory<R: Read>(r: R) -> Result<Trajectory> {
    let mut rd = reader(r);
    check_header(&mut rd, &TRAJECTORY_COLUMNS)?;
    let mut samples = Vec::new();
    let mut block: Vec<(i64, Complex, Complex)> = Vec::new();
    let mut block_t = f64::NAN;
    let flush = |block: &mut Vec<(i64, Complex, Complex)>, t: f64, samples: &mut Vec<ZakharovState>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let u = field_from_rows(block.iter().map(|r| (r.0, r.1)).collect())?;
        let n = field_from_rows(block.iter().map(|r| (r.0, r.2)).collect())?;
        samples.push(ZakharovState::new(u, n, t)?);
        block.clear();
        Ok(())
    };
    for rec in rd.records() {
        let rec = rec?;
        let t = parse_real(&rec[0], "t")?;
        if t.to_bits() != block_t.to_bits() {
            flush(&mut block, block_t, &mut samples)?;
            block_t = t;
        }
        block.push((
            parse_int(&rec[1], "k")?,
            Complex::new(parse_real(&rec[2], "re_u")?, parse_real(&rec[3], "im_u")?),
            Complex::new(parse_real(&rec[4], "re_np")?, parse_real(&rec[5], "im_np")?),
        ));
    }
    flush(&mut block, block_t, &mut samples)?;
    if samples.is_empty() {
        return Err(Error::validation("trajectory file has no samples"));
    }
    Ok(Trajectory { samples, dt: 0.0 })
}

fn index_label(s: f64) -> String {
    format!("{s}")
}

/// Columns `t, mass, energy`, then `u_H{s}` and `np_H{s}` for each `s`.
pub fn diagnostic_columns(s_list: &[f64]) -> Vec<String> {
    let mut cols = vec!["t".to_owned(), "mass".to_owned(), "energy".to_owned()];
    cols.extend(s_list.iter().map(|s| format!("u_H{}", index_label(*s))));
    cols.extend(s_list.iter().map(|s| format!("np_H{}", index_label(*s))));
    cols
}

pub fn write_diagnostics<W: Write>(w: W, traj: &Trajectory, params: &ModelParams, s_list: &[f64]) -> Result<()> {
    let mut w = writer(w);
    w.write_record(diagnostic_columns(s_list))?;
    for st in &traj.samples {
        let mut row = vec![fmt_real(st.t), fmt_real(mass(st)), fmt_real(energy(st, params))];
        row.extend(s_list.iter().map(|&s| fmt_real(sobolev_norm(&st.u, s))));
        row.extend(s_list.iter().map(|&s| fmt_real(sobolev_norm(&st.n_plus, s))));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Generic table of reals with a header.
pub fn write_table<W: Write>(w: W, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = writer(w);
    w.write_record(columns)?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::validation("row width does not match the header"));
        }
        w.write_record(row.iter().map(|x| if x.is_nan() { String::new() } else { fmt_real(*x) }))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`]; empty cells come back as NaN.
pub fn read_table<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rd = reader(r);
    let cols: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .map(|c| if c.is_empty() { Ok(f64::NAN) } else { parse_real(c, "table") })
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((cols, rows))
}

/// Log-log slope of `ys` against `<k>` over the rows seen so far with
/// `k >= 1`; NaN until two such rows exist.
pub fn slope_so_far(ks: &[f64], ys: &[f64]) -> Vec<f64> {
    (0..ks.len())
        .map(|i| {
            let (xs, vs): (Vec<f64>, Vec<f64>) = ks[..=i]
                .iter()
                .zip(&ys[..=i])
                .filter(|(k, _)| **k >= 1.0)
                .map(|(k, v)| (1.0 + k.abs(), *v))
                .unzip();
            if xs.len() < 2 {
                f64::NAN
            } else {
                loglog_slope(&xs, &vs).unwrap_or(f64::NAN)
            }
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_field_file(path: &Path, f: &FourierField) -> Result<()> {
    write_field(std::fs::File::create(path)?, f)
}

pub fn read_field_file(path: &Path) -> Result<FourierField> {
    read_field(std::fs::File::open(path)?)
}
