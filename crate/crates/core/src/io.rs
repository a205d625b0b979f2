//! CSV and report formats shared by the command-line tools.
//!
//! Tables are comma separated with a header row. Optional metadata lives in
//! leading `# key=value` comment lines. Floats are written as `{:.9e}` so
//! repeated runs produce byte-identical files.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::calibration::CouplingPoint;
use crate::error::{Error, Result};
use crate::misalign::SweepRow;
use crate::overlap::ScanRow;
use crate::scalar::{c, Real};
use crate::spectra::{RingdownRecord, SpectrumRecord, Units};

pub const SPECTRUM_COLUMNS: [&str; 2] = ["freq_hz", "psd"];
pub const CALIBRATED_COLUMNS: [&str; 2] = ["freq_hz", "psd_rad2_per_hz"];
pub const RINGDOWN_COLUMNS: [&str; 2] = ["t_s", "amplitude"];
pub const KNIFE_COLUMNS: [&str; 2] = ["position_m", "power_w"];
pub const COUPLING_COLUMNS: [&str; 3] = ["x_m", "eta00", "eta10"];
pub const SHOT_COLUMNS: [&str; 2] = ["power_w", "psd_v2_per_hz"];
pub const SCAN_COLUMNS: [&str; 5] = ["y0_m", "beta10", "beta01", "dphidx", "dphidy"];
pub const SWEEP_COLUMNS: [&str; 5] = ["x_s_m", "eta_closed", "eta_numeric", "S_imp_rad2_per_Hz", "S_imp00_rad2_per_Hz"];

/// A parsed table: metadata from `#` lines plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<Vec<f64>>,
}

/// Format one float the way every table in this crate does.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

/// Write `columns` and `rows` with optional metadata.
pub fn write_table<W: Write>(mut out: W, meta: &[(&str, String)], columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    if !meta.is_empty() {
        let line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", line.join(" "))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_float(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a table whose header must equal `columns`.
pub fn read_table<R: Read>(mut input: R, columns: &[&str]) -> Result<Table> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut meta = BTreeMap::new();
    for line in text.lines().take_while(|l| l.trim_start().starts_with('#')) {
        for pair in line.trim_start().trim_start_matches('#').split_whitespace() {
            if let Some((k, v)) = pair.split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != columns {
        let line = reader.position().line() as usize;
        return Err(Error::Parse { line, reason: format!("expected columns `{}`, found `{}`", columns.join(","), header.iter().collect::<Vec<_>>().join(",")) });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = record
            .iter()
            .enumerate()
            .map(|(i, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse { line, reason: format!("column `{}`: `{field}` is not a number", columns[i]) })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { meta, rows })
}

fn column<T: Real>(t: &Table, i: usize) -> Vec<T> {
    t.rows.iter().map(|r| c(r[i])).collect()
}

pub fn write_spectrum<T: Real, W: Write>(rec: &SpectrumRecord<T>, out: W) -> Result<()> {
    let meta = [("units", rec.units.tag().to_string()), ("n_avg", rec.n_avg.to_string())];
    let cols = if rec.units == Units::RadSq { &CALIBRATED_COLUMNS } else { &SPECTRUM_COLUMNS };
    write_table(out, &meta, cols, rec.freq.iter().zip(&rec.psd).map(|(f, p)| vec![f.as_f64(), p.as_f64()]))
}

/// Read a spectrum; `units` defaults to V2/Hz and `n_avg` to 1 when absent.
pub fn read_spectrum<T: Real, R: Read>(mut input: R) -> Result<SpectrumRecord<T>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let calibrated = text.lines().find(|l| !l.trim_start().starts_with('#')).is_some_and(|l| l.contains("psd_rad2_per_hz"));
    let cols = if calibrated { &CALIBRATED_COLUMNS } else { &SPECTRUM_COLUMNS };
    let t = read_table(text.as_bytes(), cols)?;
    let units = match t.meta.get("units") {
        Some(u) => u.parse()?,
        None if calibrated => Units::RadSq,
        None => Units::VoltsSq,
    };
    let n_avg = match t.meta.get("n_avg") {
        Some(n) => n.parse().map_err(|_| Error::Parse { line: 1, reason: format!("n_avg `{n}` is not a positive integer") })?,
        None => 1,
    };
    SpectrumRecord::new(column(&t, 0), column(&t, 1), units, n_avg)
}

pub fn write_ringdown<T: Real, W: Write>(rec: &RingdownRecord<T>, out: W) -> Result<()> {
    let meta = [("noise_floor", fmt_float(rec.noise_floor.as_f64()))];
    write_table(out, &meta, &RINGDOWN_COLUMNS, rec.time.iter().zip(&rec.amplitude).map(|(t, a)| vec![t.as_f64(), a.as_f64()]))
}

pub fn read_ringdown<T: Real, R: Read>(input: R) -> Result<RingdownRecord<T>> {
    let t = read_table(input, &RINGDOWN_COLUMNS)?;
    let floor = match t.meta.get("noise_floor") {
        Some(v) => v.parse::<f64>().map_err(|_| Error::Parse { line: 1, reason: format!("noise_floor `{v}` is not a number") })?,
        None => 0.0,
    };
    RingdownRecord::new(column(&t, 0), column(&t, 1), c(floor))
}

pub fn write_pairs<T: Real, W: Write>(pairs: &[(T, T)], columns: &[&str; 2], out: W) -> Result<()> {
    write_table(out, &[], columns, pairs.iter().map(|(a, b)| vec![a.as_f64(), b.as_f64()]))
}

/// Two-column table such as a knife-edge profile or shot-noise series.
pub fn read_pairs<T: Real, R: Read>(input: R, columns: &[&str; 2]) -> Result<Vec<(T, T)>> {
    let t = read_table(input, columns)?;
    Ok(t.rows.iter().map(|r| (c(r[0]), c(r[1]))).collect())
}

pub fn write_coupling<T: Real, W: Write>(data: &[CouplingPoint<T>], out: W) -> Result<()> {
    write_table(out, &[], &COUPLING_COLUMNS, data.iter().map(|p| vec![p.x.as_f64(), p.eta00.as_f64(), p.eta10.as_f64()]))
}

pub fn read_coupling<T: Real, R: Read>(input: R) -> Result<Vec<CouplingPoint<T>>> {
    let t = read_table(input, &COUPLING_COLUMNS)?;
    Ok(t.rows.iter().map(|r| CouplingPoint { x: c(r[0]), eta00: c(r[1]), eta10: c(r[2]) }).collect())
}

pub fn write_scan<T: Real, W: Write>(rows: &[ScanRow<T>], out: W) -> Result<()> {
    write_table(
        out,
        &[],
        &SCAN_COLUMNS,
        rows.iter().map(|r| vec![r.y0.as_f64(), r.beta10.as_f64(), r.beta01.as_f64(), r.dphi_dx.as_f64(), r.dphi_dy.as_f64()]),
    )
}

pub fn write_sweep<T: Real, W: Write>(rows: &[SweepRow<T>], out: W) -> Result<()> {
    write_table(
        out,
        &[],
        &SWEEP_COLUMNS,
        rows.iter().map(|r| vec![r.shift.as_f64(), r.eta_closed.as_f64(), r.eta_numeric.as_f64(), r.imprecision.as_f64(), r.imprecision00.as_f64()]),
    )
}

/// `key = value` report lines.
pub fn write_report<W: Write>(mut out: W, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(())
}
