//! CSV and JSON forms of reports, with matching readers.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields the exact values that were written.

use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};
use crate::metrology::{LinearityReport, SpectrumReport};

pub const LINEARITY_COLUMNS: [&str; 3] = ["code", "dnl_lsb", "inl_lsb"];
pub const SPECTRUM_COLUMNS: [&str; 3] = ["bin", "normalized_frequency", "power_db"];
pub const SWEEP_COLUMNS: [&str; 6] = ["value", "seed", "worst_dnl", "worst_inl", "sndr_db", "enob"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AdcError + '_ {
    move |source| AdcError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let got = rdr.headers()?;
    if got.iter().ne(want.iter().copied()) {
        return Err(AdcError::domain(format!(
            "unexpected CSV header {:?}, expected {want:?}",
            got.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| AdcError::domain(format!("bad {what} value `{field}`")))
}

fn flush<W: Write>(w: &mut csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|source| AdcError::Io {
        path: "<csv>".into(),
        source,
    })
}

pub fn write_linearity_csv<W: Write>(report: &LinearityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LINEARITY_COLUMNS)?;
    for (i, (d, l)) in report.dnl.iter().zip(&report.inl).enumerate() {
        w.write_record([report.code_at(i).to_string(), d.to_string(), l.to_string()])?;
    }
    flush(&mut w)
}

/// Rows of a linearity CSV as `(code, dnl, inl)`.
pub fn read_linearity_csv<R: Read>(input: R) -> Result<Vec<(u32, f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &LINEARITY_COLUMNS)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((parse(&rec[0], "code")?, parse(&rec[1], "dnl")?, parse(&rec[2], "inl")?))
        })
        .collect()
}

pub fn write_spectrum_csv<W: Write>(report: &SpectrumReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_COLUMNS)?;
    for (k, p) in report.power_db.iter().enumerate() {
        w.write_record([k.to_string(), report.normalized_frequency(k).to_string(), p.to_string()])?;
    }
    flush(&mut w)
}

/// Rows of a spectrum CSV as `(bin, normalized_frequency, power_db)`.
pub fn read_spectrum_csv<R: Read>(input: R) -> Result<Vec<(usize, f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &SPECTRUM_COLUMNS)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((parse(&rec[0], "bin")?, parse(&rec[1], "frequency")?, parse(&rec[2], "power")?))
        })
        .collect()
}

/// One sweep point: a parameter value measured under one seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub worst_dnl: f64,
    pub worst_inl: f64,
    pub sndr_db: f64,
    pub enob: f64,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.value.to_string(),
            r.seed.to_string(),
            r.worst_dnl.to_string(),
            r.worst_inl.to_string(),
            r.sndr_db.to_string(),
            r.enob.to_string(),
        ])?;
    }
    flush(&mut w)
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &SWEEP_COLUMNS)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(SweepRow {
                value: parse(&rec[0], "value")?,
                seed: parse(&rec[1], "seed")?,
                worst_dnl: parse(&rec[2], "worst_dnl")?,
                worst_inl: parse(&rec[3], "worst_inl")?,
                sndr_db: parse(&rec[4], "sndr_db")?,
                enob: parse(&rec[5], "enob")?,
            })
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}
