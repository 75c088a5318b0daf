//! CSV serialization of sweep rows.
//!
//! UTF-8, comma separated, one header line, reals with 17 significant digits
//! (exact `f64` round trip), absent values as empty fields.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::sweep::{Source, SweepRow};

pub const CSV_HEADER: [&str; 13] = [
    "ensemble",
    "alpha_sq",
    "intensity_gain",
    "eta1",
    "eta2",
    "t2_sq",
    "source",
    "p_success",
    "p_success_se",
    "fidelity",
    "fidelity_se",
    "noise_figure",
    "noise_figure_se",
];

pub(crate) fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub(crate) fn parse_real(field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("not a real number: `{field}`")))
}

pub(crate) fn parse_opt_real(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_real(field).map(Some)
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.ensemble.as_str().to_string(),
            real(r.alpha_sq),
            real(r.intensity_gain),
            real(r.eta1),
            real(r.eta2),
            real(r.t2_sq),
            r.source.as_str().to_string(),
            real(r.p_success),
            opt_real(r.p_success_se),
            opt_real(r.fidelity),
            opt_real(r.fidelity_se),
            opt_real(r.noise_figure),
            opt_real(r.noise_figure_se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` to the file at `destination`.
pub fn emit_csv(rows: &[SweepRow], destination: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("rows", "nothing to write"));
    }
    let file = File::create(destination)?;
    let mut out = BufWriter::new(file);
    write_csv(rows, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let rec = record?;
        rows.push(SweepRow {
            ensemble: rec[0].parse()?,
            alpha_sq: parse_real(&rec[1])?,
            intensity_gain: parse_real(&rec[2])?,
            eta1: parse_real(&rec[3])?,
            eta2: parse_real(&rec[4])?,
            t2_sq: parse_real(&rec[5])?,
            source: rec[6].parse::<Source>()?,
            p_success: parse_real(&rec[7])?,
            p_success_se: parse_opt_real(&rec[8])?,
            fidelity: parse_opt_real(&rec[9])?,
            fidelity_se: parse_opt_real(&rec[10])?,
            noise_figure: parse_opt_real(&rec[11])?,
            noise_figure_se: parse_opt_real(&rec[12])?,
        });
    }
    Ok(rows)
}
