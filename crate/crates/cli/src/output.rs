use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::{Format, OutputArgs};

/// A flat result row that can be rendered in every output format.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;

    /// One line for the human-readable format.
    fn human(&self) -> String;
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

/// Short fixed-width rendering for the human format.
pub fn short(v: f64) -> String {
    format!("{v:.6}")
}

pub fn opt_short(v: Option<f64>) -> String {
    v.map(short).unwrap_or_else(|| "-".into())
}

pub fn writer(output: &OutputArgs) -> Result<Box<dyn Write>> {
    Ok(match &output.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn emit<R: Record>(records: &[R], format: Format, output: &OutputArgs) -> Result<()> {
    let mut w = writer(output)?;
    match format {
        Format::Human => {
            for r in records {
                writeln!(w, "{}", r.human())?;
            }
        }
        Format::Csv => {
            writeln!(w, "{}", R::HEADER.join(","))?;
            for r in records {
                writeln!(w, "{}", r.fields().join(","))?;
            }
        }
        Format::Jsonl => {
            for r in records {
                writeln!(w, "{}", serde_json::to_string(r)?)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
